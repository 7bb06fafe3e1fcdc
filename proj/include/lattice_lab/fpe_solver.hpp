#pragma once

#include "lattice_lab/grid.hpp"
#include "lattice_lab/model.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace lattice_lab {

enum class Method {
    /// Exponentially fitted (Chang-Cooper / Scharfetter-Gummel) face fluxes.
    /// The drift-to-diffusion ratio is integrated across each cell pair, so
    /// any profile with zero continuous flux is a discrete fixed point.
    ChangCooper,
    /// Plain central fluxes; second order, used for convergence studies.
    CentralCrankNicolson,
};

enum class Boundary { NoFlux };

[[nodiscard]] std::string_view to_string(Method method) noexcept;
[[nodiscard]] Method parse_method(std::string_view name);

struct SchemeConfig {
    Method method = Method::ChangCooper;
    double dt = 0.01;
    /// 0 explicit, 1/2 Crank-Nicolson, 1 backward Euler.
    double theta = 1.0;
    Boundary boundary = Boundary::NoFlux;
};

struct GaussianProfile {
    double width = 1.0;
};
struct TsallisProfile {
    DerivedParams params;
};
struct CustomProfile {
    std::vector<double> values;
};
using InitialProfile = std::variant<GaussianProfile, TsallisProfile, CustomProfile>;

/// Samples the profile at cell centers and rescales to unit discrete mass.
[[nodiscard]] Field init_state(const Grid& grid, const InitialProfile& profile);

/// Tridiagonal generator of the semi-discrete equation dw/dt = A w, with
/// no-flux outer faces. Columns of A sum to zero, so mass is conserved.
class FluxOperator {
public:
    FluxOperator(const Grid& grid, const LatticeParams& params, Method method);

    [[nodiscard]] std::span<const double> lower() const noexcept { return lower_; }
    [[nodiscard]] std::span<const double> diag() const noexcept { return diag_; }
    [[nodiscard]] std::span<const double> upper() const noexcept { return upper_; }
    [[nodiscard]] double max_diffusion() const noexcept { return max_g_; }

    /// out = A w
    void apply(std::span<const double> w, std::span<double> out) const;

private:
    std::vector<double> lower_;
    std::vector<double> diag_;
    std::vector<double> upper_;
    double max_g_ = 0.0;
};

/// Theta-scheme stepper. The operator and the implicit matrix are built once;
/// reuse one Stepper across the steps of an evolution.
class Stepper {
public:
    Stepper(const Grid& grid, const LatticeParams& params, const SchemeConfig& cfg);

    /// Advances in place. Throws NumericalError (with the cell index) when a
    /// value becomes non-finite or negative.
    void advance(Field& state);

    [[nodiscard]] const SchemeConfig& config() const noexcept { return cfg_; }

private:
    SchemeConfig cfg_;
    FluxOperator op_;
    std::vector<double> sub_;
    std::vector<double> main_;
    std::vector<double> sup_;
    std::vector<double> rhs_;
    std::vector<double> scratch_c_;
    std::vector<double> scratch_d_;
};

/// One step. Throws ValidationError when dt breaks the explicit stability
/// bound dt <= dp^2 / (2 max g) for theta < 1/2.
[[nodiscard]] Field step(const Field& state, const LatticeParams& params, const SchemeConfig& cfg);

enum class Observer { Mass, SecondMoment, L1ToStationary, StationarityResidual };

struct EvolveOptions {
    double t_end = 1.0;
    /// Record every this many steps (plus the first and last state).
    std::size_t sample_every = 100;
    std::vector<Observer> observers = {Observer::Mass, Observer::SecondMoment, Observer::L1ToStationary,
                                       Observer::StationarityResidual};
    std::size_t max_steps = 10'000'000;
    double max_wall_seconds = 600.0;
};

/// One observer sample; unrequested or undefined columns are NaN.
struct TrajectoryRecord {
    double t;
    double mass;
    double m2;
    double l1_to_w0;
    double stat_residual;
};

struct EvolveResult {
    Field final_state;
    std::vector<TrajectoryRecord> records;
    std::size_t steps = 0;
    double dt_used = 0.0;
    double wall_seconds = 0.0;
    /// Largest fraction of mass seen in the outer 10% of the domain.
    double max_edge_mass_fraction = 0.0;
    /// p_max^2 / (2 gamma0): time for diffusion to reach the truncation edge.
    /// Moments grown for longer than this are shaped by the finite domain.
    double truncation_time_estimate = 0.0;
};

[[nodiscard]] EvolveResult evolve(const Field& state, const LatticeParams& params, const SchemeConfig& cfg,
                                  const EvolveOptions& options);

/// Max over cells of |d/dp (h w - g w_p)| from centered face differences,
/// with zero flux through the outer faces.
[[nodiscard]] double stationarity_residual(const Field& state, const LatticeParams& params);

struct MomentsResult {
    std::vector<double> values;
    /// Set when |p|^(n+1) w is not decaying toward the grid edge, i.e. the
    /// partial integrals are still growing and the moment likely diverges.
    std::vector<bool> divergence_warning;
};

/// Midpoint-rule moments sum_i p_i^n w_i dp.
[[nodiscard]] MomentsResult moments(const Field& state, std::span<const int> orders);

/// A power-of-two p_max whose stationary tail mass beyond +/- p_max is below
/// tail_mass.
[[nodiscard]] double default_p_max(const DerivedParams& d, double tail_mass = 1e-8);

}  // namespace lattice_lab
