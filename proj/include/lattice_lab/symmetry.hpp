#pragma once

#include "lattice_lab/errors.hpp"
#include "lattice_lab/grid.hpp"
#include "lattice_lab/model.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lattice_lab {

/// Generalized scaling generator
///
///   X = -p d_p + sigma t d_t + nu p^2 w^(1+delta) d_w.
///
/// The shape (xi = -p, tau = sigma t, phi quadratic in p and a power of w)
/// is fixed; only the three weights vary.
struct GeneratorSpec {
    double sigma = -2.0;
    double nu = 0.0;
    double delta = 0.0;

    /// sigma = -2 with nu = 2 beta Z^delta: the generator that leaves w0 invariant.
    [[nodiscard]] static GeneratorSpec canonical(const DerivedParams& d, double sigma = -2.0) {
        return {sigma, d.nu(), d.delta()};
    }
};

/// Second-order jet (p, t, w, w_p, w_t, w_pp).
struct JetPoint {
    double p = 0.0;
    double t = 0.0;
    double w = 0.0;
    double w_p = 0.0;
    double w_t = 0.0;
    double w_pp = 0.0;
};

/// First-order change of (w_t, w_p, w_pp) under the prolonged generator.
struct ProlongedCoeffs {
    double psi_t = 0.0;
    double psi_p = 0.0;
    double psi_pp = 0.0;
};

/// Decomposition of the determining residual
///
///   R = a0 + a1 w_p + a11 w_p^2 + a2 w_pp.
///
/// a11 = -delta (1 + delta) nu p^2 w^(delta-1) g(p) comes from the w_p^2 part
/// of the second prolongation; the commonly quoted three-term form
/// a0 + a1 w_p + a2 w_pp leaves it out.
struct ResidualCoeffs {
    double a0 = 0.0;
    double a1 = 0.0;
    double a2 = 0.0;
    double a11 = 0.0;

    [[nodiscard]] double evaluate(double w_p, double w_pp) const noexcept {
        return a0 + a1 * w_p + a11 * w_p * w_p + a2 * w_pp;
    }
};

/// Characteristic phi - w_p xi - w_t tau of the generator at a jet.
[[nodiscard]] double generator_variation(const JetPoint& jet, const GeneratorSpec& gen);

struct InvarianceResidual {
    /// max over interior cells of |nu p^2 w^q + p w_p|
    double sup_norm = 0.0;
    /// Cell index where the maximum is attained.
    std::size_t argmax = 0;
    /// Cells with w <= 0, skipped in the maximum.
    std::vector<std::size_t> nonpositive_cells;
};

/// Sup norm of the stationary invariance condition with w_p from centered
/// differences. Endpoint cells have no centered stencil and are skipped.
[[nodiscard]] InvarianceResidual invariance_residual(const Field& w, const DerivedParams& d);

struct FlowPoint {
    double p = 0.0;
    double w = 0.0;
};

/// Thrown when the w-component of the flow escapes to infinity before s.
class FlowBlowUp : public NumericalError {
public:
    FlowBlowUp(const std::string& what, double s_star) : NumericalError(what), s_star_(s_star) {}
    [[nodiscard]] double s_star() const noexcept { return s_star_; }

private:
    double s_star_;
};

/// Group flow of -p d_p + nu p^2 w^(1+delta) d_w:
///
///   p(s) = e^(-s) p0,
///   w(s) = [1 - (nu delta / 2) p0^2 (1 - e^(-2s)) w0^delta]^(-1/delta) w0.
///
/// Throws FlowBlowUp when the bracket is not positive at s.
[[nodiscard]] FlowPoint flow_map(double p0, double w0, double s, const GeneratorSpec& gen);

/// Time component of the flow: t(s) = e^(sigma s) t0.
[[nodiscard]] double flow_time(double t0, double s, const GeneratorSpec& gen) noexcept;

/// Smallest s > 0 at which flow_map blows up, if any.
[[nodiscard]] std::optional<double> flow_blowup_parameter(double p0, double w0, const GeneratorSpec& gen);

/// Second prolongation by the total-derivative rule
///   Psi_p  = D_p phi - w_p D_p xi - w_t D_p tau
///   Psi_t  = D_t phi - w_p D_t xi - w_t D_t tau
///   Psi_pp = D_p Psi_p - w_pp D_p xi - w_pt D_p tau.
[[nodiscard]] ProlongedCoeffs prolong_coeffs(const JetPoint& jet, const GeneratorSpec& gen);

/// Right-hand side of the expanded equation, w_t = F(p, w, w_p, w_pp).
[[nodiscard]] double fpe_rhs(double p, double w, double w_p, double w_pp, const LatticeParams& params);

/// Prolonged generator applied to (w_t - F) with w_t replaced by F.
/// The jet's w_t field is ignored.
[[nodiscard]] double determining_residual(const JetPoint& jet, const LatticeParams& params,
                                          const GeneratorSpec& gen);

/// Coefficients of the determining residual at (p, t, w), recovered exactly
/// from four jets: w_p in {0, +s1, -s1}, w_pp in {0, s2}.
[[nodiscard]] ResidualCoeffs extract_A(double p, double t, double w, const LatticeParams& params,
                                       const GeneratorSpec& gen);

/// Which transcription of the printed A1 to use. AsPrinted keeps the
/// (p_c^2 + w^2)^2 factor exactly as published; Repaired uses (p_c^2 + p^2)^2.
enum class ClosedFormVariant { Repaired, AsPrinted };

/// Published A2 for arbitrary sigma.
[[nodiscard]] double closed_A2(double p, const LatticeParams& params, double sigma);

/// Published A0, A1, A2 at sigma = -2 (ValidationError otherwise) with the
/// generator weights nu, delta taken from gen. a11 is filled from its
/// derived expression since it has no published counterpart.
[[nodiscard]] ResidualCoeffs closed_A(double p, double w, const LatticeParams& params,
                                      const GeneratorSpec& gen,
                                      ClosedFormVariant variant = ClosedFormVariant::Repaired);

/// Same, with the canonical generator of params at the given sigma.
[[nodiscard]] ResidualCoeffs closed_A(double p, double w, const LatticeParams& params, double sigma,
                                      ClosedFormVariant variant = ClosedFormVariant::Repaired);

/// A positive profile w(p) along whose graph the residual coefficients are
/// scanned. derivative may be empty, in which case it is estimated.
struct Profile {
    std::string name;
    std::function<double(double)> value;
    std::function<double(double)> derivative;

    [[nodiscard]] static Profile tsallis(const DerivedParams& d);
    /// C (1 + p^2)^(-k), with tail C p^(-2k).
    [[nodiscard]] static Profile power_law(double C, double k);
    /// Log-log interpolation of a field's positive half.
    [[nodiscard]] static Profile from_field(const Field& field);
};

struct ScanOptions {
    double p_min = 1e1;
    double p_max = 1e6;
    int points_per_decade = 4;
    double t = 1.0;
};

struct DecayRow {
    double p = 0.0;
    double abs_a0 = 0.0;
    double abs_a1 = 0.0;
    double abs_a2 = 0.0;
    /// |a11 w_p^2| along the profile.
    double abs_quadratic = 0.0;
};

struct DecayReport {
    double sigma = 0.0;
    std::string profile;
    std::vector<DecayRow> rows;
    /// Least-squares log-log slopes over the ladder.
    double slope_a0 = 0.0;
    double slope_a1 = 0.0;
    double slope_a2 = 0.0;
    double slope_quadratic = 0.0;
    /// A2 at the largest p and its large-|p| limit -gamma0 (2 + sigma).
    double a2_at_pmax = 0.0;
    double a2_plateau_expected = 0.0;
    /// |A2(p_max)| < 1e-8.
    bool a2_vanishes = false;
    /// All of A0, A1, A2 have negative fitted slopes.
    bool all_decay = false;
};

/// Evaluates |A0|, |A1|, |A2| on a geometric p-ladder along the graph of the
/// profile. Rejects profiles that do not decay to zero.
[[nodiscard]] DecayReport asymptotic_scan(const LatticeParams& params, const GeneratorSpec& gen,
                                          const Profile& profile, const ScanOptions& options = {});

/// (y, sigma_c, v) = (p^2 / t, t, w^(-delta) - (nu delta / 2) p^2). The sign
/// of p is carried separately since y is even in p.
struct AdaptedPoint {
    double y = 0.0;
    double sigma_c = 0.0;
    double v = 0.0;
    int p_sign = 1;
};

struct PhysicalPoint {
    double p = 0.0;
    double t = 0.0;
    double w = 0.0;
};

[[nodiscard]] AdaptedPoint to_adapted(double p, double t, double w, const DerivedParams& d);
[[nodiscard]] AdaptedPoint to_adapted(double p, double t, double w, const GeneratorSpec& gen);
[[nodiscard]] PhysicalPoint from_adapted(const AdaptedPoint& a, const DerivedParams& d);
[[nodiscard]] PhysicalPoint from_adapted(const AdaptedPoint& a, const GeneratorSpec& gen);

/// Ordinary least-squares slope of y on x (used for log-log decay fits).
[[nodiscard]] double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace lattice_lab
