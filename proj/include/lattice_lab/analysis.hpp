#pragma once

#include "lattice_lab/fpe_solver.hpp"
#include "lattice_lab/grid.hpp"
#include "lattice_lab/model.hpp"
#include "lattice_lab/symmetry.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lattice_lab {

enum class TailClass { PowerLaw, SuperPolynomial, NonDecaying, Indeterminate };

[[nodiscard]] std::string_view to_string(TailClass c) noexcept;

/// Log-log fit of the outer tail, w ~ p^(-2 k_hat).
struct TailFit {
    double k_hat = 0.0;
    double slope = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;
    double r2 = 0.0;
    TailClass tail_class = TailClass::Indeterminate;
};

/// Fits the outermost decade of the field's positive half (averaged with its
/// mirror image) where w stays above 1e-300. Needs one full decade of
/// samples; throws ValidationError otherwise.
[[nodiscard]] TailFit tail_exponent(const Field& state);

struct NormalizabilityDecision {
    bool normalization_ok = false;  ///< k > 1/2
    bool variation_ok = false;      ///< k q > 3/2
};

[[nodiscard]] NormalizabilityDecision normalizable_variation(double k, double q);

/// Integrals of the three pieces of the normalization variation under the
/// sigma = -2 generator:
///   i_phi   = I[nu p^2 w^q]
///   i_scale = I[p w_p]
///   i_flux  = I[d/dp (h w - g w_p)]   (boundary flux after integrating by parts)
///   total   = i_phi + i_scale - 2 t i_flux
/// where I is the integral over the momentum line.
struct VariationReport {
    double i_phi = 0.0;
    double i_scale = 0.0;
    double i_flux = 0.0;
    double total = 0.0;
    bool finite_phi = true;
    bool finite_scale = true;
    bool finite_flux = true;
    /// The tail fit is a power law with k q <= 3/2.
    bool non_normalizable_variation = false;
    std::optional<TailFit> tail;
};

[[nodiscard]] VariationReport variation_integrals(const Field& state, const LatticeParams& params,
                                                  const DerivedParams& d);

/// Raw parameter tuple of a sweep point; validated per point so one bad
/// entry does not sink the sweep.
struct ParamsEntry {
    double alpha = 1.0;
    double gamma0 = 0.1;
    double gamma1 = 0.5;
    double p_c = 1.0;
};

struct SweepEvolveSpec {
    SchemeConfig scheme;
    EvolveOptions options;
    double gaussian_width = 1.0;
};

struct SweepConfig {
    std::vector<ParamsEntry> params_grid;
    std::vector<double> sigmas;
    std::optional<Grid> grid;
    std::optional<SweepEvolveSpec> evolve;
    ScanOptions scan;
    unsigned threads = 1;
};

struct SweepParamsResult {
    ParamsEntry entry;
    bool ok = false;
    std::string error;
    std::optional<DerivedParams> derived;
    std::optional<NormalizabilityDecision> decision;
    std::optional<VariationReport> variation;
    std::optional<EvolveResult> evolution;
};

struct SweepScanResult {
    std::size_t params_index = 0;
    double sigma = 0.0;
    bool ok = false;
    std::string error;
    std::optional<DecayReport> decay;
};

struct SweepReport {
    std::vector<SweepParamsResult> params;
    std::vector<SweepScanResult> scans;
};

/// Runs every point of the sweep, in parallel when threads > 1. Output order
/// follows the config, independent of scheduling.
[[nodiscard]] SweepReport sweep(const SweepConfig& config);

}  // namespace lattice_lab
