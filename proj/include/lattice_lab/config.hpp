#pragma once

#include "lattice_lab/analysis.hpp"
#include "lattice_lab/fpe_solver.hpp"
#include "lattice_lab/model.hpp"
#include "lattice_lab/symmetry.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lattice_lab {

/// "grid": {"p_max": number | omitted, "n": even integer}. A missing p_max
/// is resolved to default_p_max of the run's parameters.
struct GridSpec {
    std::optional<double> p_max;
    std::size_t n = 2000;
};

enum class InitialKind { Gaussian, Stationary };

struct EvolveSpec {
    EvolveOptions options;
    InitialKind initial = InitialKind::Gaussian;
    double gaussian_width = 1.0;
};

/// "flow": orbits of the stationary-graph point (p0, w0(p0)) unless w0 is
/// given, sampled on an evenly spaced s-ladder.
struct FlowSpec {
    std::vector<double> p0 = {0.5, 1.0, 2.0, 5.0};
    std::optional<double> w0;
    double s_max = 2.0;
    std::size_t samples = 21;
    double t0 = 1.0;
    double sigma = -2.0;
};

enum class ScanProfileKind { Stationary, PowerLaw };

struct ScanSpec {
    std::vector<double> sigmas = {-2.0};
    ScanOptions options;
    ScanProfileKind profile = ScanProfileKind::Stationary;
    /// Power-law profile C p^(-2k); k defaults to 1/delta.
    double power_c = 1.0;
    std::optional<double> power_k;
};

/// "residuals": extract_A vs closed_A on the stationary graph.
struct ResidualsSpec {
    double sigma = -2.0;
    std::vector<double> p = {0.1, 0.5, 1.0, 2.0, 10.0, 100.0};
    /// Extra log-uniform p samples in [p_min, p_max] drawn with the run seed.
    std::size_t random_points = 0;
    double p_min = 1e-2;
    double p_max = 1e4;
    double t = 1.0;
};

struct RunConfig {
    /// Required by every command except sweep, whose points carry their own.
    std::optional<LatticeParams> params;
    GridSpec grid;
    SchemeConfig scheme;
    EvolveSpec evolve;
    FlowSpec flow;
    ScanSpec scan;
    ResidualsSpec residuals;
    std::optional<SweepConfig> sweep;
    std::string output_dir = "runs";
    std::uint64_t seed = 0;
    /// The validated document, echoed into run metadata and hashed for the
    /// run directory name.
    nlohmann::json raw;
};

/// Parses and fully validates a config document. Unknown keys, wrong types
/// and out-of-range values raise ValidationError naming the key.
[[nodiscard]] RunConfig validate_config(const nlohmann::json& raw);
[[nodiscard]] RunConfig validate_config(std::string_view text);
[[nodiscard]] RunConfig load_config(const std::string& path);

/// The sweep block alone ({"params_grid", "sigmas", "grid", "evolve"}).
[[nodiscard]] SweepConfig parse_sweep(const nlohmann::json& j);

[[nodiscard]] Grid resolve_grid(const GridSpec& spec, const DerivedParams& d);

[[nodiscard]] nlohmann::json to_json(const LatticeParams& p);
[[nodiscard]] nlohmann::json to_json(const DerivedParams& d);

}  // namespace lattice_lab
