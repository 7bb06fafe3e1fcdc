#include "lattice_lab/runner.hpp"

#include "lattice_lab/errors.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>

#ifndef LATTICE_LAB_VERSION
#define LATTICE_LAB_VERSION "0.0.0"
#endif

namespace lattice_lab {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", x);
    return buf.data();
}

// JSON numbers must be finite; non-finite values become null.
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

class Csv {
public:
    Csv(const fs::path& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw NumericalError("cannot write " + path.string());
        write_row(header);
    }

    void row(const std::vector<double>& values) {
        std::vector<std::string> cells;
        cells.reserve(values.size());
        for (double v : values) cells.push_back(format_double(v));
        write_row(cells);
    }

private:
    void write_row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    std::ofstream out_;
};

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw NumericalError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::array<char, 32> buf{};
    std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf.data();
}

const LatticeParams& require_params(const RunConfig& cfg, Command c) {
    if (!cfg.params) throw ValidationError("config: \"params\" is required for command " + std::string(to_string(c)));
    return *cfg.params;
}

double rel_dev(double x, double ref) {
    const double d = std::abs(x - ref);
    return ref != 0.0 ? d / std::abs(ref) : d;
}

json tail_json(const TailFit& t) {
    return {{"k_hat", num(t.k_hat)},         {"slope", num(t.slope)}, {"window", {t.window_lo, t.window_hi}},
            {"r2", num(t.r2)},               {"class", std::string(to_string(t.tail_class))}};
}

json variation_json(const VariationReport& v) {
    json j = {{"i_phi", num(v.i_phi)},
              {"i_scale", num(v.i_scale)},
              {"i_flux", num(v.i_flux)},
              {"total", num(v.total)},
              {"finite", {{"phi", v.finite_phi}, {"scale", v.finite_scale}, {"flux", v.finite_flux}}},
              {"non_normalizable_variation", v.non_normalizable_variation}};
    j["tail"] = v.tail ? tail_json(*v.tail) : json(nullptr);
    return j;
}

json decay_json(const DecayReport& r) {
    return {{"sigma", r.sigma},
            {"profile", r.profile},
            {"slope_A0", num(r.slope_a0)},
            {"slope_A1", num(r.slope_a1)},
            {"slope_A2", num(r.slope_a2)},
            {"slope_quadratic", num(r.slope_quadratic)},
            {"A2_at_pmax", num(r.a2_at_pmax)},
            {"A2_plateau_expected", num(r.a2_plateau_expected)},
            {"A2_vanishes", r.a2_vanishes},
            {"all_decay", r.all_decay}};
}

void write_decay_csv(const fs::path& path, const DecayReport& r) {
    Csv csv(path, {"p", "abs_A0", "abs_A1", "abs_A2"});
    for (const auto& row : r.rows) csv.row({row.p, row.abs_a0, row.abs_a1, row.abs_a2});
}

void write_trajectory_csv(const fs::path& path, const EvolveResult& r) {
    Csv csv(path, {"t", "mass", "m2", "l1_to_w0", "stat_residual"});
    for (const auto& rec : r.records) csv.row({rec.t, rec.mass, rec.m2, rec.l1_to_w0, rec.stat_residual});
}

void write_field_csv(const fs::path& path, const Field& f) {
    Csv csv(path, {"p", "w"});
    const auto c = f.grid.centers();
    for (std::size_t i = 0; i < c.size(); ++i) csv.row({c[i], f.values[i]});
}

json evolve_json(const EvolveResult& r) {
    std::array<int, 3> orders{0, 1, 2};
    const MomentsResult m = moments(r.final_state, orders);
    json mom = json::array();
    for (std::size_t i = 0; i < orders.size(); ++i) {
        mom.push_back({{"order", orders[i]}, {"value", num(m.values[i])}, {"divergence_warning", m.divergence_warning[i]}});
    }
    return {{"steps", r.steps},
            {"dt_used", r.dt_used},
            {"t_final", r.final_state.t},
            {"max_edge_mass_fraction", num(r.max_edge_mass_fraction)},
            {"truncation_time_estimate", num(r.truncation_time_estimate)},
            {"final_moments", mom}};
}

struct Context {
    const RunConfig& cfg;
    const RunOptions& opts;
    fs::path dir;
    std::ostream& out;
    std::vector<std::string> files;
    json summary;

    fs::path file(const std::string& name) {
        files.push_back(name);
        return dir / name;
    }
};

void cmd_params(Context& ctx) {
    const LatticeParams& params = require_params(ctx.cfg, Command::Params);
    const DerivedParams d = derive_params(params);
    json j = {{"params", to_json(params)}, {"derived", to_json(d)}};
    if (d.q() < 5.0 / 3.0) j["stationary_second_moment"] = stationary_second_moment(d);
    write_json(ctx.file("params.json"), j);
    ctx.out << j.dump(2) << '\n';
    ctx.summary = j;
}

void cmd_stationary(Context& ctx) {
    const LatticeParams& params = require_params(ctx.cfg, Command::Stationary);
    const DerivedParams d = derive_params(params);
    const Grid grid = resolve_grid(ctx.cfg.grid, d);
    Field w0{grid, 0.0, {}};
    for (double p : grid.centers()) w0.values.push_back(tsallis_density(p, d));
    write_field_csv(ctx.file("stationary.csv"), w0);

    json j = {{"derived", to_json(d)},
              {"p_max", grid.p_max()},
              {"n", grid.size()},
              {"discrete_mass", w0.mass()},
              {"tail_mass_beyond_p_max", stationary_tail_mass(d, grid.p_max())}};
    if (d.q() < 5.0 / 3.0) j["second_moment_exact"] = stationary_second_moment(d);
    const std::array<int, 1> second{2};
    const MomentsResult m = moments(w0, second);
    j["second_moment_grid"] = num(m.values[0]);
    j["second_moment_divergence_warning"] = m.divergence_warning[0];
    const InvarianceResidual inv = invariance_residual(w0, d);
    j["invariance_residual"] = {{"sup_norm", inv.sup_norm}, {"p_at_max", grid.centers()[inv.argmax]}};
    j["variation"] = variation_json(variation_integrals(w0, params, d));
    write_json(ctx.file("stationary.json"), j);
    ctx.summary = j;
}

void cmd_evolve(Context& ctx) {
    const LatticeParams& params = require_params(ctx.cfg, Command::Evolve);
    const DerivedParams d = derive_params(params);
    const Grid grid = resolve_grid(ctx.cfg.grid, d);
    const EvolveSpec& spec = ctx.cfg.evolve;
    const Field start = spec.initial == InitialKind::Stationary ? init_state(grid, TsallisProfile{d})
                                                                 : init_state(grid, GaussianProfile{spec.gaussian_width});
    const EvolveResult r = evolve(start, params, ctx.cfg.scheme, spec.options);
    write_trajectory_csv(ctx.file("trajectory.csv"), r);
    write_field_csv(ctx.file("final_field.csv"), r.final_state);
    json j = evolve_json(r);
    j["derived"] = to_json(d);
    j["grid"] = {{"p_max", grid.p_max()}, {"n", grid.size()}};
    j["scheme"] = {{"method", std::string(to_string(ctx.cfg.scheme.method))},
                   {"dt", ctx.cfg.scheme.dt},
                   {"theta", ctx.cfg.scheme.theta},
                   {"boundary", "no_flux"}};
    j["regime"] = std::string(to_string(d.regime()));
    write_json(ctx.file("evolve.json"), j);
    ctx.summary = j;
}

void cmd_flow(Context& ctx) {
    const LatticeParams& params = require_params(ctx.cfg, Command::Flow);
    const DerivedParams d = derive_params(params);
    const FlowSpec& spec = ctx.cfg.flow;
    const GeneratorSpec gen = GeneratorSpec::canonical(d, spec.sigma);

    Csv csv(ctx.file("flow.csv"), {"orbit", "p0", "s", "p", "t", "w", "w_stationary", "y", "v"});
    json orbits = json::array();
    for (std::size_t k = 0; k < spec.p0.size(); ++k) {
        const double p0 = spec.p0[k];
        const double w0 = spec.w0 ? *spec.w0 : tsallis_density(p0, d);
        const auto blow = flow_blowup_parameter(p0, w0, gen);
        double max_graph_dev = 0.0;
        std::size_t emitted = 0;
        for (std::size_t i = 0; i < spec.samples; ++i) {
            const double s = spec.s_max * static_cast<double>(i) / static_cast<double>(spec.samples - 1);
            if (blow && s >= *blow) break;
            const FlowPoint fp = flow_map(p0, w0, s, gen);
            const double t = flow_time(spec.t0, s, gen);
            const double ws = tsallis_density(fp.p, d);
            const AdaptedPoint a = to_adapted(fp.p, t, fp.w, gen);
            csv.row({static_cast<double>(k), p0, s, fp.p, t, fp.w, ws, a.y, a.v});
            max_graph_dev = std::max(max_graph_dev, rel_dev(fp.w, ws));
            ++emitted;
        }
        json o = {{"orbit", k}, {"p0", p0}, {"w0", w0}, {"samples", emitted}};
        o["blowup_s"] = blow ? json(*blow) : json(nullptr);
        o["max_rel_deviation_from_stationary_graph"] = max_graph_dev;
        orbits.push_back(o);
    }
    json j = {{"sigma", spec.sigma}, {"nu", d.nu()}, {"delta", d.delta()}, {"orbits", orbits}};
    write_json(ctx.file("flow.json"), j);
    ctx.summary = j;
}

void cmd_residuals(Context& ctx) {
    const LatticeParams& params = require_params(ctx.cfg, Command::Residuals);
    const DerivedParams d = derive_params(params);
    const ResidualsSpec& spec = ctx.cfg.residuals;
    const GeneratorSpec gen = GeneratorSpec::canonical(d, spec.sigma);
    const bool full = spec.sigma == -2.0;

    std::vector<double> ps = spec.p;
    std::mt19937_64 rng(ctx.cfg.seed);
    std::uniform_real_distribution<double> u(std::log(spec.p_min), std::log(spec.p_max));
    for (std::size_t i = 0; i < spec.random_points; ++i) ps.push_back(std::exp(u(rng)));

    Csv csv(ctx.file("residuals.csv"),
            {"p", "w", "A0_extracted", "A0_closed", "A0_rel", "A1_extracted", "A1_closed", "A1_rel", "A1_as_printed",
             "A2_extracted", "A2_closed", "A2_rel", "A11"});
    double max0 = 0.0;
    double max1 = 0.0;
    double max2 = 0.0;
    double max1_printed = 0.0;
    for (double p : ps) {
        const double w = tsallis_density(p, d);
        const ResidualCoeffs ex = extract_A(p, spec.t, w, params, gen);
        const double a2c = closed_A2(p, params, spec.sigma);
        double a0c = kNaN;
        double a1c = kNaN;
        double a1p = kNaN;
        if (full) {
            const ResidualCoeffs c = closed_A(p, w, params, gen);
            a0c = c.a0;
            a1c = c.a1;
            a1p = closed_A(p, w, params, gen, ClosedFormVariant::AsPrinted).a1;
            max0 = std::max(max0, rel_dev(ex.a0, a0c));
            max1 = std::max(max1, rel_dev(ex.a1, a1c));
            max1_printed = std::max(max1_printed, rel_dev(ex.a1, a1p));
        }
        const double r2 = rel_dev(ex.a2, a2c);
        max2 = std::max(max2, r2);
        csv.row({p, w, ex.a0, a0c, full ? rel_dev(ex.a0, a0c) : kNaN, ex.a1, a1c, full ? rel_dev(ex.a1, a1c) : kNaN,
                 a1p, ex.a2, a2c, r2, ex.a11});
    }
    json j = {{"sigma", spec.sigma}, {"points", ps.size()}, {"max_rel_A2", max2}};
    if (full) {
        j["max_rel_A0"] = max0;
        j["max_rel_A1"] = max1;
        j["max_rel_A1_as_printed"] = max1_printed;
    } else {
        j["note"] = "closed-form A0 and A1 exist only for sigma = -2";
    }
    write_json(ctx.file("residuals.json"), j);
    ctx.summary = j;
}

void cmd_scan(Context& ctx) {
    const LatticeParams& params = require_params(ctx.cfg, Command::Scan);
    const DerivedParams d = derive_params(params);
    const ScanSpec& spec = ctx.cfg.scan;
    const Profile profile = spec.profile == ScanProfileKind::Stationary
                                ? Profile::tsallis(d)
                                : Profile::power_law(spec.power_c, spec.power_k.value_or(d.k()));
    json reports = json::array();
    for (std::size_t i = 0; i < spec.sigmas.size(); ++i) {
        const DecayReport r = asymptotic_scan(params, GeneratorSpec::canonical(d, spec.sigmas[i]), profile, spec.options);
        const std::string name = "scan_" + std::to_string(i) + ".csv";
        write_decay_csv(ctx.file(name), r);
        json rj = decay_json(r);
        rj["csv"] = name;
        reports.push_back(rj);
    }
    json j = {{"reports", reports}};
    write_json(ctx.file("scan.json"), j);
    ctx.summary = j;
}

void cmd_sweep(Context& ctx) {
    if (!ctx.cfg.sweep) throw ValidationError("config: \"sweep\" is required for command sweep");
    SweepConfig sc = *ctx.cfg.sweep;
    sc.threads = ctx.opts.threads;
    const SweepReport report = sweep(sc);

    json points = json::array();
    for (std::size_t i = 0; i < report.params.size(); ++i) {
        const auto& r = report.params[i];
        json p = {{"index", i},
                  {"params",
                   {{"alpha", r.entry.alpha}, {"gamma0", r.entry.gamma0}, {"gamma1", r.entry.gamma1}, {"p_c", r.entry.p_c}}},
                  {"ok", r.ok}};
        if (!r.ok) p["error"] = r.error;
        if (r.derived) {
            p["derived"] = to_json(*r.derived);
        }
        if (r.decision) {
            p["normalization_ok"] = r.decision->normalization_ok;
            p["variation_ok"] = r.decision->variation_ok;
        }
        if (r.variation) p["variation"] = variation_json(*r.variation);
        if (r.evolution) {
            const std::string name = "trajectory_" + std::to_string(i) + ".csv";
            write_trajectory_csv(ctx.file(name), *r.evolution);
            p["evolve"] = evolve_json(*r.evolution);
            p["evolve"]["csv"] = name;
        }
        points.push_back(p);
    }
    json scans = json::array();
    const std::size_t n_sigmas = sc.sigmas.size();
    for (std::size_t k = 0; k < report.scans.size(); ++k) {
        const auto& s = report.scans[k];
        json sj = {{"params_index", s.params_index}, {"sigma", s.sigma}, {"ok", s.ok}};
        if (!s.ok) sj["error"] = s.error;
        if (s.decay) {
            const std::string name =
                "scan_" + std::to_string(s.params_index) + "_" + std::to_string(k % n_sigmas) + ".csv";
            write_decay_csv(ctx.file(name), *s.decay);
            sj["report"] = decay_json(*s.decay);
            sj["csv"] = name;
        }
        scans.push_back(sj);
    }
    json j = {{"points", points}, {"scans", scans}};
    write_json(ctx.file("report.json"), j);
    ctx.summary = {{"points", points.size()}, {"scans", scans.size()}};
}

}  // namespace

std::string_view to_string(Command c) noexcept {
    switch (c) {
        case Command::Params: return "params";
        case Command::Stationary: return "stationary";
        case Command::Evolve: return "evolve";
        case Command::Flow: return "flow";
        case Command::Residuals: return "residuals";
        case Command::Scan: return "scan";
        case Command::Sweep: return "sweep";
    }
    return "params";
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = {"params", "stationary", "evolve", "flow",
                                                   "residuals", "scan", "sweep"};
    return names;
}

Command parse_command(std::string_view name) {
    for (Command c : {Command::Params, Command::Stationary, Command::Evolve, Command::Flow, Command::Residuals,
                      Command::Scan, Command::Sweep}) {
        if (to_string(c) == name) return c;
    }
    throw ValidationError("unknown command \"" + std::string(name) + "\"");
}

std::string config_hash(Command command, const json& raw) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const std::string text = std::string(to_string(command)) + '\n' + raw.dump();
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::array<char, 17> buf{};
    std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(h));
    return buf.data();
}

RunResult run(Command command, const RunConfig& config, const RunOptions& options, std::ostream& out,
              std::ostream& err) {
    const fs::path base = options.out_dir ? *options.out_dir : fs::path(config.output_dir);
    const fs::path dir = base / (std::string(to_string(command)) + "-" + config_hash(command, config.raw));
    RunResult result{0, dir};

    Context ctx{config, options, dir, out, {}, json::object()};
    const auto start = std::chrono::steady_clock::now();
    std::string error;
    try {
        fs::create_directories(dir);
        switch (command) {
            case Command::Params: cmd_params(ctx); break;
            case Command::Stationary: cmd_stationary(ctx); break;
            case Command::Evolve: cmd_evolve(ctx); break;
            case Command::Flow: cmd_flow(ctx); break;
            case Command::Residuals: cmd_residuals(ctx); break;
            case Command::Scan: cmd_scan(ctx); break;
            case Command::Sweep: cmd_sweep(ctx); break;
        }
    } catch (const ValidationError& e) {
        result.exit_code = 1;
        error = e.what();
    } catch (const NumericalError& e) {
        result.exit_code = 2;
        error = e.what();
        if (e.cell()) error += " (cell " + std::to_string(*e.cell()) + ")";
    } catch (const fs::filesystem_error& e) {
        result.exit_code = 2;
        error = e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!error.empty()) err << "lattice-lab " << to_string(command) << ": " << error << '\n';

    json meta = {{"command", std::string(to_string(command))},
                 {"version", LATTICE_LAB_VERSION},
                 {"config", config.raw},
                 {"config_hash", config_hash(command, config.raw)},
                 {"threads", options.threads},
                 {"timings", {{"total_seconds", seconds}}},
                 {"timestamp", utc_timestamp()},
                 {"exit_code", result.exit_code},
                 {"files", ctx.files}};
    if (!error.empty()) meta["error"] = error;
    if (!ctx.summary.empty()) meta["summary"] = ctx.summary;
    std::error_code ec;
    if (fs::is_directory(dir, ec)) {
        try {
            write_json(dir / "metadata.json", meta);
        } catch (const NumericalError& e) {
            err << "lattice-lab: " << e.what() << '\n';
            if (result.exit_code == 0) result.exit_code = 2;
        }
    }
    return result;
}

}  // namespace lattice_lab
