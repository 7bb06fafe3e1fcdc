#include "lattice_lab/config.hpp"

#include "lattice_lab/errors.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace lattice_lab {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& msg) {
    throw ValidationError("config: \"" + key + "\" " + msg);
}

// Typed access to one JSON object; keys that are never read are reported as
// unknown by finish().
class Block {
public:
    Block(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "must be an object");
    }

    [[nodiscard]] std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

    [[nodiscard]] bool has(const std::string& k) {
        seen_.insert(k);
        return j_.contains(k) && !j_.at(k).is_null();
    }

    [[nodiscard]] const json& at(const std::string& k) {
        if (!has(k)) fail(key(k), "is required");
        return j_.at(k);
    }

    [[nodiscard]] double number(const std::string& k) {
        const json& v = at(k);
        if (!v.is_number()) fail(key(k), "must be a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) fail(key(k), "must be finite");
        return x;
    }
    [[nodiscard]] double number(const std::string& k, double fallback) { return has(k) ? number(k) : fallback; }

    [[nodiscard]] std::uint64_t integer(const std::string& k) {
        const json& v = at(k);
        const bool ok = v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
        if (!ok) fail(key(k), "must be a non-negative integer");
        return v.get<std::uint64_t>();
    }
    [[nodiscard]] std::uint64_t integer(const std::string& k, std::uint64_t fallback) {
        return has(k) ? integer(k) : fallback;
    }

    [[nodiscard]] std::string string(const std::string& k, const std::string& fallback) {
        if (!has(k)) return fallback;
        const json& v = j_.at(k);
        if (!v.is_string()) fail(key(k), "must be a string");
        return v.get<std::string>();
    }

    [[nodiscard]] std::vector<double> numbers(const std::string& k) {
        const json& v = at(k);
        if (!v.is_array()) fail(key(k), "must be an array of numbers");
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number()) fail(key(k), "must be an array of numbers");
            out.push_back(x.get<double>());
            if (!std::isfinite(out.back())) fail(key(k), "entries must be finite");
        }
        return out;
    }

    void finish() const {
        for (const auto& [k, v] : j_.items()) {
            if (!seen_.count(k)) fail(key(k), "is not a recognized key");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

double positive(Block& b, const std::string& k, double fallback) {
    const double x = b.number(k, fallback);
    if (!(x > 0.0)) fail(b.key(k), "must be positive");
    return x;
}

LatticeParams parse_params(const json& j, const std::string& path) {
    Block b(j, path);
    const double alpha = b.number("alpha");
    const double gamma0 = b.number("gamma0");
    const double gamma1 = b.number("gamma1");
    const double p_c = b.number("p_c");
    b.finish();
    return LatticeParams(alpha, gamma0, gamma1, p_c);
}

ParamsEntry parse_params_entry(const json& j, const std::string& path) {
    Block b(j, path);
    ParamsEntry e;
    e.alpha = b.number("alpha");
    e.gamma0 = b.number("gamma0");
    e.gamma1 = b.number("gamma1");
    e.p_c = b.number("p_c");
    b.finish();
    return e;
}

GridSpec parse_grid(const json& j, const std::string& path) {
    Block b(j, path);
    GridSpec g;
    if (b.has("p_max")) {
        g.p_max = b.number("p_max");
        if (!(*g.p_max > 0.0)) fail(b.key("p_max"), "must be positive");
    }
    g.n = b.integer("n", g.n);
    if (g.n < 4 || g.n % 2 != 0) fail(b.key("n"), "must be an even integer >= 4");
    b.finish();
    return g;
}

SchemeConfig parse_scheme(const json& j, const std::string& path) {
    Block b(j, path);
    SchemeConfig s;
    s.method = parse_method(b.string("method", std::string(to_string(s.method))));
    s.dt = positive(b, "dt", s.dt);
    s.theta = b.number("theta", s.theta);
    if (s.theta < 0.0 || s.theta > 1.0) fail(b.key("theta"), "must lie in [0, 1]");
    const std::string boundary = b.string("boundary", "no_flux");
    if (boundary != "no_flux") fail(b.key("boundary"), "must be \"no_flux\"");
    b.finish();
    return s;
}

Observer parse_observer(const std::string& name, const std::string& key) {
    if (name == "mass") return Observer::Mass;
    if (name == "m2") return Observer::SecondMoment;
    if (name == "l1_to_w0") return Observer::L1ToStationary;
    if (name == "stat_residual") return Observer::StationarityResidual;
    fail(key, "has unknown observer \"" + name + "\" (mass, m2, l1_to_w0, stat_residual)");
}

EvolveOptions parse_evolve_options(Block& b) {
    EvolveOptions o;
    o.t_end = positive(b, "t_end", o.t_end);
    o.sample_every = b.integer("sample_every", o.sample_every);
    if (o.sample_every == 0) fail(b.key("sample_every"), "must be >= 1");
    o.max_steps = b.integer("max_steps", o.max_steps);
    o.max_wall_seconds = positive(b, "max_wall_seconds", o.max_wall_seconds);
    if (b.has("observers")) {
        const json& arr = b.at("observers");
        if (!arr.is_array()) fail(b.key("observers"), "must be an array of strings");
        o.observers.clear();
        for (const auto& x : arr) {
            if (!x.is_string()) fail(b.key("observers"), "must be an array of strings");
            o.observers.push_back(parse_observer(x.get<std::string>(), b.key("observers")));
        }
    }
    return o;
}

EvolveSpec parse_evolve(const json& j, const std::string& path) {
    Block b(j, path);
    EvolveSpec e;
    e.options = parse_evolve_options(b);
    if (b.has("initial")) {
        Block ib(b.at("initial"), b.key("initial"));
        const std::string kind = ib.string("kind", "gaussian");
        if (kind == "gaussian") {
            e.initial = InitialKind::Gaussian;
            e.gaussian_width = positive(ib, "width", e.gaussian_width);
        } else if (kind == "stationary") {
            e.initial = InitialKind::Stationary;
        } else {
            fail(ib.key("kind"), "must be \"gaussian\" or \"stationary\"");
        }
        ib.finish();
    }
    b.finish();
    return e;
}

FlowSpec parse_flow(const json& j, const std::string& path) {
    Block b(j, path);
    FlowSpec f;
    if (b.has("p0")) {
        f.p0 = b.numbers("p0");
        if (f.p0.empty()) fail(b.key("p0"), "must not be empty");
    }
    if (b.has("w0")) {
        f.w0 = b.number("w0");
        if (!(*f.w0 > 0.0)) fail(b.key("w0"), "must be positive");
    }
    f.s_max = b.number("s_max", f.s_max);
    f.samples = b.integer("samples", f.samples);
    if (f.samples < 2) fail(b.key("samples"), "must be >= 2");
    f.t0 = positive(b, "t0", f.t0);
    f.sigma = b.number("sigma", f.sigma);
    b.finish();
    return f;
}

ScanOptions parse_scan_options(Block& b) {
    ScanOptions o;
    o.p_min = positive(b, "p_min", o.p_min);
    o.p_max = positive(b, "p_max", o.p_max);
    if (!(o.p_max > o.p_min)) fail(b.key("p_max"), "must exceed p_min");
    const std::uint64_t ppd = b.integer("points_per_decade", static_cast<std::uint64_t>(o.points_per_decade));
    if (ppd < 1 || ppd > 1000) fail(b.key("points_per_decade"), "must lie in [1, 1000]");
    o.points_per_decade = static_cast<int>(ppd);
    o.t = positive(b, "t", o.t);
    return o;
}

ScanSpec parse_scan(const json& j, const std::string& path) {
    Block b(j, path);
    ScanSpec s;
    if (b.has("sigmas")) {
        s.sigmas = b.numbers("sigmas");
        if (s.sigmas.empty()) fail(b.key("sigmas"), "must not be empty");
    }
    s.options = parse_scan_options(b);
    const std::string profile = b.string("profile", "stationary");
    if (profile == "stationary") {
        s.profile = ScanProfileKind::Stationary;
    } else if (profile == "power_law") {
        s.profile = ScanProfileKind::PowerLaw;
    } else {
        fail(b.key("profile"), "must be \"stationary\" or \"power_law\"");
    }
    s.power_c = positive(b, "power_c", s.power_c);
    if (b.has("power_k")) {
        s.power_k = b.number("power_k");
        if (!(*s.power_k > 0.0)) fail(b.key("power_k"), "must be positive");
    }
    b.finish();
    return s;
}

ResidualsSpec parse_residuals(const json& j, const std::string& path) {
    Block b(j, path);
    ResidualsSpec r;
    r.sigma = b.number("sigma", r.sigma);
    if (b.has("p")) r.p = b.numbers("p");
    r.random_points = b.integer("random_points", r.random_points);
    r.p_min = positive(b, "p_min", r.p_min);
    r.p_max = positive(b, "p_max", r.p_max);
    if (!(r.p_max > r.p_min)) fail(b.key("p_max"), "must exceed p_min");
    r.t = positive(b, "t", r.t);
    if (r.p.empty() && r.random_points == 0) fail(b.key("p"), "is empty and random_points is 0");
    b.finish();
    return r;
}

SweepConfig parse_sweep_at(const json& j, const std::string& path) {
    Block b(j, path);
    SweepConfig s;
    const json& grid = b.at("params_grid");
    if (!grid.is_array()) fail(b.key("params_grid"), "must be an array of params objects");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        s.params_grid.push_back(parse_params_entry(grid[i], b.key("params_grid") + "[" + std::to_string(i) + "]"));
    }
    if (b.has("sigmas")) s.sigmas = b.numbers("sigmas");
    if (b.has("grid")) {
        const GridSpec g = parse_grid(b.at("grid"), b.key("grid"));
        if (!g.p_max) fail(b.key("grid.p_max"), "is required in a sweep");
        s.grid = Grid(*g.p_max, g.n);
    }
    if (b.has("evolve")) {
        Block eb(b.at("evolve"), b.key("evolve"));
        SweepEvolveSpec e;
        e.options = parse_evolve_options(eb);
        e.gaussian_width = positive(eb, "gaussian_width", e.gaussian_width);
        if (eb.has("scheme")) e.scheme = parse_scheme(eb.at("scheme"), eb.key("scheme"));
        eb.finish();
        if (!s.grid) fail(b.key("evolve"), "requires a sweep grid");
        s.evolve = e;
    }
    if (b.has("scan")) {
        Block sb(b.at("scan"), b.key("scan"));
        s.scan = parse_scan_options(sb);
        sb.finish();
    }
    b.finish();
    return s;
}

}  // namespace

SweepConfig parse_sweep(const json& j) { return parse_sweep_at(j, "sweep"); }

RunConfig validate_config(const json& raw) {
    Block b(raw, "");
    RunConfig cfg;
    if (b.has("params")) {
        cfg.params = parse_params(b.at("params"), "params");
        // Rejects q >= 3 with the physical-range diagnostic.
        (void)derive_params(*cfg.params);
    }
    if (b.has("grid")) cfg.grid = parse_grid(b.at("grid"), "grid");
    if (b.has("scheme")) cfg.scheme = parse_scheme(b.at("scheme"), "scheme");
    if (b.has("evolve")) cfg.evolve = parse_evolve(b.at("evolve"), "evolve");
    if (b.has("flow")) cfg.flow = parse_flow(b.at("flow"), "flow");
    if (b.has("scan")) cfg.scan = parse_scan(b.at("scan"), "scan");
    if (b.has("residuals")) cfg.residuals = parse_residuals(b.at("residuals"), "residuals");
    if (b.has("sweep")) cfg.sweep = parse_sweep(b.at("sweep"));
    cfg.output_dir = b.string("output_dir", cfg.output_dir);
    if (cfg.output_dir.empty()) fail("output_dir", "must not be empty");
    cfg.seed = b.integer("seed", cfg.seed);
    if (!cfg.params && !cfg.sweep) fail("params", "is required");
    b.finish();
    cfg.raw = raw;
    return cfg;
}

RunConfig validate_config(std::string_view text) {
    json raw;
    try {
        raw = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config: malformed JSON: ") + e.what());
    }
    return validate_config(raw);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return validate_config(std::string_view(ss.str()));
}

Grid resolve_grid(const GridSpec& spec, const DerivedParams& d) {
    return Grid(spec.p_max ? *spec.p_max : default_p_max(d), spec.n);
}

json to_json(const LatticeParams& p) {
    return {{"alpha", p.alpha()}, {"gamma0", p.gamma0()}, {"gamma1", p.gamma1()}, {"p_c", p.p_c()}};
}

json to_json(const DerivedParams& d) {
    return {{"beta", d.beta()}, {"q", d.q()},   {"delta", d.delta()}, {"mu", d.mu()},
            {"nu", d.nu()},     {"Z", d.Z()},   {"k", d.k()},         {"regime", std::string(to_string(d.regime()))}};
}

}  // namespace lattice_lab
