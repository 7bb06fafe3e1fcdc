// Acceptance criteria. Usage: acceptance <1..10 | all>. Prints one
// PASS/FAIL line per criterion; exit status is nonzero if any fails.
#include "lattice_lab/analysis.hpp"
#include "lattice_lab/fpe_solver.hpp"
#include "lattice_lab/model.hpp"
#include "lattice_lab/symmetry.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace lattice_lab;

namespace {

const LatticeParams kRef(1.0, 0.1, 0.5, 1.0);

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        pass = pass && ok;
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [FAIL]");
    }
};

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> w0_samples(const Grid& g, const DerivedParams& d) {
    std::vector<double> v;
    for (double p : g.centers()) v.push_back(tsallis_density(p, d));
    return v;
}

// Parameters with delta drawn directly so that q = 1 + delta < 3.
LatticeParams random_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double alpha = 0.3 + 2.0 * u01(rng);
    const double p_c = 0.3 + 2.0 * u01(rng);
    const double delta = 0.05 + 1.85 * u01(rng);
    return {alpha, delta * alpha * p_c * p_c / 2.0, 2.0 * u01(rng), p_c};
}

Outcome c1_stationarity() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const DerivedParams d = derive_params(kRef);
    const Grid g(50.0, 2000);
    const Field start = init_state(g, TsallisProfile{d});
    EvolveOptions opts;
    opts.t_end = 100.0;
    opts.sample_every = 1000;
    const EvolveResult still = evolve(start, kRef, SchemeConfig{}, opts);
    const double drift = l1_distance(still.final_state, start.values);
    o.require(drift < 1e-6, fmt("L1 drift from w0 over t=100: %.3e (< 1e-6)", drift));

    opts.t_end = 200.0;
    const EvolveResult relax = evolve(init_state(g, GaussianProfile{1.0}), kRef, SchemeConfig{}, opts);
    const double dist = l1_distance(relax.final_state, w0_samples(g, d));
    o.require(dist < 1e-3, fmt("Gaussian start, L1 to w0 at t=200: %.3e (< 1e-3)", dist));
    const double secs = seconds_since(t0);
    o.require(secs < 30.0, fmt("runtime %.2f s (< 30 s)", secs));
    return o;
}

Outcome c2_sigma_selection() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const DerivedParams d = derive_params(kRef);
    const double p = 1e6;
    const double w = tsallis_density(p, d);
    for (double sigma : {-3.0, -1.0, 0.0, 1.0}) {
        const double a2 = extract_A(p, 1.0, w, kRef, GeneratorSpec::canonical(d, sigma)).a2;
        const double expected = -kRef.gamma0() * (2.0 + sigma);
        o.require(std::abs(a2 - expected) < 1e-4, fmt("sigma=%g: A2(1e6)=%.6g vs %.6g", sigma, a2, expected));
    }
    const double a2 = extract_A(p, 1.0, w, kRef, GeneratorSpec::canonical(d, -2.0)).a2;
    o.require(std::abs(a2) < 1e-8, fmt("sigma=-2: |A2(1e6)|=%.3e (< 1e-8)", std::abs(a2)));
    const double secs = seconds_since(t0);
    o.require(secs < 1.0, fmt("runtime %.3f s (< 1 s)", secs));
    return o;
}

Outcome c3_closed_forms() {
    Outcome o;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double worst2 = 0.0;
    for (int i = 0; i < 100; ++i) {
        const LatticeParams params = random_params(rng);
        const DerivedParams d = derive_params(params);
        const double sigma = -4.0 + 5.0 * u01(rng);
        const double p = std::pow(10.0, -2.0 + 4.0 * u01(rng));
        const double ext = extract_A(p, 1.0, tsallis_density(p, d), params, GeneratorSpec::canonical(d, sigma)).a2;
        worst2 = std::max(worst2, rel(ext, closed_A2(p, params, sigma)));
    }
    o.require(worst2 < 1e-10, fmt("A2 max rel %.2e over 100 random (p, sigma, params) (< 1e-10)", worst2));

    double worst0 = 0.0;
    double worst1 = 0.0;
    double printed = 0.0;
    for (int i = 0; i < 100; ++i) {
        const LatticeParams params = random_params(rng);
        const DerivedParams d = derive_params(params);
        const GeneratorSpec gen = GeneratorSpec::canonical(d);
        const double p = std::pow(10.0, -2.0 + 4.0 * u01(rng));
        const double w = tsallis_density(p, d);
        const ResidualCoeffs ext = extract_A(p, 1.0, w, params, gen);
        const ResidualCoeffs c = closed_A(p, w, params, gen);
        worst0 = std::max(worst0, rel(ext.a0, c.a0));
        worst1 = std::max(worst1, rel(ext.a1, c.a1));
        printed = std::max(printed, rel(ext.a1, closed_A(p, w, params, gen, ClosedFormVariant::AsPrinted).a1));
    }
    o.require(worst1 < 1e-8, fmt("repaired A1 max rel %.2e (< 1e-8)", worst1));
    o.require(worst0 < 1e-8, fmt("repaired A0 max rel %.2e (< 1e-8)", worst0));
    o.detail += fmt("; erratum: A1 with (p_c^2 + w^2)^2 as printed deviates by up to %.2e relative", printed);
    return o;
}

Outcome c4_asymptotic_decay() {
    Outcome o;
    const DerivedParams d = derive_params(kRef);
    const DecayReport r = asymptotic_scan(kRef, GeneratorSpec::canonical(d), Profile::tsallis(d));
    const double k = d.k();
    // "<= target within 10%": slope <= 0.9 * target
    o.require(r.slope_a2 <= 0.9 * -2.0, fmt("A2 slope %.4f (<= -2 within 10%%)", r.slope_a2));
    o.require(r.slope_a1 <= 0.9 * -3.0, fmt("A1 slope %.4f (<= -3 within 10%%)", r.slope_a1));
    o.require(r.slope_a0 <= 0.9 * -(2.0 * k + 2.0), fmt("A0 slope %.4f (<= %.0f within 10%%)", r.slope_a0, -(2 * k + 2)));
    return o;
}

Outcome c5_flow() {
    Outcome o;
    const DerivedParams d = derive_params(kRef);
    const GeneratorSpec gen = GeneratorSpec::canonical(d);
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double graph = 0.0;
    double ode = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double p0 = -10.0 + 20.0 * u01(rng);
        const double s = -2.0 + 7.0 * u01(rng);
        const double w0 = tsallis_density(p0, d);
        const FlowPoint f = flow_map(p0, w0, s, gen);
        graph = std::max(graph, rel(f.w, tsallis_density(f.p, d)));
        const auto x = oracle::flow_ode(p0, w0, s, gen.nu, gen.delta);
        ode = std::max({ode, std::abs(f.p - x[0]) / std::max(std::abs(x[0]), 1e-300), rel(f.w, x[1])});
    }
    o.require(graph < 1e-10, fmt("stationary graph invariance max rel %.2e (< 1e-10)", graph));
    o.require(ode < 1e-9, fmt("closed form vs adaptive ODE max rel %.2e (< 1e-9)", ode));
    return o;
}

Outcome c6_prolongation() {
    Outcome o;
    std::mt19937_64 rng(66);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        oracle::JetSurface s;
        s.jet = {4.0 * u(rng), 0.2 + 2.0 * u01(rng), 0.1 + u01(rng), u(rng), u(rng), u(rng)};
        s.w_pt = u(rng);
        s.w_tt = u(rng);
        const GeneratorSpec gen{-3.0 + 4.0 * u01(rng), 0.2 + u01(rng), 0.1 + 1.4 * u01(rng)};
        const ProlongedCoeffs lib = prolong_coeffs(s.jet, gen);
        const ProlongedCoeffs fd = oracle::prolongation_fd(s, gen);
        for (auto [a, b] : {std::pair{lib.psi_p, fd.psi_p}, std::pair{lib.psi_pp, fd.psi_pp},
                            std::pair{lib.psi_t, fd.psi_t}}) {
            worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b)));
        }
    }
    o.require(worst < 1e-6, fmt("finite-difference oracle max rel %.2e at 100 random jets (< 1e-6)", worst));
    return o;
}

Outcome c7_adapted() {
    Outcome o;
    const DerivedParams d = derive_params(kRef);
    const GeneratorSpec gen = GeneratorSpec::canonical(d);
    const double zd = std::pow(d.Z(), d.delta());
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double graph = 0.0;
    double cons_y = 0.0;
    double cons_v = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double p = -20.0 + 40.0 * u01(rng);
        const double t = 0.1 + 5.0 * u01(rng);
        graph = std::max(graph, rel(to_adapted(p, t, tsallis_density(p, d), d).v, zd));

        const double w = 0.05 + u01(rng);
        const double s = 2.0 * u01(rng);
        if (const auto s_star = flow_blowup_parameter(p, w, gen); s_star && s > 0.9 * *s_star) continue;
        const AdaptedPoint a0 = to_adapted(p, t, w, gen);
        const FlowPoint f = flow_map(p, w, s, gen);
        const AdaptedPoint a1 = to_adapted(f.p, flow_time(t, s, gen), f.w, gen);
        cons_y = std::max(cons_y, rel(a1.y, a0.y));
        // v = w^(-delta) - (nu delta / 2) p^2 can cancel; measure against its leading term
        cons_v = std::max(cons_v, std::abs(a1.v - a0.v) / std::pow(w, -d.delta()));
    }
    o.require(graph < 1e-10, fmt("v - Z^delta on the stationary graph, max rel %.2e (< 1e-10)", graph));
    o.require(cons_y < 1e-12, fmt("y conserved along orbits, max rel %.2e (< 1e-12)", cons_y));
    o.require(cons_v < 1e-12, fmt("v conserved along orbits, max rel %.2e (< 1e-12)", cons_v));
    return o;
}

Outcome c8_normalization() {
    Outcome o;
    const DerivedParams d = derive_params(kRef);
    const VariationReport r = variation_integrals(init_state(Grid(50.0, 4000), TsallisProfile{d}), kRef, d);
    const double dev = std::max({std::abs(r.i_phi - 1.0), std::abs(r.i_scale + 1.0), std::abs(r.i_flux)});
    o.require(dev < 1e-6, fmt("w0: (i_phi, i_scale, i_flux) = (%.9f, %.9f, %.2e), max dev %.2e (< 1e-6)", r.i_phi,
                              r.i_scale, r.i_flux, dev));
    bool all = true;
    for (double q = 1.01; q < 3.0; q += 0.01) {
        all = all && normalizable_variation(1.0 / (q - 1.0), q).variation_ok;
    }
    o.require(all, "k q > 3/2 with k = 1/delta for q in [1.01, 2.99]");
    for (double delta : {0.2, 0.5, 0.8, 1.5}) {
        const LatticeParams params(1.0, delta * 0.01 / 2.0, 0.0, 0.1);
        const DerivedParams dd = derive_params(params);
        const double p_max = std::min(std::pow(10.0, 2.0 / delta), 1e6);
        const TailFit t = tail_exponent(init_state(Grid(p_max, 20000), TsallisProfile{dd}));
        o.require(rel(t.k_hat, 1.0 / delta) < 0.02,
                  fmt("delta=%g: k_hat=%.4f vs 1/delta=%.4f", delta, t.k_hat, 1.0 / delta));
    }
    return o;
}

Outcome c9_conservation_order() {
    Outcome o;
    const DerivedParams d = derive_params(kRef);
    double drift = 0.0;
    for (Method m : {Method::ChangCooper, Method::CentralCrankNicolson}) {
        const Grid g(30.0, 600);
        Field state = init_state(g, GaussianProfile{2.0});
        Stepper stepper(g, kRef, {m, 0.01, m == Method::ChangCooper ? 1.0 : 0.5});
        for (int k = 0; k < 10000; ++k) stepper.advance(state);
        drift = std::max(drift, std::abs(state.mass() - 1.0));
    }
    o.require(drift < 1e-12, fmt("mass drift over 1e4 steps %.2e (< 1e-12)", drift));

    std::vector<double> err;
    for (std::size_t n : {250u, 500u, 1000u, 2000u}) {
        const Grid g(50.0, n);
        EvolveOptions opts;
        opts.t_end = 20.0;
        opts.observers = {};
        const EvolveResult r =
            evolve(init_state(g, TsallisProfile{d}), kRef, {Method::CentralCrankNicolson, 0.01, 0.5}, opts);
        err.push_back(l1_distance(r.final_state, w0_samples(g, d)));
    }
    double order = 1e300;
    for (std::size_t i = 0; i + 1 < err.size(); ++i) order = std::min(order, std::log2(err[i] / err[i + 1]));
    o.require(order >= 1.9, fmt("central scheme spatial order %.3f (>= 1.9)", order));
    return o;
}

Outcome c10_regimes() {
    Outcome o;
    const DerivedParams d = derive_params(kRef);
    const std::array<int, 1> second{2};
    const MomentsResult m = moments(init_state(Grid(200.0, 16000), TsallisProfile{d}), second);
    o.require(d.regime() == Regime::NormalDiffusion && std::abs(m.values[0] - 6.0 / 7.0) < 1e-4,
              fmt("q=1.2: <p^2> = %.7f vs 6/7 (within 1e-4)", m.values[0]));

    const LatticeParams heavy(1.0, 0.4, 0.5, 1.0);
    const Grid g(2000.0, 40000);
    EvolveOptions opts;
    opts.t_end = 50.0;
    opts.sample_every = 100;
    opts.observers = {Observer::SecondMoment};
    const EvolveResult r = evolve(init_state(g, GaussianProfile{1.0}), heavy, SchemeConfig{}, opts);
    bool monotone = true;
    for (std::size_t i = 1; i < r.records.size(); ++i) monotone = monotone && r.records[i].m2 > r.records[i - 1].m2;
    o.require(derive_params(heavy).regime() == Regime::AnomalousDiffusion && monotone,
              fmt("q=1.8: m2 increases at all %zu samples on [0, 50], %.4f -> %.4f", r.records.size(),
                  r.records.front().m2, r.records.back().m2));
    o.detail += fmt("; truncation caveat: p_max=%.0f, edge mass fraction %.2e, truncation time estimate %.3g",
                    g.p_max(), r.max_edge_mass_fraction, r.truncation_time_estimate);
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::function<Outcome()>> criteria = {
        c1_stationarity, c2_sigma_selection, c3_closed_forms, c4_asymptotic_decay, c5_flow,
        c6_prolongation, c7_adapted,         c8_normalization, c9_conservation_order, c10_regimes};
    const std::string which = argc > 1 ? argv[1] : "all";
    std::vector<std::size_t> run;
    if (which == "all") {
        for (std::size_t i = 0; i < criteria.size(); ++i) run.push_back(i);
    } else {
        const int n = std::atoi(which.c_str());
        if (n < 1 || n > static_cast<int>(criteria.size())) {
            std::fprintf(stderr, "usage: %s <1..%zu | all>\n", argv[0], criteria.size());
            return 2;
        }
        run.push_back(static_cast<std::size_t>(n - 1));
    }
    bool ok = true;
    for (std::size_t i : run) {
        Outcome o;
        try {
            o = criteria[i]();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        std::printf("C%zu %s %s\n", i + 1, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        ok = ok && o.pass;
    }
    return ok ? 0 : 1;
}
