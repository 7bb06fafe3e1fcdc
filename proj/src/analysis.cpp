#include "lattice_lab/analysis.hpp"

#include "lattice_lab/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <thread>

namespace lattice_lab {

namespace {

constexpr double kTailFloor = 1e-300;

struct LineFit {
    double slope = 0.0;
    double r2 = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

// Derivative at cell i: centered in the interior, one-sided at the ends.
double cell_derivative(const std::vector<double>& w, std::size_t i, double dp) {
    const std::size_t n = w.size();
    if (i == 0) return (w[1] - w[0]) / dp;
    if (i == n - 1) return (w[n - 1] - w[n - 2]) / dp;
    return (w[i + 1] - w[i - 1]) / (2.0 * dp);
}

// True when |f| at the edge is not smaller than at half the edge, i.e. the
// boundary term is not going away.
bool edge_not_decaying(double at_edge, double at_half, double scale) {
    if (std::abs(at_edge) <= 1e-12 * scale) return false;
    return std::abs(at_edge) >= std::abs(at_half);
}

std::size_t nearest_center(const Grid& grid, double p) {
    auto c = grid.centers();
    auto it = std::lower_bound(c.begin(), c.end(), p);
    if (it == c.end()) return c.size() - 1;
    return static_cast<std::size_t>(it - c.begin());
}

}  // namespace

std::string_view to_string(TailClass c) noexcept {
    switch (c) {
        case TailClass::PowerLaw: return "power_law";
        case TailClass::SuperPolynomial: return "super_polynomial";
        case TailClass::NonDecaying: return "non_decaying";
        case TailClass::Indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

TailFit tail_exponent(const Field& state) {
    const auto centers = state.grid.centers();
    const std::size_t n = centers.size();
    const std::size_t half = n / 2;

    std::vector<double> p;
    std::vector<double> v;
    p.reserve(half);
    v.reserve(half);
    for (std::size_t i = half; i < n; ++i) {
        p.push_back(centers[i]);
        v.push_back(0.5 * (state.values[i] + state.values[n - 1 - i]));
    }

    std::size_t hi = v.size();
    while (hi > 0 && !(std::isfinite(v[hi - 1]) && v[hi - 1] > kTailFloor)) --hi;
    if (hi == 0) throw ValidationError("tail_exponent: field has no positive tail");
    // Drop an outer stretch that rises toward the edge (boundary pile-up),
    // unless that would leave less than a decade.
    std::size_t trimmed = hi;
    while (trimmed > 1 && v[trimmed - 1] > v[trimmed - 2]) --trimmed;
    if (trimmed > 0 && p[trimmed - 1] / 10.0 >= p.front()) hi = trimmed;
    const double p_hi = p[hi - 1];
    const double p_lo = p_hi / 10.0;
    if (p_lo < p.front()) throw ValidationError("tail_exponent: positive tail spans less than one decade");

    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t j = 0; j < hi; ++j) {
        if (p[j] < p_lo) continue;
        if (!(v[j] > kTailFloor)) continue;
        lx.push_back(std::log(p[j]));
        ly.push_back(std::log(v[j]));
    }
    if (lx.size() < 6) throw ValidationError("tail_exponent: too few tail samples");

    TailFit fit;
    fit.window_lo = p_lo;
    fit.window_hi = p_hi;
    const LineFit all = fit_line(lx, ly);
    fit.slope = all.slope;
    fit.r2 = all.r2;
    fit.k_hat = -all.slope / 2.0;

    const double mid = 0.5 * (lx.front() + lx.back());
    std::vector<double> ix, iy, ox, oy;
    for (std::size_t j = 0; j < lx.size(); ++j) {
        if (lx[j] <= mid) {
            ix.push_back(lx[j]);
            iy.push_back(ly[j]);
        } else {
            ox.push_back(lx[j]);
            oy.push_back(ly[j]);
        }
    }
    const double s_in = fit_line(ix, iy).slope;
    const double s_out = fit_line(ox, oy).slope;

    if (all.slope >= 0.0 || s_out >= 0.0) {
        fit.tail_class = TailClass::NonDecaying;
    } else if (s_out < 1.1 * s_in) {
        fit.tail_class = TailClass::SuperPolynomial;
    } else if (all.r2 > 0.999) {
        fit.tail_class = TailClass::PowerLaw;
    } else {
        fit.tail_class = TailClass::Indeterminate;
    }
    return fit;
}

NormalizabilityDecision normalizable_variation(double k, double q) {
    if (!(k > 0.0)) throw ValidationError("normalizable_variation: k > 0 required");
    if (!(q > 1.0 && q < 3.0)) throw ValidationError("normalizable_variation: q in (1, 3) required");
    return {k > 0.5, k * q > 1.5};
}

VariationReport variation_integrals(const Field& state, const LatticeParams& params, const DerivedParams& d) {
    const auto centers = state.grid.centers();
    const auto& w = state.values;
    const std::size_t n = w.size();
    const double dp = state.grid.dp();
    const double q = d.q();
    const double nu = d.nu();

    VariationReport r;
    std::vector<double> phi(n);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = centers[i];
        phi[i] = w[i] > 0.0 ? nu * p * p * std::pow(w[i], q) : 0.0;
        r.i_phi += phi[i] * dp;
        r.i_scale += p * cell_derivative(w, i, dp) * dp;
        scale = std::max(scale, std::abs(w[i]));
    }

    auto flux_at = [&](std::size_t i) {
        const Coefficients c = eval_coefficients(centers[i], params);
        return c.h * w[i] - c.g * cell_derivative(w, i, dp);
    };
    r.i_flux = flux_at(n - 1) - flux_at(0);
    r.total = r.i_phi + r.i_scale - 2.0 * state.t * r.i_flux;

    // Cauchy test on the phi integral: increments over [P/2, P] must shrink
    // relative to [P/4, P/2].
    const double P = state.grid.p_max();
    auto partial = [&](double cut) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(centers[i]) <= cut) s += phi[i] * dp;
        }
        return s;
    };
    const double s1 = partial(P);
    const double s2 = partial(P / 2.0);
    const double s4 = partial(P / 4.0);
    const double inc_outer = s1 - s2;
    const double inc_inner = s2 - s4;
    if (inc_outer > 1e-12 * std::abs(s1) && inc_outer >= inc_inner) r.finite_phi = false;

    const std::size_t i_half = nearest_center(state.grid, P / 2.0);
    const double pw_edge = centers[n - 1] * w[n - 1];
    const double pw_half = centers[i_half] * w[i_half];
    r.finite_scale = !edge_not_decaying(pw_edge, pw_half, P * scale);
    r.finite_flux = !edge_not_decaying(flux_at(n - 1), flux_at(i_half), scale);

    try {
        r.tail = tail_exponent(state);
    } catch (const ValidationError&) {
        r.tail.reset();
    }
    if (r.tail && r.tail->tail_class == TailClass::PowerLaw && r.tail->k_hat * q <= 1.5) {
        r.non_normalizable_variation = true;
        r.finite_phi = false;
    }
    return r;
}

namespace {

SweepParamsResult run_params_point(const SweepConfig& cfg, const ParamsEntry& e) {
    SweepParamsResult out;
    out.entry = e;
    try {
        const LatticeParams params(e.alpha, e.gamma0, e.gamma1, e.p_c);
        const DerivedParams d = derive_params(params);
        out.derived = d;
        out.decision = normalizable_variation(d.k(), d.q());
        if (cfg.grid) {
            const Field w0 = init_state(*cfg.grid, TsallisProfile{d});
            out.variation = variation_integrals(w0, params, d);
        }
        if (cfg.evolve) {
            const Field start = init_state(*cfg.grid, GaussianProfile{cfg.evolve->gaussian_width});
            out.evolution = evolve(start, params, cfg.evolve->scheme, cfg.evolve->options);
        }
        out.ok = true;
    } catch (const std::exception& ex) {
        out.ok = false;
        out.error = ex.what();
    }
    return out;
}

SweepScanResult run_scan_point(const SweepConfig& cfg, std::size_t index, double sigma) {
    SweepScanResult out;
    out.params_index = index;
    out.sigma = sigma;
    const ParamsEntry& e = cfg.params_grid[index];
    try {
        const LatticeParams params(e.alpha, e.gamma0, e.gamma1, e.p_c);
        const DerivedParams d = derive_params(params);
        out.decay = asymptotic_scan(params, GeneratorSpec::canonical(d, sigma), Profile::tsallis(d), cfg.scan);
        out.ok = true;
    } catch (const std::exception& ex) {
        out.ok = false;
        out.error = ex.what();
    }
    return out;
}

}  // namespace

SweepReport sweep(const SweepConfig& config) {
    if (config.evolve && !config.grid) throw ValidationError("sweep: evolve requires grid");
    for (double s : config.sigmas) {
        if (!std::isfinite(s)) throw ValidationError("sweep: sigmas must be finite");
    }

    SweepReport report;
    if (config.params_grid.empty()) return report;
    report.params.resize(config.params_grid.size());
    report.scans.resize(config.params_grid.size() * config.sigmas.size());

    const std::size_t n_params = report.params.size();
    const std::size_t n_tasks = n_params + report.scans.size();
    std::function<void(std::size_t)> run_task = [&](std::size_t task) {
        if (task < n_params) {
            report.params[task] = run_params_point(config, config.params_grid[task]);
        } else {
            const std::size_t k = task - n_params;
            const std::size_t i = k / config.sigmas.size();
            const std::size_t j = k % config.sigmas.size();
            report.scans[k] = run_scan_point(config, i, config.sigmas[j]);
        }
    };

    const unsigned threads = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(n_tasks)));
    if (threads == 1) {
        for (std::size_t t = 0; t < n_tasks; ++t) run_task(t);
        return report;
    }
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t task = next++; task < n_tasks; task = next++) run_task(task);
            });
        }
    }
    return report;
}

}  // namespace lattice_lab
