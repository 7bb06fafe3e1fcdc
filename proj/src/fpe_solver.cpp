#include "lattice_lab/fpe_solver.hpp"

#include "lattice_lab/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace lattice_lab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// x / (e^x - 1), the Bernoulli weight of the exponentially fitted flux.
double bernoulli(double x) {
    if (std::abs(x) < 1e-10) {
        return 1.0 - 0.5 * x;
    }
    return x / std::expm1(x);
}

// Thomas algorithm for a strictly diagonally dominant or M-matrix system.
void solve_tridiagonal(std::span<const double> sub, std::span<const double> main, std::span<const double> sup,
                       std::span<double> x, std::span<double> c, std::span<double> d) {
    const std::size_t n = main.size();
    c[0] = sup[0] / main[0];
    d[0] = x[0] / main[0];
    for (std::size_t i = 1; i < n; ++i) {
        const double m = main[i] - sub[i] * c[i - 1];
        c[i] = i + 1 < n ? sup[i] / m : 0.0;
        d[i] = (x[i] - sub[i] * d[i - 1]) / m;
    }
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        x[i] = d[i] - c[i] * x[i + 1];
    }
}

void check_values(const std::vector<double>& v, double t) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i]) || v[i] < 0.0) {
            std::ostringstream os;
            os << (std::isfinite(v[i]) ? "negative density " : "non-finite value ") << v[i] << " at cell " << i
               << " (t = " << t << "); reduce dt or raise theta";
            throw NumericalError(os.str(), i);
        }
    }
}

}  // namespace

std::string_view to_string(Method method) noexcept {
    switch (method) {
        case Method::ChangCooper: return "chang_cooper";
        case Method::CentralCrankNicolson: return "central_cn";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    if (name == "chang_cooper") {
        return Method::ChangCooper;
    }
    if (name == "central_cn") {
        return Method::CentralCrankNicolson;
    }
    throw ValidationError("scheme.method must be \"chang_cooper\" or \"central_cn\", got \"" + std::string(name) +
                          "\"");
}

Field init_state(const Grid& grid, const InitialProfile& profile) {
    const auto p = grid.centers();
    std::vector<double> values(grid.size());
    std::visit(
        [&](const auto& prof) {
            using T = std::decay_t<decltype(prof)>;
            if constexpr (std::is_same_v<T, GaussianProfile>) {
                if (!(prof.width > 0.0)) {
                    throw ValidationError("Gaussian width must be positive");
                }
                for (std::size_t i = 0; i < p.size(); ++i) {
                    values[i] = std::exp(-0.5 * p[i] * p[i] / (prof.width * prof.width));
                }
            } else if constexpr (std::is_same_v<T, TsallisProfile>) {
                for (std::size_t i = 0; i < p.size(); ++i) {
                    values[i] = tsallis_density(p[i], prof.params);
                }
            } else {
                if (prof.values.size() != grid.size()) {
                    throw ValidationError("custom profile has " + std::to_string(prof.values.size()) +
                                          " values for a grid of " + std::to_string(grid.size()) + " cells");
                }
                values = prof.values;
            }
        },
        profile);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]) || values[i] < 0.0) {
            throw ValidationError("initial profile is negative or non-finite at cell " + std::to_string(i));
        }
    }
    Field field{grid, 0.0, std::move(values)};
    const double mass = field.mass();
    if (!(mass > 0.0)) {
        throw ValidationError("initial profile has zero mass on the grid");
    }
    for (double& v : field.values) {
        v /= mass;
    }
    return field;
}

FluxOperator::FluxOperator(const Grid& grid, const LatticeParams& params, Method method) {
    const std::size_t n = grid.size();
    const double dp = grid.dp();
    const auto faces = grid.faces();
    const auto centers = grid.centers();
    // Face f (1..n-1) separates cells f-1 and f. Outward flux F = -J is
    // written F_f = plus[f] w_f - minus[f] w_{f-1}; outer faces carry none.
    std::vector<double> plus(n + 1, 0.0);
    std::vector<double> minus(n + 1, 0.0);
    for (std::size_t f = 1; f < n; ++f) {
        const Coefficients c = eval_coefficients(faces[f], params);
        max_g_ = std::max(max_g_, c.g);
        if (method == Method::ChangCooper) {
            auto ratio = [&params](double p) {
                const Coefficients k = eval_coefficients(p, params);
                return k.h / k.g;
            };
            const double W =
                -boost::math::quadrature::gauss<double, 10>::integrate(ratio, centers[f - 1], centers[f]);
            plus[f] = c.g / dp * bernoulli(-W);
            minus[f] = c.g / dp * bernoulli(W);
        } else {
            plus[f] = c.g / dp - 0.5 * c.h;
            minus[f] = c.g / dp + 0.5 * c.h;
        }
    }
    max_g_ = std::max({max_g_, eval_coefficients(faces[0], params).g, eval_coefficients(0.0, params).g});
    lower_.assign(n, 0.0);
    diag_.assign(n, 0.0);
    upper_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        lower_[i] = minus[i] / dp;
        upper_[i] = plus[i + 1] / dp;
        diag_[i] = -(minus[i + 1] + plus[i]) / dp;
    }
}

void FluxOperator::apply(std::span<const double> w, std::span<double> out) const {
    const std::size_t n = diag_.size();
    for (std::size_t i = 0; i < n; ++i) {
        double acc = diag_[i] * w[i];
        if (i > 0) {
            acc += lower_[i] * w[i - 1];
        }
        if (i + 1 < n) {
            acc += upper_[i] * w[i + 1];
        }
        out[i] = acc;
    }
}

Stepper::Stepper(const Grid& grid, const LatticeParams& params, const SchemeConfig& cfg)
    : cfg_(cfg), op_(grid, params, cfg.method) {
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) {
        throw ValidationError("scheme.dt must be positive");
    }
    if (!(cfg.theta >= 0.0 && cfg.theta <= 1.0)) {
        throw ValidationError("scheme.theta must lie in [0, 1]");
    }
    if (cfg.theta < 0.5) {
        const double bound = grid.dp() * grid.dp() / (2.0 * op_.max_diffusion());
        if (cfg.dt > bound) {
            std::ostringstream os;
            os << "scheme.dt = " << cfg.dt << " exceeds the explicit stability bound dp^2/(2 max g) = " << bound
               << " for theta < 1/2";
            throw ValidationError(os.str());
        }
    }
    const std::size_t n = grid.size();
    const auto L = op_.lower();
    const auto D = op_.diag();
    const auto U = op_.upper();
    const double a = cfg.theta * cfg.dt;
    sub_.resize(n);
    main_.resize(n);
    sup_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        sub_[i] = -a * L[i];
        main_[i] = 1.0 - a * D[i];
        sup_[i] = -a * U[i];
    }
    rhs_.resize(n);
    scratch_c_.resize(n);
    scratch_d_.resize(n);
}

void Stepper::advance(Field& state) {
    const std::size_t n = state.values.size();
    const double explicit_weight = (1.0 - cfg_.theta) * cfg_.dt;
    op_.apply(state.values, rhs_);
    for (std::size_t i = 0; i < n; ++i) {
        rhs_[i] = state.values[i] + explicit_weight * rhs_[i];
    }
    if (cfg_.theta > 0.0) {
        solve_tridiagonal(sub_, main_, sup_, rhs_, scratch_c_, scratch_d_);
    }
    state.values.swap(rhs_);
    state.t += cfg_.dt;
    check_values(state.values, state.t);
}

Field step(const Field& state, const LatticeParams& params, const SchemeConfig& cfg) {
    Stepper stepper(state.grid, params, cfg);
    Field next = state;
    stepper.advance(next);
    return next;
}

double stationarity_residual(const Field& state, const LatticeParams& params) {
    const std::size_t n = state.values.size();
    const double dp = state.grid.dp();
    const auto faces = state.grid.faces();
    const auto& w = state.values;
    std::vector<double> J(n + 1, 0.0);
    for (std::size_t f = 1; f < n; ++f) {
        const Coefficients c = eval_coefficients(faces[f], params);
        J[f] = c.h * 0.5 * (w[f - 1] + w[f]) - c.g * (w[f] - w[f - 1]) / dp;
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        worst = std::max(worst, std::abs(J[i + 1] - J[i]) / dp);
    }
    return worst;
}

MomentsResult moments(const Field& state, std::span<const int> orders) {
    const auto p = state.grid.centers();
    const double dp = state.grid.dp();
    const std::size_t n = p.size();
    MomentsResult out;
    for (const int order : orders) {
        if (order < 0) {
            throw ValidationError("moment orders must be non-negative");
        }
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sum += std::pow(p[i], order) * state.values[i];
        }
        out.values.push_back(sum * dp);

        // Integrand per unit log|p|, at the edge versus half-way out.
        auto log_density = [&](std::size_t i) {
            return std::pow(std::abs(p[i]), order + 1) * 0.5 * (state.values[i] + state.values[n - 1 - i]);
        };
        const double edge = log_density(n - 1);
        const double half = log_density(n - 1 - n / 4);
        out.divergence_warning.push_back(edge > 0.0 && edge >= 0.5 * half);
    }
    return out;
}

EvolveResult evolve(const Field& state, const LatticeParams& params, const SchemeConfig& cfg,
                    const EvolveOptions& options) {
    const double span = options.t_end - state.t;
    if (!(span >= 0.0) || !std::isfinite(span)) {
        throw ValidationError("evolve: t_end must be >= the state's time");
    }
    if (options.sample_every == 0) {
        throw ValidationError("evolve: sample_every must be >= 1");
    }
    const auto n_steps = static_cast<std::size_t>(std::ceil(span / cfg.dt - 1e-9));
    if (n_steps > options.max_steps) {
        throw NumericalError("evolve: " + std::to_string(n_steps) + " steps exceed the step budget of " +
                             std::to_string(options.max_steps));
    }
    SchemeConfig run_cfg = cfg;
    if (n_steps > 0) {
        run_cfg.dt = span / static_cast<double>(n_steps);
    }
    Stepper stepper(state.grid, params, run_cfg);

    auto wants = [&](Observer o) {
        return std::find(options.observers.begin(), options.observers.end(), o) != options.observers.end();
    };
    std::vector<double> w0;
    if (wants(Observer::L1ToStationary)) {
        try {
            const DerivedParams d = derive_params(params);
            for (double p : state.grid.centers()) {
                w0.push_back(tsallis_density(p, d));
            }
        } catch (const ValidationError&) {
            w0.clear();
        }
    }

    EvolveResult result{state, {}, 0, run_cfg.dt, 0.0, 0.0, 0.0};
    result.truncation_time_estimate = state.grid.p_max() * state.grid.p_max() / (2.0 * params.gamma0());
    const auto p = state.grid.centers();
    const std::array<int, 1> second{2};

    auto sample = [&](const Field& f) {
        TrajectoryRecord r{f.t, kNaN, kNaN, kNaN, kNaN};
        const double mass = f.mass();
        if (wants(Observer::Mass)) {
            r.mass = mass;
        }
        if (wants(Observer::SecondMoment)) {
            r.m2 = moments(f, second).values[0];
        }
        if (!w0.empty()) {
            r.l1_to_w0 = l1_distance(f, w0);
        }
        if (wants(Observer::StationarityResidual)) {
            r.stat_residual = stationarity_residual(f, params);
        }
        double edge = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (std::abs(p[i]) > 0.9 * f.grid.p_max()) {
                edge += f.values[i];
            }
        }
        if (mass > 0.0) {
            result.max_edge_mass_fraction = std::max(result.max_edge_mass_fraction, edge * f.grid.dp() / mass);
        }
        result.records.push_back(r);
    };

    const auto start = std::chrono::steady_clock::now();
    Field& cur = result.final_state;
    sample(cur);
    for (std::size_t k = 1; k <= n_steps; ++k) {
        stepper.advance(cur);
        ++result.steps;
        if (k % options.sample_every == 0 || k == n_steps) {
            sample(cur);
        }
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (elapsed > options.max_wall_seconds) {
            throw NumericalError("evolve: wall-clock budget of " + std::to_string(options.max_wall_seconds) +
                                 " s exhausted at t = " + std::to_string(cur.t));
        }
    }
    if (n_steps > 0) {
        cur.t = options.t_end;
    }
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

double default_p_max(const DerivedParams& d, double tail_mass) {
    double p = 1.0;
    while (stationary_tail_mass(d, p) >= tail_mass) {
        p *= 2.0;
        if (p > 1e12) {
            throw ValidationError("stationary tail too heavy for a finite default p_max");
        }
    }
    return p;
}

}  // namespace lattice_lab
