#include "lattice_lab/model.hpp"

#include "lattice_lab/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace lattice_lab {

namespace {

std::string describe(const char* name, double value, const char* requirement) {
    std::ostringstream os;
    os << name << " = " << value << ": " << requirement;
    return os.str();
}

bool near(double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
}

// (1 + a p^2)^(-m) via log1p so that tiny a (q -> 1) keeps full precision.
double tsallis_kernel(double p, double a, double m) {
    return std::exp(-m * std::log1p(a * p * p));
}

// Integral of (1 + a p^2)^(-m) over [P, inf) from the binomial expansion in
// 1/(a p^2); valid when a P^2 > 1, accurate once m / (a P^2) is small.
double kernel_tail_series(double a, double m, double P) {
    const double x = 1.0 / (a * P * P);
    const double lead = std::exp(-m * std::log(a * P * P)) * P;
    double coeff = 1.0;
    double xj = 1.0;
    double sum = 0.0;
    for (int j = 0; j < 200; ++j) {
        const double term = coeff * xj / (2.0 * m + 2.0 * j - 1.0);
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) {
            break;
        }
        coeff *= -(m + j) / (j + 1.0);
        xj *= x;
    }
    return lead * sum;
}

struct KernelSplit {
    double p;
    bool series_tail;
};

// Split point for the quadrature: far enough out that the tail series
// converges quickly, or that the integrand is negligible (small delta).
KernelSplit kernel_split_point(double a, double m) {
    const double x = std::min(1.0 / 16.0, 1.0 / (4.0 * m));
    const double p_series = std::sqrt(1.0 / (a * x));
    const double p_negligible = std::sqrt(std::expm1(50.0 / m) / a);
    if (p_series <= p_negligible) return {p_series, true};
    return {p_negligible, false};
}

// Integral of (1 + a p^2)^(-m) over [lo, inf).
double kernel_integral_from(double a, double m, double lo) {
    using boost::math::quadrature::gauss_kronrod;
    const KernelSplit split = kernel_split_point(a, m);
    auto f = [a, m](double p) { return tsallis_kernel(p, a, m); };
    if (lo >= split.p) {
        return split.series_tail || a * lo * lo > 1.0 ? kernel_tail_series(a, m, lo)
                                                      : gauss_kronrod<double, 31>::integrate(
                                                            f, lo, std::numeric_limits<double>::infinity(), 12, 1e-13);
    }
    const double body = gauss_kronrod<double, 31>::integrate(f, lo, split.p, 12, 1e-13);
    const double tail = split.series_tail ? kernel_tail_series(a, m, split.p) : 0.0;
    return body + tail;
}

}  // namespace

LatticeParams::LatticeParams(double alpha, double gamma0, double gamma1, double p_c)
    : alpha_(alpha), gamma0_(gamma0), gamma1_(gamma1), p_c_(p_c) {
    if (!std::isfinite(alpha) || alpha <= 0.0) {
        throw ValidationError(describe("alpha", alpha, "alpha > 0 required"));
    }
    if (!std::isfinite(gamma0) || gamma0 <= 0.0) {
        throw ValidationError(describe("gamma0", gamma0, "gamma0 > 0 required"));
    }
    if (!std::isfinite(gamma1) || gamma1 < 0.0) {
        throw ValidationError(describe("gamma1", gamma1, "gamma1 >= 0 required"));
    }
    if (!std::isfinite(p_c) || p_c <= 0.0) {
        throw ValidationError(describe("p_c", p_c, "p_c > 0 required"));
    }
}

Coefficients eval_coefficients(double p, const LatticeParams& params) noexcept {
    const double r = p / params.p_c();
    const double beta_p = 1.0 / (1.0 + r * r);
    return {-params.alpha() * p * beta_p, params.gamma0() + params.gamma1() * beta_p, beta_p};
}

CoefficientDerivatives eval_coefficient_derivatives(double p, const LatticeParams& params) noexcept {
    const double pc2 = params.p_c() * params.p_c();
    const double b = 1.0 / (1.0 + p * p / pc2);
    const double db = -2.0 * p * b * b / pc2;
    const double d2b = -2.0 * b * b / pc2 + 8.0 * p * p * b * b * b / (pc2 * pc2);
    const double a = params.alpha();
    return {
        -a * (b + p * db),
        -a * (2.0 * db + p * d2b),
        params.gamma1() * db,
        params.gamma1() * d2b,
    };
}

std::string_view to_string(Regime regime) noexcept {
    switch (regime) {
        case Regime::NormalDiffusion: return "NormalDiffusion";
        case Regime::AnomalousDiffusion: return "AnomalousDiffusion";
        case Regime::NonNormalizable: return "NonNormalizable";
        case Regime::BoundaryAnomalousOnset: return "BoundaryAnomalousOnset";
        case Regime::BoundaryNormalizability: return "BoundaryNormalizability";
    }
    return "Unknown";
}

Regime classify_regime(double q) {
    if (!std::isfinite(q) || q <= 1.0) {
        throw ValidationError(describe("q", q, "regime classification requires q > 1"));
    }
    constexpr double onset = 5.0 / 3.0;
    if (near(q, onset)) {
        return Regime::BoundaryAnomalousOnset;
    }
    if (near(q, 3.0)) {
        return Regime::BoundaryNormalizability;
    }
    if (q < onset) {
        return Regime::NormalDiffusion;
    }
    return q < 3.0 ? Regime::AnomalousDiffusion : Regime::NonNormalizable;
}

DerivedParams::DerivedParams(double beta, double delta, double Z)
    : beta_(beta), delta_(delta), Z_(Z), nu_(2.0 * beta * std::pow(Z, delta)) {}

double normalization_Z_closed_form(double beta, double delta) {
    const double m = 1.0 / delta;
    if (!(m > 0.5)) {
        throw ValidationError(describe("1/delta", m, "normalization diverges unless 1/delta > 1/2 (q < 3)"));
    }
    const double a = beta * delta;
    return std::sqrt(std::numbers::pi / a) * boost::math::tgamma_delta_ratio(m - 0.5, 0.5);
}

NormalizationResult normalization_Z(const LatticeParams& params) {
    const double beta = params.alpha() / (2.0 * (params.gamma0() + params.gamma1()));
    const double delta = 2.0 * params.gamma0() / (params.alpha() * params.p_c() * params.p_c());
    const double closed = normalization_Z_closed_form(beta, delta);
    const double quad = 2.0 * kernel_integral_from(beta * delta, 1.0 / delta, 0.0);
    const double rel = std::abs(quad - closed) / closed;
    if (!(rel <= 1e-10)) {
        std::ostringstream os;
        os << "normalization routes disagree: quadrature " << quad << " vs closed form " << closed
           << " (relative " << rel << ")";
        throw NumericalError(os.str());
    }
    return {quad, closed, rel};
}

DerivedParams derive_params(const LatticeParams& params) {
    const double beta = params.alpha() / (2.0 * (params.gamma0() + params.gamma1()));
    const double delta = 2.0 * params.gamma0() / (params.alpha() * params.p_c() * params.p_c());
    const double q = 1.0 + delta;
    if (!(delta > 0.0)) {
        throw ValidationError(describe("q", q, "q <= 1 is the Gaussian limit; use GaussianLimit"));
    }
    if (q >= 3.0) {
        throw ValidationError(
            describe("q", q, "outside the physical range q < 3 (stationary state not normalizable)"));
    }
    return DerivedParams(beta, delta, normalization_Z(params).closed_form);
}

GaussianLimit::GaussianLimit(double alpha, double gamma1) {
    if (!std::isfinite(alpha) || alpha <= 0.0) {
        throw ValidationError(describe("alpha", alpha, "alpha > 0 required"));
    }
    if (!std::isfinite(gamma1) || gamma1 <= 0.0) {
        throw ValidationError(describe("gamma1", gamma1, "gamma1 > 0 required when gamma0 = 0"));
    }
    beta_ = alpha / (2.0 * gamma1);
    Z_ = std::sqrt(std::numbers::pi / beta_);
}

double GaussianLimit::density(double p) const noexcept {
    return std::exp(-beta_ * p * p) / Z_;
}

double tsallis_density(double p, const DerivedParams& d) noexcept {
    return tsallis_kernel(p, d.beta() * d.delta(), 1.0 / d.delta()) / d.Z();
}

double tsallis_density_mu_form(double p, const DerivedParams& d) noexcept {
    const double mu = d.mu();
    return std::pow(1.0 - (d.beta() / mu) * p * p, mu) / d.Z();
}

double stationary_second_moment(const DerivedParams& d) {
    const double denom = 2.0 / d.delta() - 3.0;
    if (!(denom > 0.0)) {
        throw ValidationError(describe("q", d.q(), "second moment of w0 diverges for q >= 5/3"));
    }
    return 1.0 / (d.beta() * d.delta() * denom);
}

double stationary_tail_mass(const DerivedParams& d, double p_cut) {
    const double a = d.beta() * d.delta();
    return 2.0 * kernel_integral_from(a, 1.0 / d.delta(), std::abs(p_cut)) / d.Z();
}

}  // namespace lattice_lab
