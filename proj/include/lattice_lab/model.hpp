#pragma once

#include <string_view>

namespace lattice_lab {

/// Physical constants of the optical-lattice Fokker-Planck equation
///
///   w_t = -d/dp [ h(p) w - g(p) w_p ],
///   h(p) = -alpha p / (1 + (p/p_c)^2),  g(p) = gamma0 + gamma1 / (1 + (p/p_c)^2).
///
/// All values are nondimensional. Construction validates the signs, so a
/// LatticeParams that exists is always usable downstream.
class LatticeParams {
public:
    LatticeParams(double alpha, double gamma0, double gamma1, double p_c);

    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] double gamma0() const noexcept { return gamma0_; }
    [[nodiscard]] double gamma1() const noexcept { return gamma1_; }
    [[nodiscard]] double p_c() const noexcept { return p_c_; }

    friend bool operator==(const LatticeParams&, const LatticeParams&) = default;

private:
    double alpha_;
    double gamma0_;
    double gamma1_;
    double p_c_;
};

/// Drift, diffusion and the Lorentzian factor 1/(1+(p/p_c)^2) at one momentum.
struct Coefficients {
    double h;
    double g;
    double beta_p;
};

/// First and second momentum derivatives of h and g.
struct CoefficientDerivatives {
    double dh;
    double d2h;
    double dg;
    double d2g;
};

[[nodiscard]] Coefficients eval_coefficients(double p, const LatticeParams& params) noexcept;
[[nodiscard]] CoefficientDerivatives eval_coefficient_derivatives(double p,
                                                                  const LatticeParams& params) noexcept;

enum class Regime {
    NormalDiffusion,
    AnomalousDiffusion,
    NonNormalizable,
    /// q == 5/3 exactly: second moment diverges logarithmically.
    BoundaryAnomalousOnset,
    /// q == 3 exactly: stationary state sits on the normalizability edge.
    BoundaryNormalizability,
};

[[nodiscard]] std::string_view to_string(Regime regime) noexcept;

/// Classify by the Tsallis index. Requires q > 1.
[[nodiscard]] Regime classify_regime(double q);

/// Constants of the Tsallis stationary state
///   w0(p) = (1/Z) (1 + beta delta p^2)^(-1/delta).
///
/// delta is stored; q = 1 + delta and mu = -1/delta are views. Only
/// derive_params() produces instances, and it rejects q outside (1, 3).
class DerivedParams {
public:
    [[nodiscard]] double beta() const noexcept { return beta_; }
    [[nodiscard]] double delta() const noexcept { return delta_; }
    [[nodiscard]] double q() const noexcept { return 1.0 + delta_; }
    [[nodiscard]] double mu() const noexcept { return -1.0 / delta_; }
    [[nodiscard]] double Z() const noexcept { return Z_; }
    /// 2 beta Z^delta: the w-coefficient of the invariance generator.
    [[nodiscard]] double nu() const noexcept { return nu_; }
    /// Tail exponent: w0 ~ p^(-2k).
    [[nodiscard]] double k() const noexcept { return 1.0 / delta_; }
    [[nodiscard]] Regime regime() const { return classify_regime(q()); }

private:
    friend DerivedParams derive_params(const LatticeParams& params);
    DerivedParams(double beta, double delta, double Z);

    double beta_;
    double delta_;
    double Z_;
    double nu_;
};

/// Throws ValidationError when q >= 3 ("physical range"). gamma0 = 0 never
/// reaches here since LatticeParams rejects it; see GaussianLimit.
[[nodiscard]] DerivedParams derive_params(const LatticeParams& params);

/// The stationary state when gamma0 == 0, which LatticeParams does not admit:
/// w0 = exp(-beta p^2) / sqrt(pi/beta) with beta = alpha / (2 gamma1).
class GaussianLimit {
public:
    GaussianLimit(double alpha, double gamma1);

    [[nodiscard]] double beta() const noexcept { return beta_; }
    [[nodiscard]] double Z() const noexcept { return Z_; }
    [[nodiscard]] double density(double p) const noexcept;

private:
    double beta_;
    double Z_;
};

[[nodiscard]] double tsallis_density(double p, const DerivedParams& d) noexcept;

/// Same density written as (1/Z) [1 - (beta/mu) p^2]^mu.
[[nodiscard]] double tsallis_density_mu_form(double p, const DerivedParams& d) noexcept;

/// Result of normalization_Z: both routes, so callers can see the agreement.
struct NormalizationResult {
    double quadrature;
    double closed_form;
    double relative_difference;
};

/// Z = integral of (1 + beta delta p^2)^(-1/delta) over the real line.
///
/// Adaptive Gauss-Kronrod on [0, P] plus an exact series for the tail beyond P,
/// cross-checked against sqrt(pi/(beta delta)) Gamma(1/delta - 1/2) / Gamma(1/delta).
/// Throws NumericalError when the two disagree beyond 1e-10 relative and
/// ValidationError when the integral diverges (1/delta <= 1/2).
[[nodiscard]] NormalizationResult normalization_Z(const LatticeParams& params);

/// Closed form only; shared by derive_params and the quadrature check.
[[nodiscard]] double normalization_Z_closed_form(double beta, double delta);

/// <p^2> under w0 = 1 / (beta delta (2/delta - 3)). Throws ValidationError
/// outside the normal-diffusion regime, where the moment diverges.
[[nodiscard]] double stationary_second_moment(const DerivedParams& d);

/// Integral of w0 over |p| > p_cut (both tails).
[[nodiscard]] double stationary_tail_mass(const DerivedParams& d, double p_cut);

}  // namespace lattice_lab
