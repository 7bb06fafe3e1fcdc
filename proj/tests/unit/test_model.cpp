#include "lattice_lab/errors.hpp"
#include "lattice_lab/model.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <string>

using namespace lattice_lab;

namespace {

const LatticeParams kRef(1.0, 0.1, 0.5, 1.0);

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::string message_of(auto&& f) {
    try {
        f();
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("reference parameters by hand") {
    const DerivedParams d = derive_params(kRef);
    CHECK(d.beta() == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
    CHECK(d.delta() == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(d.q() == doctest::Approx(1.2).epsilon(1e-15));
    CHECK(d.mu() == doctest::Approx(-5.0).epsilon(1e-15));
    CHECK(d.k() == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(d.regime() == Regime::NormalDiffusion);
}

TEST_CASE("Z against substitution quadrature") {
    const DerivedParams d = derive_params(kRef);
    const double z_oracle = oracle::normalization_Z(d.beta(), d.delta());
    CHECK(rel(d.Z(), z_oracle) < 1e-12);
    // mpmath, 30 digits
    CHECK(rel(d.Z(), 2.10418331510930828) < 1e-14);
    CHECK(rel(1.0 / d.Z(), 0.475244) < 1e-6);
    CHECK(rel(d.nu(), 2.0 * d.beta() * std::pow(z_oracle, d.delta())) < 1e-13);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const double alpha = 0.2 + 3.0 * u01(rng);
        const double p_c = 0.2 + 3.0 * u01(rng);
        const double gamma1 = 2.0 * u01(rng);
        // delta in (0.02, 1.9)
        const double delta = 0.02 + 1.88 * u01(rng);
        const double gamma0 = delta * alpha * p_c * p_c / 2.0;
        const LatticeParams params(alpha, gamma0, gamma1, p_c);
        const NormalizationResult nz = normalization_Z(params);
        const DerivedParams dd = derive_params(params);
        CAPTURE(delta);
        CHECK(nz.relative_difference < 1e-10);
        CHECK(rel(dd.Z(), oracle::normalization_Z(dd.beta(), dd.delta())) < 1e-10);
    }
}

TEST_CASE("stationary density is normalized and flux-free") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const double delta = 0.05 + 1.5 * u01(rng);
        const double alpha = 0.5 + u01(rng);
        const double p_c = 0.5 + u01(rng);
        const LatticeParams params(alpha, delta * alpha * p_c * p_c / 2.0, u01(rng), p_c);
        const DerivedParams d = derive_params(params);
        CAPTURE(delta);
        CHECK(oracle::integrate_line([&](double p) { return tsallis_density(p, d); }) ==
              doctest::Approx(1.0).epsilon(1e-10));
        for (double p : {-7.0, -1.3, 0.2, 0.9, 3.0, 40.0}) {
            const double h = 1e-5 * std::max(1.0, std::abs(p));
            const double w = tsallis_density(p, d);
            const double w_p = (tsallis_density(p + h, d) - tsallis_density(p - h, d)) / (2.0 * h);
            const Coefficients c = eval_coefficients(p, params);
            CHECK(std::abs(c.h * w - c.g * w_p) <= 1e-8 * (std::abs(c.h * w) + 1e-300));
        }
    }
}

TEST_CASE("mu form agrees with log1p form") {
    const DerivedParams d = derive_params(kRef);
    for (double p : {0.0, 0.3, 1.0, 5.0, 100.0, 1e4}) {
        CHECK(rel(tsallis_density_mu_form(p, d), tsallis_density(p, d)) < 1e-12);
    }
}

TEST_CASE("second moment of w0") {
    const DerivedParams d = derive_params(kRef);
    CHECK(stationary_second_moment(d) == doctest::Approx(6.0 / 7.0).epsilon(1e-14));
    const double m2 = oracle::integrate_line([&](double p) { return p * p * tsallis_density(p, d); });
    CHECK(rel(m2, 6.0 / 7.0) < 1e-9);

    const DerivedParams heavy = derive_params(LatticeParams(1.0, 0.4, 0.5, 1.0));
    CHECK(heavy.q() == doctest::Approx(1.8));
    CHECK_THROWS_AS((void)stationary_second_moment(heavy), ValidationError);
}

TEST_CASE("tail mass") {
    const DerivedParams d = derive_params(kRef);
    for (double cut : {0.5, 3.0, 20.0, 200.0}) {
        using boost::math::quadrature::gauss_kronrod;
        const double tail = 2.0 * gauss_kronrod<double, 61>::integrate(
                                      [&](double p) { return tsallis_density(p, d); }, cut,
                                      std::numeric_limits<double>::infinity(), 12, 1e-13);
        CAPTURE(cut);
        CHECK(rel(stationary_tail_mass(d, cut), tail) < 1e-9);
    }
}

TEST_CASE("coefficient derivatives against differences") {
    const LatticeParams params(1.3, 0.2, 0.7, 0.8);
    for (double p : {-3.0, -0.4, 0.0, 0.25, 1.1, 9.0}) {
        const double h = 1e-4;
        auto c = [&](double x) { return eval_coefficients(x, params); };
        const CoefficientDerivatives dv = eval_coefficient_derivatives(p, params);
        CHECK(dv.dh == doctest::Approx((c(p + h).h - c(p - h).h) / (2 * h)).epsilon(1e-7));
        CHECK(dv.dg == doctest::Approx((c(p + h).g - c(p - h).g) / (2 * h)).epsilon(1e-7));
        CHECK(dv.d2h == doctest::Approx((c(p + h).h - 2 * c(p).h + c(p - h).h) / (h * h)).epsilon(1e-5));
        CHECK(dv.d2g == doctest::Approx((c(p + h).g - 2 * c(p).g + c(p - h).g) / (h * h)).epsilon(1e-5));
    }
}

TEST_CASE("parameter validation") {
    CHECK(message_of([] { LatticeParams(0.0, 0.1, 0.5, 1.0); }).find("alpha > 0") != std::string::npos);
    CHECK(message_of([] { LatticeParams(1.0, 0.0, 0.5, 1.0); }).find("gamma0 > 0") != std::string::npos);
    CHECK(message_of([] { LatticeParams(1.0, 0.1, -1.0, 1.0); }).find("gamma1 >= 0 required") != std::string::npos);
    CHECK(message_of([] { LatticeParams(1.0, 0.1, 0.5, 0.0); }).find("p_c > 0") != std::string::npos);
    CHECK_THROWS_AS(LatticeParams(std::nan(""), 0.1, 0.5, 1.0), ValidationError);

    // q = 4: delta = 3
    const LatticeParams q4(1.0, 1.5, 0.5, 1.0);
    CHECK(message_of([&] { (void)derive_params(q4); }).find("physical range") != std::string::npos);
    CHECK_THROWS_AS((void)derive_params(q4), ValidationError);
}

TEST_CASE("regime classification") {
    CHECK(classify_regime(1.2) == Regime::NormalDiffusion);
    CHECK(classify_regime(1.8) == Regime::AnomalousDiffusion);
    CHECK(classify_regime(3.5) == Regime::NonNormalizable);
    CHECK(classify_regime(5.0 / 3.0) == Regime::BoundaryAnomalousOnset);
    CHECK(classify_regime(3.0) == Regime::BoundaryNormalizability);
    CHECK(classify_regime(5.0 / 3.0 * (1 + 1e-9)) == Regime::AnomalousDiffusion);
    CHECK_THROWS_AS((void)classify_regime(1.0), ValidationError);
    CHECK(to_string(Regime::NormalDiffusion) == "NormalDiffusion");
}

TEST_CASE("Gaussian limit") {
    const GaussianLimit g(1.0, 0.5);
    CHECK(g.beta() == doctest::Approx(1.0));
    CHECK(oracle::integrate_line([&](double p) { return g.density(p); }) == doctest::Approx(1.0).epsilon(1e-12));
    // Small gamma0 approaches the Gaussian pointwise.
    const DerivedParams d = derive_params(LatticeParams(1.0, 1e-7, 0.5, 1.0));
    for (double p : {0.0, 0.5, 1.5, 3.0}) {
        CHECK(tsallis_density(p, d) == doctest::Approx(g.density(p)).epsilon(1e-5));
    }
}
