#include "lattice_lab/symmetry.hpp"

#include "lattice_lab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace lattice_lab {

namespace {

// xi(p), tau(t), phi(p, w) and the partial derivatives the second
// prolongation needs. xi depends on p only and tau on t only, so mixed
// terms such as D_p tau vanish identically.
struct GeneratorPartials {
    double xi, dxi, d2xi;
    double tau, dtau;
    double phi, phi_p, phi_w, phi_pp, phi_pw, phi_ww;
};

GeneratorPartials partials(double p, double t, double w, const GeneratorSpec& gen) {
    const double nu = gen.nu;
    const double de = gen.delta;
    const double wd = std::pow(w, de);
    const double q = 1.0 + de;
    GeneratorPartials g{};
    g.xi = -p;
    g.dxi = -1.0;
    g.d2xi = 0.0;
    g.tau = gen.sigma * t;
    g.dtau = gen.sigma;
    g.phi = nu * p * p * w * wd;
    g.phi_p = 2.0 * nu * p * w * wd;
    g.phi_w = nu * q * p * p * wd;
    g.phi_pp = 2.0 * nu * w * wd;
    g.phi_pw = 2.0 * nu * q * p * wd;
    g.phi_ww = nu * q * de * p * p * std::pow(w, de - 1.0);
    return g;
}

ProlongedCoeffs prolong(const JetPoint& j, const GeneratorPartials& g) {
    ProlongedCoeffs out;
    // D_p xi = xi', D_t xi = 0, D_p tau = 0, D_t tau = tau'.
    out.psi_p = g.phi_p + g.phi_w * j.w_p - j.w_p * g.dxi;
    out.psi_t = g.phi_w * j.w_t - j.w_t * g.dtau;
    const double dp_psi_p = g.phi_pp + 2.0 * g.phi_pw * j.w_p + g.phi_ww * j.w_p * j.w_p +
                            g.phi_w * j.w_pp - j.w_pp * g.dxi - j.w_p * g.d2xi;
    out.psi_pp = dp_psi_p - j.w_pp * g.dxi;
    return out;
}

// F = g w_pp + b1 w_p + b0 w with b1 = g' - h and b0 = -h'.
struct RhsPartials {
    double F, F_p, F_w, F_wp, F_wpp;
};

RhsPartials rhs_partials(double p, double w, double w_p, double w_pp, const LatticeParams& params) {
    const Coefficients c = eval_coefficients(p, params);
    const CoefficientDerivatives d = eval_coefficient_derivatives(p, params);
    const double b1 = d.dg - c.h;
    const double b0 = -d.dh;
    const double db1 = d.d2g - d.dh;
    const double db0 = -d.d2h;
    return {
        c.g * w_pp + b1 * w_p + b0 * w,
        d.dg * w_pp + db1 * w_p + db0 * w,
        b0,
        b1,
        c.g,
    };
}

void require_positive_density(double w, const char* where) {
    if (!(w > 0.0) || !std::isfinite(w)) {
        std::ostringstream os;
        os << where << ": density w = " << w << " must be positive and finite";
        throw ValidationError(os.str());
    }
}

}  // namespace

double generator_variation(const JetPoint& jet, const GeneratorSpec& gen) {
    const double phi = gen.nu * jet.p * jet.p * std::pow(jet.w, 1.0 + gen.delta);
    const double xi = -jet.p;
    const double tau = gen.sigma * jet.t;
    return phi - jet.w_p * xi - jet.w_t * tau;
}

InvarianceResidual invariance_residual(const Field& w, const DerivedParams& d) {
    const auto p = w.grid.centers();
    const auto& v = w.values;
    const double inv2dp = 0.5 / w.grid.dp();
    InvarianceResidual out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0)) {
            out.nonpositive_cells.push_back(i);
        }
    }
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        if (!(v[i] > 0.0)) {
            continue;
        }
        const double wp = (v[i + 1] - v[i - 1]) * inv2dp;
        const double r = std::abs(d.nu() * p[i] * p[i] * std::pow(v[i], d.q()) + p[i] * wp);
        if (r > out.sup_norm) {
            out.sup_norm = r;
            out.argmax = i;
        }
    }
    return out;
}

std::optional<double> flow_blowup_parameter(double p0, double w0, const GeneratorSpec& gen) {
    // Bracket 1 - c (1 - e^(-2s)) vanishes at e^(-2s) = 1 - 1/c.
    const double c = 0.5 * gen.nu * gen.delta * p0 * p0 * std::pow(w0, gen.delta);
    if (c > 1.0 || c < 0.0) {
        return -0.5 * std::log1p(-1.0 / c);
    }
    return std::nullopt;
}

FlowPoint flow_map(double p0, double w0, double s, const GeneratorSpec& gen) {
    const double ps = std::exp(-s) * p0;
    const double one_minus = -std::expm1(-2.0 * s);
    if (gen.delta == 0.0) {
        return {ps, w0 * std::exp(0.5 * gen.nu * p0 * p0 * one_minus)};
    }
    const double c = 0.5 * gen.nu * gen.delta * p0 * p0 * std::pow(w0, gen.delta);
    const double shift = -c * one_minus;
    if (!(shift > -1.0)) {
        const double s_star = -0.5 * std::log1p(-1.0 / c);
        std::ostringstream os;
        os << "flow blows up before s = " << s << " (critical s* = " << s_star << ")";
        throw FlowBlowUp(os.str(), s_star);
    }
    return {ps, w0 * std::exp(-std::log1p(shift) / gen.delta)};
}

double flow_time(double t0, double s, const GeneratorSpec& gen) noexcept {
    return std::exp(gen.sigma * s) * t0;
}

ProlongedCoeffs prolong_coeffs(const JetPoint& jet, const GeneratorSpec& gen) {
    return prolong(jet, partials(jet.p, jet.t, jet.w, gen));
}

double fpe_rhs(double p, double w, double w_p, double w_pp, const LatticeParams& params) {
    return rhs_partials(p, w, w_p, w_pp, params).F;
}

double determining_residual(const JetPoint& jet, const LatticeParams& params, const GeneratorSpec& gen) {
    const RhsPartials f = rhs_partials(jet.p, jet.w, jet.w_p, jet.w_pp, params);
    JetPoint on_shell = jet;
    on_shell.w_t = f.F;
    const GeneratorPartials g = partials(jet.p, jet.t, jet.w, gen);
    const ProlongedCoeffs psi = prolong(on_shell, g);
    // Y(w_t - F); F has no explicit t dependence.
    return psi.psi_t - (g.xi * f.F_p + g.phi * f.F_w + psi.psi_p * f.F_wp + psi.psi_pp * f.F_wpp);
}

ResidualCoeffs extract_A(double p, double t, double w, const LatticeParams& params, const GeneratorSpec& gen) {
    require_positive_density(w, "extract_A");
    // Sample steps sized like w_p and w_pp on a power-law tail, which keeps
    // every term of the residual at a comparable magnitude for large |p|.
    const double s1 = w / (1.0 + std::abs(p));
    const double s2 = w / (1.0 + p * p);
    auto residual = [&](double w_p, double w_pp) {
        return determining_residual({p, t, w, w_p, 0.0, w_pp}, params, gen);
    };
    const double r0 = residual(0.0, 0.0);
    const double rp = residual(s1, 0.0);
    const double rm = residual(-s1, 0.0);
    ResidualCoeffs out;
    out.a0 = r0;
    out.a1 = (rp - rm) / (2.0 * s1);
    out.a11 = (rp + rm - 2.0 * r0) / (2.0 * s1 * s1);
    out.a2 = (residual(0.0, s2) - r0) / s2;
    return out;
}

double closed_A2(double p, const LatticeParams& params, double sigma) {
    const double pc2 = params.p_c() * params.p_c();
    const double p2 = p * p;
    const double den = (pc2 + p2) * (pc2 + p2);
    return -params.gamma0() * (2.0 + sigma) -
           params.gamma1() * pc2 * (pc2 * (2.0 + sigma) + (4.0 + sigma) * p2) / den;
}

ResidualCoeffs closed_A(double p, double w, const LatticeParams& params, const GeneratorSpec& gen,
                        ClosedFormVariant variant) {
    if (gen.sigma != -2.0) {
        std::ostringstream os;
        os << "closed-form A0 and A1 exist only at sigma = -2 (got sigma = " << gen.sigma << ")";
        throw ValidationError(os.str());
    }
    const double al = params.alpha();
    const double g0 = params.gamma0();
    const double g1 = params.gamma1();
    const double pc2 = params.p_c() * params.p_c();
    const double pc4 = pc2 * pc2;
    const double p2 = p * p;
    const double de = gen.delta;
    const double nu = gen.nu;
    const double nw = nu * std::pow(w, de);
    const double s = pc2 + p2;
    const double s3 = s * s * s;
    const double inner = variant == ClosedFormVariant::Repaired ? s : pc2 + w * w;

    ResidualCoeffs out;
    out.a2 = closed_A2(p, params, gen.sigma);
    out.a1 = 2.0 * p *
             (s * (al * pc4 - 2.0 * (1.0 + de) * g0 * nw * inner * inner) -
              2.0 * g1 * pc2 *
                  ((1.0 + de) * nw * pc4 + p2 * (-1.0 + nw * p2 + de * nw * p2) +
                   pc2 * (1.0 + 2.0 * nw * p2 + 2.0 * de * nw * p2))) /
             s3;
    out.a0 = w *
             (-2.0 * nw * s * (g1 * pc2 * (pc2 - p2) + g0 * s * s) +
              al * pc2 *
                  (-(2.0 + de) * nw * p2 * p2 * p2 - 2.0 * pc2 * p2 * (3.0 + 2.0 * nw * p2) +
                   pc4 * (2.0 - 2.0 * nw * p2 + de * nw * p2))) /
             s3;
    out.a11 = -de * (1.0 + de) * nu * p2 * std::pow(w, de - 1.0) * eval_coefficients(p, params).g;
    return out;
}

ResidualCoeffs closed_A(double p, double w, const LatticeParams& params, double sigma,
                        ClosedFormVariant variant) {
    return closed_A(p, w, params, GeneratorSpec::canonical(derive_params(params), sigma), variant);
}

Profile Profile::tsallis(const DerivedParams& d) {
    const double a = d.beta() * d.delta();
    const double beta = d.beta();
    return {
        "tsallis",
        [d](double p) { return tsallis_density(p, d); },
        [d, a, beta](double p) { return -2.0 * beta * p / (1.0 + a * p * p) * tsallis_density(p, d); },
    };
}

Profile Profile::power_law(double C, double k) {
    if (!(C > 0.0) || !(k > 0.0)) {
        throw ValidationError("power-law profile needs C > 0 and k > 0");
    }
    std::ostringstream name;
    name << "power_law(C=" << C << ",k=" << k << ")";
    return {
        name.str(),
        [C, k](double p) { return C * std::pow(1.0 + p * p, -k); },
        [C, k](double p) { return -2.0 * k * p * C * std::pow(1.0 + p * p, -k - 1.0); },
    };
}

Profile Profile::from_field(const Field& field) {
    std::vector<double> lp;
    std::vector<double> lw;
    const auto c = field.grid.centers();
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i] > 0.0 && field.values[i] > 0.0) {
            lp.push_back(std::log(c[i]));
            lw.push_back(std::log(field.values[i]));
        }
    }
    if (lp.size() < 2) {
        throw ValidationError("field has fewer than two positive samples at p > 0");
    }
    auto slope_at = [lp, lw](double x) {
        const auto it = std::upper_bound(lp.begin(), lp.end(), x);
        std::size_t hi = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - lp.begin(), 1,
                                                                             static_cast<std::ptrdiff_t>(lp.size() - 1)));
        const std::size_t lo = hi - 1;
        const double m = (lw[hi] - lw[lo]) / (lp[hi] - lp[lo]);
        return std::pair{m, lw[lo] + m * (x - lp[lo])};
    };
    return {
        "field",
        [slope_at](double p) { return std::exp(slope_at(std::log(std::abs(p))).second); },
        [slope_at](double p) {
            const auto [m, lv] = slope_at(std::log(std::abs(p)));
            return m * std::exp(lv) / p;
        },
    };
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

namespace {

double log_log_slope(const std::vector<DecayRow>& rows, double DecayRow::*field) {
    std::vector<double> x;
    std::vector<double> y;
    for (const auto& r : rows) {
        const double v = r.*field;
        if (v > 0.0 && std::isfinite(v)) {
            x.push_back(std::log(r.p));
            y.push_back(std::log(v));
        }
    }
    if (x.size() < 2) {
        // Identically zero along the ladder.
        return -std::numeric_limits<double>::infinity();
    }
    return fit_slope(x, y);
}

}  // namespace

DecayReport asymptotic_scan(const LatticeParams& params, const GeneratorSpec& gen, const Profile& profile,
                            const ScanOptions& options) {
    if (!(options.p_min > 0.0) || !(options.p_max > options.p_min) || options.points_per_decade < 1) {
        throw ValidationError("scan ladder needs 0 < p_min < p_max and points_per_decade >= 1");
    }
    const double decades = std::log10(options.p_max / options.p_min);
    const int steps = static_cast<int>(std::lround(decades * options.points_per_decade));

    DecayReport report;
    report.sigma = gen.sigma;
    report.profile = profile.name;
    std::vector<double> lp;
    std::vector<double> lw;
    double prev_w = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= steps; ++j) {
        const double p = j == steps ? options.p_max
                                    : options.p_min * std::pow(10.0, static_cast<double>(j) / options.points_per_decade);
        const double w = profile.value(p);
        if (!(w > 0.0) || !std::isfinite(w)) {
            std::ostringstream os;
            os << "profile '" << profile.name << "' is not positive at p = " << p;
            throw ValidationError(os.str());
        }
        if (!(w < prev_w)) {
            std::ostringstream os;
            os << "profile '" << profile.name << "' does not decay at p = " << p
               << " (|w| -> 0 as |p| -> infinity required)";
            throw ValidationError(os.str());
        }
        prev_w = w;
        lp.push_back(std::log(p));
        lw.push_back(std::log(w));

        double w_p = 0.0;
        if (profile.derivative) {
            w_p = profile.derivative(p);
        } else {
            const double h = 1e-4 * p;
            w_p = (profile.value(p + h) - profile.value(p - h)) / (2.0 * h);
        }
        const ResidualCoeffs a = extract_A(p, options.t, w, params, gen);
        report.rows.push_back({p, std::abs(a.a0), std::abs(a.a1), std::abs(a.a2), std::abs(a.a11 * w_p * w_p)});
    }
    if (!(fit_slope(lp, lw) < 0.0)) {
        throw ValidationError("profile '" + profile.name + "' has a non-decaying tail");
    }
    report.slope_a0 = log_log_slope(report.rows, &DecayRow::abs_a0);
    report.slope_a1 = log_log_slope(report.rows, &DecayRow::abs_a1);
    report.slope_a2 = log_log_slope(report.rows, &DecayRow::abs_a2);
    report.slope_quadratic = log_log_slope(report.rows, &DecayRow::abs_quadratic);
    report.a2_at_pmax = extract_A(options.p_max, options.t, profile.value(options.p_max), params, gen).a2;
    report.a2_plateau_expected = -params.gamma0() * (2.0 + gen.sigma);
    report.a2_vanishes = std::abs(report.a2_at_pmax) < 1e-8;
    report.all_decay = report.slope_a0 < 0.0 && report.slope_a1 < 0.0 && report.slope_a2 < 0.0;
    return report;
}

AdaptedPoint to_adapted(double p, double t, double w, const GeneratorSpec& gen) {
    if (!(t > 0.0)) {
        throw ValidationError("adapted coordinates need t > 0");
    }
    require_positive_density(w, "to_adapted");
    return {p * p / t, t, std::pow(w, -gen.delta) - 0.5 * gen.nu * gen.delta * p * p, p < 0.0 ? -1 : 1};
}

AdaptedPoint to_adapted(double p, double t, double w, const DerivedParams& d) {
    return to_adapted(p, t, w, GeneratorSpec::canonical(d));
}

PhysicalPoint from_adapted(const AdaptedPoint& a, const GeneratorSpec& gen) {
    if (!(a.sigma_c > 0.0)) {
        throw ValidationError("adapted coordinates need sigma_c = t > 0");
    }
    if (!(a.y >= 0.0)) {
        throw ValidationError("adapted coordinate y = p^2/t must be non-negative");
    }
    const double p = static_cast<double>(a.p_sign) * std::sqrt(a.y * a.sigma_c);
    const double base = a.v + 0.5 * gen.nu * gen.delta * p * p;
    if (!(base > 0.0)) {
        throw ValidationError("adapted point maps to a non-positive density");
    }
    return {p, a.sigma_c, std::pow(base, -1.0 / gen.delta)};
}

PhysicalPoint from_adapted(const AdaptedPoint& a, const DerivedParams& d) {
    return from_adapted(a, GeneratorSpec::canonical(d));
}

}  // namespace lattice_lab
