#include "flab/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace flab {

namespace {

void check_finite(double u) {
    if (!std::isfinite(u)) throw std::domain_error("phi: non-finite argument");
}

// Unscaled odd base value at x = |u| >= 0.
double base_abs(const Nonlinearity& nl, double x) {
    if (nl.kind == PhiKind::PurePower) return std::pow(x, nl.m);
    if (x <= nl.a) return std::pow(x, nl.m1);
    if (x >= nl.b) return std::pow(x, nl.m2);
    return nl.bridge.eval(x - nl.a);
}

double base_abs_deriv(const Nonlinearity& nl, double x) {
    if (nl.kind == PhiKind::PurePower)
        return x == 0.0 ? (nl.m > 1.0 ? 0.0 : nl.m) : nl.m * std::pow(x, nl.m - 1.0);
    if (x <= nl.a) return x == 0.0 ? 0.0 : nl.m1 * std::pow(x, nl.m1 - 1.0);
    if (x >= nl.b) return nl.m2 * std::pow(x, nl.m2 - 1.0);
    return nl.bridge.deriv(x - nl.a);
}

// Unscaled primitive at x = |u| >= 0.
double base_abs_psi(const Nonlinearity& nl, double x) {
    if (nl.kind == PhiKind::PurePower) return std::pow(x, nl.m + 1.0) / (nl.m + 1.0);
    if (x <= nl.a) return std::pow(x, nl.m1 + 1.0) / (nl.m1 + 1.0);
    if (x < nl.b) return nl.psi_a + nl.bridge.integral(x - nl.a);
    return nl.psi_b +
           (std::pow(x, nl.m2 + 1.0) - std::pow(nl.b, nl.m2 + 1.0)) / (nl.m2 + 1.0);
}

// Strict positivity of the bridge derivative on [0, len]: the derivative is
// a quadratic, so endpoints plus an interior vertex decide.
bool bridge_monotone(const BridgeCubic& c, double len) {
    if (c.deriv(0.0) <= 0.0 || c.deriv(len) <= 0.0) return false;
    if (c.c3 != 0.0) {
        const double s_v = -c.c2 / (3.0 * c.c3);
        if (s_v > 0.0 && s_v < len && c.deriv(s_v) <= 0.0) return false;
    } else if (c.c2 != 0.0) {
        // derivative linear: endpoint signs already settle it
    }
    return true;
}

BridgeCubic hermite_bridge(double fa, double da, double fb, double db,
                           double len) {
    const double slope = (fb - fa) / len;
    BridgeCubic c;
    c.c0 = fa;
    c.c1 = da;
    c.c2 = (3.0 * slope - 2.0 * da - db) / len;
    c.c3 = (da + db - 2.0 * slope) / (len * len);
    return c;
}

}  // namespace

Nonlinearity Nonlinearity::pure_power(double m, double scale) {
    if (!(m > 1.0)) throw std::invalid_argument("pure_power: m must exceed 1");
    if (!(scale > 0.0)) throw std::invalid_argument("pure_power: scale must be positive");
    Nonlinearity nl;
    nl.kind = PhiKind::PurePower;
    nl.m = m;
    nl.m1 = nl.m2 = m;
    nl.scale = scale;
    return nl;
}

Nonlinearity build_two_power(double m1, double m2, double a, double b,
                             double scale) {
    if (!(m1 > 1.0)) throw std::invalid_argument("build_two_power: m1 must exceed 1");
    if (!(m2 > 1.0)) throw std::invalid_argument("build_two_power: m2 must exceed 1");
    if (!(a > 0.0 && a < 1.0 && b > 1.0))
        throw std::invalid_argument("build_two_power: need 0 < a < 1 < b");
    if (!(scale > 0.0)) throw std::invalid_argument("build_two_power: scale must be positive");

    Nonlinearity nl;
    nl.kind = PhiKind::TwoPower;
    nl.m = m2;
    nl.m1 = m1;
    nl.m2 = m2;
    nl.a = a;
    nl.b = b;
    nl.scale = scale;

    const double fa = std::pow(a, m1), da = m1 * std::pow(a, m1 - 1.0);
    const double fb = std::pow(b, m2), db = m2 * std::pow(b, m2 - 1.0);
    const double len = b - a;
    nl.bridge = hermite_bridge(fa, da, fb, db, len);

    if (!bridge_monotone(nl.bridge, len)) {
        // limit endpoint derivatives to three secant slopes (Fritsch-Carlson)
        const double slope = (fb - fa) / len;
        const double da_c = std::min(da, 3.0 * slope);
        const double db_c = std::min(db, 3.0 * slope);
        nl.bridge = hermite_bridge(fa, da_c, fb, db_c, len);
        nl.clamped = true;
        if (!bridge_monotone(nl.bridge, len))
            throw std::runtime_error(
                "build_two_power: monotone bridge unobtainable on [" +
                std::to_string(a) + ", " + std::to_string(b) + "]");
    }

    nl.psi_a = std::pow(a, m1 + 1.0) / (m1 + 1.0);
    nl.psi_b = nl.psi_a + nl.bridge.integral(len);
    return nl;
}

double phi(const Nonlinearity& nl, double u) {
    check_finite(u);
    const double v = base_abs(nl, std::fabs(u));
    return nl.scale * std::copysign(v, u);
}

double phi_prime(const Nonlinearity& nl, double u) {
    check_finite(u);
    return nl.scale * base_abs_deriv(nl, std::fabs(u));
}

double psi(const Nonlinearity& nl, double u) {
    check_finite(u);
    return nl.scale * base_abs_psi(nl, std::fabs(u));
}

GrowthReport verify_growth_conditions(const Nonlinearity& nl, double m1,
                                      double m2, double u_max, int n) {
    if (!(u_max > 1.0))
        throw std::invalid_argument("verify_growth_conditions: u_max must exceed 1");
    if (n < 100)
        throw std::invalid_argument("verify_growth_conditions: need n >= 100");

    GrowthReport rep;
    // c1: log-spaced |u| over (0, 1]
    const double lo = 1e-8;
    double c1 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double u = lo * std::pow(1.0 / lo, double(i) / double(n - 1));
        const double ratio = phi_prime(nl, u) / std::pow(u, m1 - 1.0);
        if (!std::isfinite(ratio)) return rep;
        c1 = std::min(c1, ratio);
    }
    // c2: geometric samples over (1, u_max]
    double c2 = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= n; ++i) {
        const double u = std::pow(u_max, double(i) / double(n));
        const double ratio = phi_prime(nl, u) / std::pow(u, m2 - 1.0);
        if (!std::isfinite(ratio)) return rep;
        c2 = std::min(c2, ratio);
    }
    rep.c1_best = c1;
    rep.c2_best = c2;
    rep.ok = c1 > 0.0 && c2 > 0.0;
    return rep;
}

std::string describe(const Nonlinearity& nl) {
    char buf[160];
    if (nl.kind == PhiKind::PurePower) {
        std::snprintf(buf, sizeof buf, "pure-power m=%g scale=%g", nl.m, nl.scale);
    } else {
        std::snprintf(buf, sizeof buf, "two-power m1=%g m2=%g a=%g b=%g scale=%g%s",
                      nl.m1, nl.m2, nl.a, nl.b, nl.scale,
                      nl.clamped ? " (clamped bridge)" : "");
    }
    return buf;
}

}  // namespace flab
