#ifndef FLAB_NONLINEARITY_HPP
#define FLAB_NONLINEARITY_HPP

#include <stdexcept>
#include <string>

namespace flab {

enum class PhiKind { PurePower, TwoPower };

// Cubic bridge segment c0 + c1*s + c2*s^2 + c3*s^3 with s = u - a,
// joining the two power branches of a TwoPower nonlinearity on [a, b].
struct BridgeCubic {
    double c0 = 0.0, c1 = 0.0, c2 = 0.0, c3 = 0.0;

    double eval(double s) const { return c0 + s * (c1 + s * (c2 + s * c3)); }
    double deriv(double s) const { return c1 + s * (2.0 * c2 + s * 3.0 * c3); }
    // integral of eval from 0 to s
    double integral(double s) const {
        return s * (c0 + s * (c1 / 2.0 + s * (c2 / 3.0 + s * c3 / 4.0)));
    }
};

// Diffusion nonlinearity phi. Built-ins are odd extensions of increasing
// power laws: phi(u) = sgn(u)|u|^m, either a single power or a two-power
// splice that is |u|^{m1-1}u near zero and |u|^{m2-1}u for large |u|,
// bridged by a monotone cubic on [a, b]. `scale` multiplies everything.
// Values are immutable after construction.
struct Nonlinearity {
    PhiKind kind = PhiKind::PurePower;
    double m = 2.0;              // PurePower exponent
    double m1 = 2.0, m2 = 2.0;   // TwoPower exponents (small / large |u|)
    double a = 0.5, b = 2.0;     // splice interval, 0 < a < 1 < b
    double scale = 1.0;
    BridgeCubic bridge;          // valid for TwoPower only
    double psi_a = 0.0, psi_b = 0.0;  // unscaled primitive at the joins
    bool clamped = false;        // bridge derivatives were monotonicity-limited

    static Nonlinearity pure_power(double m, double scale = 1.0);
};

// Builds the two-power splice. The bridge is a cubic Hermite interpolant of
// the power branches; if that cubic fails strict monotonicity its endpoint
// derivatives are clamped to 3x the secant slope and the check is repeated.
Nonlinearity build_two_power(double m1, double m2, double a = 0.5,
                             double b = 2.0, double scale = 1.0);

double phi(const Nonlinearity& nl, double u);
double phi_prime(const Nonlinearity& nl, double u);
// psi(u) = \int_0^u phi(v) dv, exact on every piece.
double psi(const Nonlinearity& nl, double u);

struct GrowthReport {
    double c1_best = 0.0;  // min of phi'(u)/|u|^{m1-1} over sampled |u| in (0,1]
    double c2_best = 0.0;  // min of phi'(u)/|u|^{m2-1} over sampled |u| in (1,u_max]
    bool ok = false;
};

GrowthReport verify_growth_conditions(const Nonlinearity& nl, double m1,
                                      double m2, double u_max, int n);

// One-line parameter summary, e.g. "two-power m1=3 m2=2 a=0.5 b=2 scale=1".
std::string describe(const Nonlinearity& nl);

}  // namespace flab

#endif
