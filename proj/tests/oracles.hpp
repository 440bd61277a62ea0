// Test-only oracles, independent of the library implementations they check.
#ifndef FLAB_TESTS_ORACLES_HPP
#define FLAB_TESTS_ORACLES_HPP

#include <array>
#include <cmath>
#include <functional>

namespace oracles {

// Plain recursive Simpson, no shared code with the library quadrature.
inline double simpson(const std::function<double(double)>& f, double a,
                      double b, int depth = 24, double tol = 1e-13) {
    const double m = 0.5 * (a + b);
    auto s = [&](double x0, double x1) {
        return (x1 - x0) / 6.0 * (f(x0) + 4.0 * f(0.5 * (x0 + x1)) + f(x1));
    };
    const double whole = s(a, b);
    const double halves = s(a, m) + s(m, b);
    if (depth <= 0 || std::fabs(whole - halves) < tol)
        return halves + (halves - whole) / 15.0;
    return simpson(f, a, m, depth - 1, tol / 2.0) +
           simpson(f, m, b, depth - 1, tol / 2.0);
}

// Brute-force backward Euler solve of the 3-cell Neumann system
//   U_i - a_i - dt * (phi(U_nb) - deg_i * phi(U_i)) / h^2 = 0
// by nested bisection, to ~1e-12. Monotonicity of each scalar equation in
// its own unknown makes every bisection safe.
inline std::array<double, 3> backward_euler_3cell(
    const std::function<double(double)>& phi, std::array<double, 3> a,
    double dt, double h) {
    const double c = dt / (h * h);
    auto solve_end = [&](double rhs) {
        // x + c*phi(x) = rhs
        double lo = -64.0, hi = 64.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (mid + c * phi(mid) < rhs ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    auto middle_residual = [&](double u1) {
        const double u0 = solve_end(a[0] + c * phi(u1));
        const double u2 = solve_end(a[2] + c * phi(u1));
        return u1 - a[1] - c * (phi(u0) - 2.0 * phi(u1) + phi(u2));
    };
    double lo = -64.0, hi = 64.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (middle_residual(mid) < 0.0 ? lo : hi) = mid;
    }
    const double u1 = 0.5 * (lo + hi);
    return {solve_end(a[0] + c * phi(u1)), u1, solve_end(a[2] + c * phi(u1))};
}

}  // namespace oracles

#endif
