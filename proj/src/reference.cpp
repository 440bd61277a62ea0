#include "flab/reference.hpp"

#include <cmath>
#include <stdexcept>

namespace flab {

namespace {

// Adaptive Simpson; integrands here are smooth after substitution.
double simpson_rec(const std::function<double(double)>& f, double a, double b,
                   double fa, double fm, double fb, double whole, double tol,
                   int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 40);
}

double sq_dist(Point x, Point y, int dim) {
    double d = x[0] - y[0], s = d * d;
    if (dim == 2) {
        d = x[1] - y[1];
        s += d * d;
    }
    return s;
}

}  // namespace

ZkbExponents zkb_exponents(double m, int N) {
    if (!(m > 1.0)) throw std::invalid_argument("zkb_exponents: m must exceed 1");
    if (N != 1 && N != 2) throw std::invalid_argument("zkb_exponents: N must be 1 or 2");
    ZkbExponents e;
    e.beta = 1.0 / (N * (m - 1.0) + 2.0);
    e.alpha = N * e.beta;
    e.kappa = (m - 1.0) * e.beta / (2.0 * m);
    return e;
}

double zkb_profile_integral(double m, int N, double kappa, double C) {
    if (!(C > 0.0)) return 0.0;
    const double p = 1.0 / (m - 1.0);
    const double r0 = std::sqrt(C / kappa);
    if (N == 1) {
        // xi = r0 sin(theta) tames the edge of the support
        auto g = [&](double th) {
            const double c = std::cos(th);
            return std::pow(C * c * c, p) * r0 * c;
        };
        return 2.0 * integrate(g, 0.0, M_PI / 2.0, 1e-14 * std::pow(C, p) * r0);
    }
    // N = 2, radial measure 2 pi rho drho; rho = r0 sin(theta)
    auto g = [&](double th) {
        const double s = std::sin(th), c = std::cos(th);
        return std::pow(C * c * c, p) * r0 * s * r0 * c;
    };
    return 2.0 * M_PI * integrate(g, 0.0, M_PI / 2.0, 1e-14 * std::pow(C, p) * r0 * r0);
}

double zkb_normalize(double m, int N, double mass) {
    if (!(mass > 0.0)) throw std::invalid_argument("zkb_normalize: mass must be positive");
    const ZkbExponents e = zkb_exponents(m, N);
    double lo = 0.0, hi = 1.0;
    int guard = 0;
    while (zkb_profile_integral(m, N, e.kappa, hi) < mass) {
        hi *= 2.0;
        if (++guard > 2000) throw std::runtime_error("zkb_normalize: bracket failure");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (zkb_profile_integral(m, N, e.kappa, mid) < mass)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-10 * hi) break;
    }
    return 0.5 * (lo + hi);
}

double zkb_normalize_closed_form_1d(double m, double mass) {
    if (!(mass > 0.0)) throw std::invalid_argument("zkb_normalize: mass must be positive");
    const ZkbExponents e = zkb_exponents(m, 1);
    const double p = 1.0 / (m - 1.0);
    // mass = C^{p + 1/2} kappa^{-1/2} B(1/2, p + 1)
    const double lbeta = std::lgamma(0.5) + std::lgamma(p + 1.0) - std::lgamma(p + 1.5);
    const double factor = std::exp(-0.5 * std::log(e.kappa) + lbeta);
    return std::pow(mass / factor, 1.0 / (p + 0.5));
}

ZkbProfile make_zkb(double m, int N, double mass, Point x0) {
    ZkbProfile p;
    p.m = m;
    p.N = N;
    p.mass = mass;
    p.x0 = x0;
    const ZkbExponents e = zkb_exponents(m, N);
    p.alpha = e.alpha;
    p.beta = e.beta;
    p.kappa = e.kappa;
    p.C = zkb_normalize(m, N, mass);
    return p;
}

ZkbProfile make_zkb_from_C(double m, int N, double C, Point x0) {
    if (!(C > 0.0)) throw std::invalid_argument("make_zkb_from_C: C must be positive");
    ZkbProfile p;
    p.m = m;
    p.N = N;
    p.x0 = x0;
    const ZkbExponents e = zkb_exponents(m, N);
    p.alpha = e.alpha;
    p.beta = e.beta;
    p.kappa = e.kappa;
    p.C = C;
    p.mass = zkb_profile_integral(m, N, e.kappa, C);
    return p;
}

double zkb_eval(const ZkbProfile& p, Point x, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("zkb_eval: t must be positive");
    const double r2 = sq_dist(x, p.x0, p.N);
    const double arg = p.C - p.kappa * r2 * std::pow(t, -2.0 * p.beta);
    if (arg <= 0.0) return 0.0;
    return std::pow(t, -p.alpha) * std::pow(arg, 1.0 / (p.m - 1.0));
}

double zkb_support_radius(const ZkbProfile& p, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("zkb_support_radius: t must be positive");
    return std::sqrt(p.C / p.kappa) * std::pow(t, p.beta);
}

double zkb_peak(const ZkbProfile& p, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("zkb_peak: t must be positive");
    return std::pow(p.C, 1.0 / (p.m - 1.0)) * std::pow(t, -p.alpha);
}

Field delta_like(MeshPtr mesh, Point x0, double width, double mass,
                 BumpShape shape) {
    const double hmax = std::max(mesh->h[0], mesh->dim == 2 ? mesh->h[1] : 0.0);
    if (!(width >= 2.0 * hmax))
        throw std::invalid_argument("delta_like: width must cover at least two cells");
    for (int ax = 0; ax < mesh->dim; ++ax) {
        if (x0[ax] - width < mesh->origin[ax] ||
            x0[ax] + width > mesh->origin[ax] + mesh->extent[ax])
            throw std::invalid_argument("delta_like: support touches the boundary");
    }
    Field f = project_function(
        mesh,
        [&](Point x) {
            const double r2 = sq_dist(x, x0, mesh->dim) / (width * width);
            if (r2 >= 1.0) return 0.0;
            if (shape == BumpShape::QuadraticCap) return 1.0 - r2;
            return std::cos(0.5 * M_PI * std::sqrt(r2));
        },
        0.0);
    const double got = integral(f);
    if (got == 0.0) throw std::runtime_error("delta_like: empty bump");
    const double c = mass / got;
    for (double& v : f.values) v *= c;
    return f;
}

Field glued_datum(MeshPtr mesh, const ZkbProfile& p_star,
                  const ZkbProfile& p_ell, double tau, double t0) {
    if (!(tau > 0.0) || !(t0 > 0.0))
        throw std::invalid_argument("glued_datum: need tau > 0 and t0 > 0");
    const double r_star = zkb_support_radius(p_star, tau);
    const double r_ell = zkb_support_radius(p_ell, tau + t0);
    for (int ax = 0; ax < mesh->dim; ++ax) {
        const double lo = mesh->origin[ax], hi = lo + mesh->extent[ax];
        if (p_star.x0[ax] - r_star < lo || p_star.x0[ax] + r_star > hi ||
            p_ell.x0[ax] - r_ell < lo || p_ell.x0[ax] + r_ell > hi)
            throw std::invalid_argument("glued_datum: support overflows the box");
    }
    return project_function(
        mesh,
        [&](Point x) {
            return std::max(zkb_eval(p_star, x, tau), zkb_eval(p_ell, x, tau + t0));
        },
        tau);
}

SpaceTimeFn parabolic_rescale(SpaceTimeFn f, double lambda, double tau,
                              Point x0) {
    if (!(lambda > 0.0))
        throw std::invalid_argument("parabolic_rescale: lambda must be positive");
    if (tau < 0.0) throw std::invalid_argument("parabolic_rescale: tau must be >= 0");
    return [f = std::move(f), lambda, tau, x0](Point x, double t) {
        const Point y{x0[0] + lambda * (x[0] - x0[0]),
                      x0[1] + lambda * (x[1] - x0[1])};
        return f(y, lambda * lambda * (t + tau));
    };
}

SpaceTimeFn mass_rescale(SpaceTimeFn f, double alpha, int N, Point x0) {
    if (!(alpha > 0.0))
        throw std::invalid_argument("mass_rescale: alpha must be positive");
    const double lx = std::pow(alpha, -1.0 / N);
    const double lt = std::pow(alpha, -2.0 / N);
    return [f = std::move(f), lx, lt, x0](Point x, double t) {
        const Point y{x0[0] + lx * (x[0] - x0[0]), x0[1] + lx * (x[1] - x0[1])};
        return f(y, lt * t);
    };
}

}  // namespace flab
