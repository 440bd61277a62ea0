#ifndef FLAB_REFERENCE_HPP
#define FLAB_REFERENCE_HPP

#include <array>
#include <functional>

#include "flab/mesh.hpp"

namespace flab {

using Point = std::array<double, 2>;
using SpaceTimeFn = std::function<double(Point, double)>;

// Exact self-similar source solution of u_t = (u^m)_xx on free space:
//   u(x,t) = t^{-alpha} (C - kappa |x-x0|^2 t^{-2 beta})_+^{1/(m-1)}.
struct ZkbProfile {
    double m = 2.0;
    int N = 1;
    double mass = 1.0;
    Point x0{0.0, 0.0};
    double alpha = 0.0;  // N / (N(m-1) + 2)
    double beta = 0.0;   // 1 / (N(m-1) + 2)
    double kappa = 0.0;  // (m-1) beta / (2m)
    double C = 0.0;      // mass normalization constant
};

struct ZkbExponents {
    double alpha = 0.0, beta = 0.0, kappa = 0.0;
};

ZkbExponents zkb_exponents(double m, int N);

// C such that the free-space profile integral equals `mass`, by bisection
// on the quadrature of the profile.
double zkb_normalize(double m, int N, double mass);

// Beta-function closed form of the same constant (1D); independent route.
double zkb_normalize_closed_form_1d(double m, double mass);

// Free-space integral of (C - kappa |x|^2)_+^{1/(m-1)} by quadrature.
double zkb_profile_integral(double m, int N, double kappa, double C);

ZkbProfile make_zkb(double m, int N, double mass, Point x0 = {0.0, 0.0});
// Same profile with the normalization constant given directly; mass derived.
ZkbProfile make_zkb_from_C(double m, int N, double C, Point x0 = {0.0, 0.0});

double zkb_eval(const ZkbProfile& p, Point x, double t);
double zkb_support_radius(const ZkbProfile& p, double t);
double zkb_peak(const ZkbProfile& p, double t);

enum class BumpShape { QuadraticCap, CosineCap };

// Compactly supported bump with exact discrete mass after one
// multiplicative renormalization; a mollified point source.
Field delta_like(MeshPtr mesh, Point x0, double width, double mass,
                 BumpShape shape = BumpShape::QuadraticCap);

// Cellwise max of p_star at time tau and p_ell at time tau + t0. The field
// timestamp is tau.
Field glued_datum(MeshPtr mesh, const ZkbProfile& p_star,
                  const ZkbProfile& p_ell, double tau, double t0);

// (x,t) -> f(x0 + lambda (x - x0), lambda^2 (t + tau)).
SpaceTimeFn parabolic_rescale(SpaceTimeFn f, double lambda, double tau,
                              Point x0);

// (x,t) -> f(x0 + alpha^{-1/N} (x - x0), alpha^{-2/N} t); scales mass by
// alpha in dimension N.
SpaceTimeFn mass_rescale(SpaceTimeFn f, double alpha, int N, Point x0);

}  // namespace flab

#endif
