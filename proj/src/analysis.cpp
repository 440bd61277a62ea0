#include "flab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace flab {

double lp_norm(const Field& f, double p) {
    if (!(p > 0.0)) throw std::invalid_argument("lp_norm: p must be positive");
    if (std::isinf(p)) {
        double mx = 0.0;
        for (double v : f.values) mx = std::max(mx, std::fabs(v));
        return mx;
    }
    double s = 0.0;
    for (double v : f.values) s += std::pow(std::fabs(v), p);
    return std::pow(f.mesh->cell_volume * s, 1.0 / p);
}

SeriesRecord make_record(const Field& f, const Nonlinearity& nl) {
    SeriesRecord r;
    r.t = f.time;
    const double vol = f.mesh->cell_volume;
    double sum = 0.0, s1 = 0.0, s2 = 0.0, s4 = 0.0, se = 0.0;
    double mn = std::numeric_limits<double>::infinity();
    double mx = -mn, amax = 0.0;
    for (double v : f.values) {
        sum += v;
        const double av = std::fabs(v);
        s1 += av;
        s2 += v * v;
        s4 += v * v * v * v;
        se += psi(nl, v);
        mn = std::min(mn, v);
        mx = std::max(mx, v);
        amax = std::max(amax, av);
    }
    r.mass = vol * sum;
    r.mean = r.mass / f.mesh->measure();
    r.min = mn;
    r.max = mx;
    r.l1 = vol * s1;
    r.l2 = std::sqrt(vol * s2);
    r.l4 = std::pow(vol * s4, 0.25);
    r.linf = amax;
    r.energy_psi = vol * se;
    return r;
}

double theta(double s, double r, int N) {
    if (N < 1) throw std::invalid_argument("theta: N must be positive");
    if (!(s > 0.0) || !std::isfinite(s) || !std::isfinite(r))
        throw std::invalid_argument("theta: need finite s, r > 0");
    if (N <= 2) {
        if (!(s <= r)) throw std::invalid_argument("theta: need s <= r");
    } else {
        const double two_star = 2.0 * N / double(N - 2);
        const bool branch1 = s <= r && r <= two_star;
        const bool branch2 = two_star <= r && r <= s;
        if (!branch1 && !branch2)
            throw std::invalid_argument("theta: (s, r) outside admissible range");
    }
    return 2.0 * N * (r - s) / (r * (2.0 * N - s * double(N - 2)));
}

double moser_p(int k, double q0, int N, double m1) {
    if (k < 0) throw std::invalid_argument("moser_p: k must be >= 0");
    if (!(q0 >= 1.0)) throw std::invalid_argument("moser_p: q0 must be >= 1");
    const double shift = N * (m1 - 1.0) / 2.0;
    const double ratio = double(N + 2) / double(N);
    return (q0 + shift) * std::pow(ratio, k) - shift;
}

double moser_p_recurrence(int k, double q0, int N, double m1) {
    if (k < 0) throw std::invalid_argument("moser_p: k must be >= 0");
    if (!(q0 >= 1.0)) throw std::invalid_argument("moser_p: q0 must be >= 1");
    double p = q0;
    for (int i = 0; i < k; ++i) p = double(N + 2) / double(N) * p + m1 - 1.0;
    return p;
}

RatePrediction predict_rates(double q0, int N, double m1, double m2,
                             double u0_norm_q0, double mean0,
                             const Nonlinearity& nl, double C_P) {
    if (!(q0 >= 1.0)) throw std::invalid_argument("predict_rates: q0 must be >= 1");
    if (!(C_P > 0.0)) throw std::invalid_argument("predict_rates: C_P must be positive");
    RatePrediction p;
    p.q0 = q0;
    p.N = N;
    p.m1 = m1;
    p.m2 = m2;
    p.short_exp = N / (2.0 * q0 + N * (m2 - 1.0));
    p.long_exp = N / (2.0 * q0 + N * (m1 - 1.0));
    p.crossover_t = std::pow(u0_norm_q0, 2.0 * q0 / N);
    p.zero_mean_long_exp = 1.0 / (m1 - 1.0);
    p.zero_mean_short_exp = 1.0 / (m2 - 1.0);
    if (mean0 != 0.0) p.nonzero_mean_rate = phi_prime(nl, mean0) / (C_P * C_P);
    return p;
}

double poincare_constant_box(std::span<const double> extents, int dim) {
    if (dim < 1 || size_t(dim) > extents.size())
        throw std::invalid_argument("poincare_constant_box: bad dim");
    double lmax = 0.0;
    for (int ax = 0; ax < dim; ++ax) {
        if (!(extents[ax] > 0.0))
            throw std::invalid_argument("poincare_constant_box: extent must be positive");
        lmax = std::max(lmax, extents[ax]);
    }
    // lowest nonzero Neumann mode lives along the longest side
    return lmax / M_PI;
}

namespace {

// Discrete Neumann Laplacian (positive semidefinite): (A w)_i =
// sum over interior faces of (w_i - w_nb) / h^2.
void apply_neumann_laplacian(const BoxMesh& m, const std::vector<double>& w,
                             std::vector<double>& out) {
    const int nx = m.cells[0], ny = m.cells[1];
    const double ix2 = 1.0 / (m.h[0] * m.h[0]);
    const double iy2 = m.dim == 2 ? 1.0 / (m.h[1] * m.h[1]) : 0.0;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int c = j * nx + i;
            double acc = 0.0;
            if (i > 0) acc += (w[c] - w[c - 1]) * ix2;
            if (i < nx - 1) acc += (w[c] - w[c + 1]) * ix2;
            if (m.dim == 2) {
                if (j > 0) acc += (w[c] - w[c - nx]) * iy2;
                if (j < ny - 1) acc += (w[c] - w[c + nx]) * iy2;
            }
            out[c] = acc;
        }
    }
}

void deflate_mean(std::vector<double>& v) {
    const double mean =
        std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    for (double& x : v) x -= mean;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// CG on the mean-zero subspace, where the Neumann Laplacian is positive
// definite.
void cg_neumann(const BoxMesh& m, const std::vector<double>& rhs,
                std::vector<double>& x, double tol, int max_iter) {
    const size_t n = rhs.size();
    std::vector<double> r = rhs, p(n), Ap(n);
    deflate_mean(r);
    std::fill(x.begin(), x.end(), 0.0);
    p = r;
    double rr = dot(r, r);
    const double target = tol * tol * rr;
    for (int it = 0; it < max_iter && rr > target && rr > 0.0; ++it) {
        apply_neumann_laplacian(m, p, Ap);
        const double alpha = rr / dot(p, Ap);
        for (size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
        for (size_t i = 0; i < n; ++i) r[i] -= alpha * Ap[i];
        if (it % 50 == 49) deflate_mean(r);
        const double rr_new = dot(r, r);
        for (size_t i = 0; i < n; ++i) p[i] = r[i] + (rr_new / rr) * p[i];
        rr = rr_new;
    }
    deflate_mean(x);
}

}  // namespace

double poincare_constant_numeric(const BoxMesh& mesh) {
    const int n = mesh.cell_count();
    std::vector<double> x(n), y(n), Ax(n);
    // first-axis coordinate: good overlap with the lowest mode
    for (int i = 0; i < n; ++i) x[i] = mesh.center(i)[0] + 0.3 * mesh.center(i)[1];
    deflate_mean(x);

    double lambda_prev = 0.0;
    for (int it = 0; it < 10000; ++it) {
        const double nx = std::sqrt(dot(x, x));
        if (!(nx > 0.0))
            throw std::runtime_error("poincare_constant_numeric: degenerate iterate");
        for (double& v : x) v /= nx;
        cg_neumann(mesh, x, y, 1e-13, 40 * n + 200);
        deflate_mean(y);
        apply_neumann_laplacian(mesh, y, Ax);
        const double lambda = dot(Ax, y) / dot(y, y);
        x = y;
        if (it > 0 && std::fabs(lambda - lambda_prev) <= 1e-10 * std::fabs(lambda))
            return 1.0 / std::sqrt(lambda);
        lambda_prev = lambda;
    }
    throw std::runtime_error("poincare_constant_numeric: no convergence after 1e4 iterations");
}

Quantity quantity_from_name(const std::string& name) {
    if (name == "mass") return Quantity::Mass;
    if (name == "mean") return Quantity::Mean;
    if (name == "min") return Quantity::Min;
    if (name == "max") return Quantity::Max;
    if (name == "l1") return Quantity::L1;
    if (name == "l2") return Quantity::L2;
    if (name == "l4") return Quantity::L4;
    if (name == "linf") return Quantity::Linf;
    if (name == "energy_psi") return Quantity::EnergyPsi;
    throw std::invalid_argument("unknown quantity: " + name);
}

std::vector<std::pair<double, double>> series_quantity(const TimeSeries& s,
                                                       Quantity q) {
    std::vector<std::pair<double, double>> out;
    out.reserve(s.records.size());
    for (const auto& r : s.records) {
        double v = 0.0;
        switch (q) {
            case Quantity::Mass: v = r.mass; break;
            case Quantity::Mean: v = r.mean; break;
            case Quantity::Min: v = r.min; break;
            case Quantity::Max: v = r.max; break;
            case Quantity::L1: v = r.l1; break;
            case Quantity::L2: v = r.l2; break;
            case Quantity::L4: v = r.l4; break;
            case Quantity::Linf: v = r.linf; break;
            case Quantity::EnergyPsi: v = r.energy_psi; break;
        }
        out.emplace_back(r.t, v);
    }
    return out;
}

std::vector<std::pair<double, double>> deviation_linf(const TimeSeries& s,
                                                      double ubar) {
    std::vector<std::pair<double, double>> out;
    out.reserve(s.records.size());
    for (const auto& r : s.records)
        out.emplace_back(r.t, std::max(r.max - ubar, ubar - r.min));
    return out;
}

namespace {

struct LineFit {
    double slope, intercept, r2;
};

LineFit least_squares(const std::vector<std::pair<double, double>>& xy) {
    const double n = double(xy.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (auto [x, y] : xy) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    const double det = n * sxx - sx * sx;
    if (det == 0.0) throw std::invalid_argument("fit: degenerate abscissae");
    LineFit f;
    f.slope = (n * sxy - sx * sy) / det;
    f.intercept = (sxx * sy - sx * sxy) / det;
    const double ss_tot = syy - sy * sy / n;
    double ss_res = 0.0;
    for (auto [x, y] : xy) {
        const double e = y - (f.slope * x + f.intercept);
        ss_res += e * e;
    }
    f.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

}  // namespace

FitResult fit_loglog(std::span<const std::pair<double, double>> pts,
                     double t_a, double t_b) {
    std::vector<std::pair<double, double>> xy;
    for (auto [t, v] : pts) {
        if (t < t_a || t > t_b) continue;
        if (!(t > 0.0) || !(v > 0.0))
            throw std::invalid_argument("fit_power_rate: nonpositive value in window");
        xy.emplace_back(std::log(t), std::log(v));
    }
    if (xy.size() < 5)
        throw std::invalid_argument("fit_power_rate: fewer than 5 records in window");
    const LineFit f = least_squares(xy);
    return FitResult{f.slope, f.intercept, f.r2};
}

FitResult fit_power_rate(const TimeSeries& s, Quantity q, double t_a,
                         double t_b) {
    const auto pts = series_quantity(s, q);
    return fit_loglog(pts, t_a, t_b);
}

ExpFit fit_exp_rate(std::span<const std::pair<double, double>> pts, double t_a,
                    double t_b) {
    std::vector<std::pair<double, double>> xy;
    for (auto [t, v] : pts) {
        if (t < t_a || t > t_b) continue;
        if (!(v > 0.0))
            throw std::invalid_argument("fit_exp_rate: nonpositive value in window");
        xy.emplace_back(t, std::log(v));
    }
    if (xy.size() < 5)
        throw std::invalid_argument("fit_exp_rate: fewer than 5 records in window");
    const LineFit f = least_squares(xy);
    return ExpFit{-f.slope, f.r2};
}

std::vector<double> envelope_ratio(const TimeSeries& s,
                                   const RatePrediction& pred, double q0,
                                   double u0_norm) {
    std::vector<double> out;
    out.reserve(s.records.size());
    for (const auto& r : s.records) {
        const bool early = r.t < pred.crossover_t;
        const double m = early ? pred.m2 : pred.m1;
        const double denom = 2.0 * q0 + pred.N * (m - 1.0);
        const double env = std::pow(r.t, -pred.N / denom) *
                               std::pow(u0_norm, 2.0 * q0 / denom) +
                           u0_norm;
        out.push_back(r.linf / env);
    }
    return out;
}

std::optional<double> detect_t_star(const TimeSeries& s) {
    int last = -1;
    for (int i = 0; i < int(s.records.size()); ++i)
        if (s.records[i].linf > 1.0) last = i;
    if (last < 0) return std::nullopt;
    if (last + 1 >= int(s.records.size())) return s.records[last].t;
    const auto& r0 = s.records[last];
    const auto& r1 = s.records[last + 1];
    const double frac = (1.0 - r0.linf) / (r1.linf - r0.linf);
    if (!(r0.t > 0.0))  // initial record at t = 0: interpolate in plain t
        return r0.t + frac * (r1.t - r0.t);
    const double x0 = std::log(r0.t), x1 = std::log(r1.t);
    return std::exp(x0 + frac * (x1 - x0));
}

}  // namespace flab
