#include "flab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace flab {

namespace {

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

// L acting on precomputed phi values.
void apply_lin(const BoxMesh& m, const std::vector<double>& w,
               std::vector<double>& out) {
    const int nx = m.cells[0], ny = m.cells[1];
    const double ix2 = 1.0 / (m.h[0] * m.h[0]);
    const double iy2 = m.dim == 2 ? 1.0 / (m.h[1] * m.h[1]) : 0.0;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int c = j * nx + i;
            double acc = 0.0;
            if (i > 0) acc += (w[c - 1] - w[c]) * ix2;
            if (i < nx - 1) acc += (w[c + 1] - w[c]) * ix2;
            if (m.dim == 2) {
                if (j > 0) acc += (w[c - nx] - w[c]) * iy2;
                if (j < ny - 1) acc += (w[c + nx] - w[c]) * iy2;
            }
            out[c] = acc;
        }
    }
}

// residual F(U) = U - Un - dt * L phi(U)
void residual(const BoxMesh& m, const Nonlinearity& nl,
              const std::vector<double>& u, const std::vector<double>& un,
              double dt, std::vector<double>& phiu, std::vector<double>& lphi,
              std::vector<double>& out) {
    const int n = int(u.size());
    for (int i = 0; i < n; ++i) phiu[i] = phi(nl, u[i]);
    apply_lin(m, phiu, lphi);
    for (int i = 0; i < n; ++i) out[i] = u[i] - un[i] - dt * lphi[i];
}

// Jacobian of F applied to v: v - dt * L (phi'(U) v).
struct JacobianApply {
    const BoxMesh& mesh;
    double dt;
    const std::vector<double>& dphi;
    mutable std::vector<double> scaled, lap;

    JacobianApply(const BoxMesh& m, double dt_, const std::vector<double>& d)
        : mesh(m), dt(dt_), dphi(d), scaled(d.size()), lap(d.size()) {}

    void operator()(const std::vector<double>& v, std::vector<double>& out) const {
        const int n = int(v.size());
        for (int i = 0; i < n; ++i) scaled[i] = dphi[i] * v[i];
        apply_lin(mesh, scaled, lap);
        for (int i = 0; i < n; ++i) out[i] = v[i] - dt * lap[i];
    }
};

// Direct tridiagonal elimination for the 1D Newton system.
void solve_tridiag_1d(const BoxMesh& m, double dt,
                      const std::vector<double>& dphi,
                      const std::vector<double>& rhs, std::vector<double>& x) {
    const int n = int(rhs.size());
    const double ix2 = 1.0 / (m.h[0] * m.h[0]);
    std::vector<double> diag(n), upper(n), lower(n), r = rhs;
    for (int i = 0; i < n; ++i) {
        const int deg = (i > 0 ? 1 : 0) + (i < n - 1 ? 1 : 0);
        diag[i] = 1.0 + dt * ix2 * deg * dphi[i];
        lower[i] = i > 0 ? -dt * ix2 * dphi[i - 1] : 0.0;
        upper[i] = i < n - 1 ? -dt * ix2 * dphi[i + 1] : 0.0;
    }
    for (int i = 1; i < n; ++i) {
        const double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        r[i] -= w * r[i - 1];
    }
    x.resize(n);
    x[n - 1] = r[n - 1] / diag[n - 1];
    for (int i = n - 2; i >= 0; --i) x[i] = (r[i] - upper[i] * x[i + 1]) / diag[i];
}

// BiCGSTAB with Jacobi preconditioning for the 2D system.
int bicgstab(const JacobianApply& A, const std::vector<double>& diag_inv,
             const std::vector<double>& rhs, std::vector<double>& x,
             double tol) {
    const int n = int(rhs.size());
    std::fill(x.begin(), x.end(), 0.0);
    std::vector<double> r = rhs, r0 = rhs, p(n, 0.0), v(n, 0.0), s(n), t(n),
                        phat(n), shat(n);
    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
        double acc = 0.0;
        for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
        return acc;
    };
    const double bnorm = std::sqrt(dot(rhs, rhs));
    if (bnorm == 0.0) return 0;
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    int iters = 0;
    for (; iters < 2000; ++iters) {
        const double rho_new = dot(r0, r);
        if (rho_new == 0.0) break;
        if (iters == 0) {
            p = r;
        } else {
            const double beta = (rho_new / rho) * (alpha / omega);
            for (int i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        rho = rho_new;
        for (int i = 0; i < n; ++i) phat[i] = diag_inv[i] * p[i];
        A(phat, v);
        alpha = rho / dot(r0, v);
        for (int i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
        if (std::sqrt(dot(s, s)) <= tol * bnorm) {
            for (int i = 0; i < n; ++i) x[i] += alpha * phat[i];
            ++iters;
            break;
        }
        for (int i = 0; i < n; ++i) shat[i] = diag_inv[i] * s[i];
        A(shat, t);
        omega = dot(t, s) / dot(t, t);
        for (int i = 0; i < n; ++i) x[i] += alpha * phat[i] + omega * shat[i];
        for (int i = 0; i < n; ++i) r[i] = s[i] - omega * t[i];
        if (std::sqrt(dot(r, r)) <= tol * bnorm) {
            ++iters;
            break;
        }
        if (omega == 0.0) break;
    }
    return iters;
}

}  // namespace

std::vector<double> apply_diffusion(const Field& f, const Nonlinearity& nl) {
    const int n = f.mesh->cell_count();
    std::vector<double> phiu(n), out(n);
    for (int i = 0; i < n; ++i) phiu[i] = phi(nl, f.values[i]);
    apply_lin(*f.mesh, phiu, out);
    return out;
}

std::pair<Field, StepReport> step_backward_euler(const Field& f,
                                                 const Nonlinearity& nl,
                                                 double dt,
                                                 const SolverConfig& cfg) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_backward_euler: dt must be positive");
    const BoxMesh& mesh = *f.mesh;
    const int n = mesh.cell_count();
    const double tol = cfg.newton_tol > 0.0
                           ? cfg.newton_tol
                           : 1e-10 * (1.0 + max_abs(f.values));

    std::vector<double> u = f.values;
    std::vector<double> phiu(n), lphi(n), res(n), dphi(n), delta(n), trial(n),
        res_trial(n);
    StepReport rep;
    rep.dt_used = dt;

    residual(mesh, nl, u, f.values, dt, phiu, lphi, res);
    double rnorm = max_abs(res);
    rep.newton_iters = 1;

    int it = 0;
    while (rnorm > tol) {
        if (++it > cfg.newton_max_iter)
            throw StepFailure("Newton stagnation: residual " + std::to_string(rnorm));
        for (int i = 0; i < n; ++i) dphi[i] = phi_prime(nl, u[i]);
        for (int i = 0; i < n; ++i) res[i] = -res[i];
        if (mesh.dim == 1) {
            solve_tridiag_1d(mesh, dt, dphi, res, delta);
        } else {
            JacobianApply A(mesh, dt, dphi);
            const double ix2 = 1.0 / (mesh.h[0] * mesh.h[0]);
            const double iy2 = 1.0 / (mesh.h[1] * mesh.h[1]);
            std::vector<double> dinv(n);
            const int nx = mesh.cells[0], ny = mesh.cells[1];
            for (int j = 0; j < ny; ++j)
                for (int i = 0; i < nx; ++i) {
                    const int c = j * nx + i;
                    const double deg = ((i > 0) + (i < nx - 1)) * ix2 +
                                       ((j > 0) + (j < ny - 1)) * iy2;
                    dinv[c] = 1.0 / (1.0 + dt * deg * dphi[c]);
                }
            rep.linear_iters_total += bicgstab(A, dinv, res, delta, cfg.linear_tol);
        }

        // damping: halve the step until the residual norm decreases
        double s = 1.0;
        bool accepted = false;
        for (int halvings = 0; halvings <= 30; ++halvings) {
            for (int i = 0; i < n; ++i) trial[i] = u[i] + s * delta[i];
            residual(mesh, nl, trial, f.values, dt, phiu, lphi, res_trial);
            const double rn = max_abs(res_trial);
            if (rn < rnorm || rn <= tol) {
                u.swap(trial);
                res.swap(res_trial);
                rnorm = rn;
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        ++rep.newton_iters;
        if (!accepted)
            throw StepFailure("Newton damping failed to reduce the residual");
    }

    rep.final_residual = rnorm;

    // flux-form update at the converged state: discrete mass is exact by
    // telescoping regardless of the Newton residual
    Field out;
    out.mesh = f.mesh;
    out.time = f.time + dt;
    out.values.resize(n);
    for (int i = 0; i < n; ++i) phiu[i] = phi(nl, u[i]);
    apply_lin(mesh, phiu, lphi);
    for (int i = 0; i < n; ++i) out.values[i] = f.values[i] + dt * lphi[i];
    return {std::move(out), rep};
}

TimeSeries run(const Field& u0, const Nonlinearity& nl,
               const SolverConfig& cfg_in, Field* final_state,
               const RecordHook& on_record) {
    SolverConfig cfg = cfg_in;
    const double t_start = u0.time;
    if (!(cfg.t_end > t_start))
        throw std::invalid_argument("run: t_end must exceed the initial time");
    if (cfg.dt_max <= 0.0) cfg.dt_max = (cfg.t_end - t_start) / 20.0;
    cfg.dt_max = std::min(cfg.dt_max, cfg.t_end - t_start);
    if (cfg.dt0 <= 0.0) cfg.dt0 = 1e-6 * (cfg.t_end - t_start);
    if (cfg.newton_tol <= 0.0)
        cfg.newton_tol = 1e-10 * (1.0 + max_abs(u0.values));
    cfg.dt0 = std::min(cfg.dt0, cfg.dt_max);

    std::vector<double> records = cfg.record_times;
    if (records.empty()) {
        double r0 = cfg.record_t0 > t_start ? cfg.record_t0 : t_start + 3.0 * cfg.dt0;
        r0 = std::min(r0, cfg.t_end);
        const int k = std::max(cfg.record_count, 2);
        records.reserve(k);
        for (int i = 0; i < k; ++i)
            records.push_back(r0 * std::pow(cfg.t_end / r0, double(i) / double(k - 1)));
    }
    std::sort(records.begin(), records.end());
    records.erase(std::remove_if(records.begin(), records.end(),
                                 [&](double t) { return t <= t_start || t > cfg.t_end; }),
                  records.end());
    records.erase(std::unique(records.begin(), records.end()), records.end());

    TimeSeries series;
    series.meta.dim = u0.mesh->dim;
    series.meta.cells = u0.mesh->cells;
    series.meta.extent = u0.mesh->extent;
    series.meta.nl_desc = describe(nl);
    series.records.push_back(make_record(u0, nl));
    if (on_record) on_record(u0);

    Field u = u0;
    double dt_cand = cfg.dt0;
    size_t next_rec = 0;
    int consecutive_failures = 0;

    while (u.time < cfg.t_end) {
        const double target =
            next_rec < records.size() ? records[next_rec] : cfg.t_end;
        const double dt = std::min(dt_cand, target - u.time);
        try {
            auto [unew, rep] = step_backward_euler(u, nl, dt, cfg);
            u = std::move(unew);
            consecutive_failures = 0;
            if (dt >= dt_cand)  // uncut step: grow
                dt_cand = std::min(dt_cand * cfg.dt_growth, cfg.dt_max);
        } catch (const StepFailure&) {
            if (++consecutive_failures >= 10)
                throw SolverAbort("run: 10 consecutive step failures at t = " +
                                  std::to_string(u.time));
            dt_cand = dt / 2.0;
            continue;
        }
        if (u.time >= target * (1.0 - 1e-14)) {
            u.time = target;  // land exactly
            if (next_rec < records.size()) {
                series.records.push_back(make_record(u, nl));
                if (on_record) on_record(u);
                ++next_rec;
            }
        }
    }
    if (final_state) *final_state = std::move(u);
    return series;
}

}  // namespace flab
