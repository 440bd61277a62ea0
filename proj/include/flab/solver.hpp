#ifndef FLAB_SOLVER_HPP
#define FLAB_SOLVER_HPP

#include <stdexcept>
#include <utility>
#include <vector>

#include "flab/analysis.hpp"
#include "flab/mesh.hpp"
#include "flab/nonlinearity.hpp"

namespace flab {

struct SolverConfig {
    double dt0 = 1e-6;          // initial step
    double dt_growth = 1.05;    // geometric growth per accepted step
    double dt_max = 0.0;        // <= 0: (t_end - t_start) / 20
    double t_end = 1.0;
    double newton_tol = 0.0;    // <= 0: 1e-10 * (1 + max|u0|)
    int newton_max_iter = 50;
    double linear_tol = 1e-12;  // Krylov relative residual (2D)
    int record_count = 100;     // log-spaced records when record_times empty
    double record_t0 = 0.0;     // <= 0: t_start + 3 * dt0
    std::vector<double> record_times;  // explicit record times (absolute)
};

struct StepReport {
    double dt_used = 0.0;
    int newton_iters = 0;
    double final_residual = 0.0;
    int linear_iters_total = 0;
};

// Newton failed to reach tolerance within the iteration budget; the caller
// halves dt and retries.
struct StepFailure : std::runtime_error {
    explicit StepFailure(const std::string& what) : std::runtime_error(what) {}
};

// Ten consecutive step failures.
struct SolverAbort : std::runtime_error {
    explicit SolverAbort(const std::string& what) : std::runtime_error(what) {}
};

// (L phi(u))_i: per cell, the sum over interior faces of
// (phi(u_nb) - phi(u_i)) / h_axis^2. Boundary faces contribute nothing, so
// the volume-weighted sum telescopes to zero.
std::vector<double> apply_diffusion(const Field& f, const Nonlinearity& nl);

// One backward Euler step: solves U - U^n - dt * L phi(U) = 0 by damped
// Newton, then applies the flux-form update at the converged state so the
// discrete mass is conserved exactly.
std::pair<Field, StepReport> step_backward_euler(const Field& f,
                                                 const Nonlinearity& nl,
                                                 double dt,
                                                 const SolverConfig& cfg);

// Advances u0 to t_end with geometric dt growth, clamping steps so records
// land exactly on the requested times. `final_state` (optional) receives the
// state at t_end; `on_record` (optional) sees every recorded snapshot.
using RecordHook = std::function<void(const Field&)>;
TimeSeries run(const Field& u0, const Nonlinearity& nl, const SolverConfig& cfg,
               Field* final_state = nullptr, const RecordHook& on_record = {});

}  // namespace flab

#endif
