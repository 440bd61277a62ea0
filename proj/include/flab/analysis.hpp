#ifndef FLAB_ANALYSIS_HPP
#define FLAB_ANALYSIS_HPP

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "flab/mesh.hpp"
#include "flab/nonlinearity.hpp"

namespace flab {

struct SeriesRecord {
    double t = 0.0;
    double mass = 0.0;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    double l1 = 0.0;
    double l2 = 0.0;
    double l4 = 0.0;
    double linf = 0.0;
    double energy_psi = 0.0;
};

struct SeriesMeta {
    int dim = 0;
    std::array<int, 2> cells{0, 0};
    std::array<double, 2> extent{0.0, 0.0};
    std::string nl_desc;
    double q0 = 1.0;
};

struct TimeSeries {
    SeriesMeta meta;
    std::vector<SeriesRecord> records;
};

// (cell_volume * sum |u|^p)^(1/p); p = inf gives the cell max of |u|.
double lp_norm(const Field& f, double p);

SeriesRecord make_record(const Field& f, const Nonlinearity& nl);

// Gagliardo-Nirenberg interpolation parameter 2N(r-s) / (r[2N - s(N-2)]).
double theta(double s, double r, int N);

// Iteration exponents p_{k+1} = (N+2)/N * p_k + m1 - 1 from p_0 = q0.
// moser_p is the closed form consistent with the recurrence; the iterated
// version is kept as an independent route.
double moser_p(int k, double q0, int N, double m1);
double moser_p_recurrence(int k, double q0, int N, double m1);

struct RatePrediction {
    double q0 = 1.0;
    int N = 1;
    double m1 = 2.0, m2 = 2.0;
    double short_exp = 0.0;          // N / (2 q0 + N (m2 - 1))
    double long_exp = 0.0;           // N / (2 q0 + N (m1 - 1))
    double crossover_t = 0.0;        // ||u0||_{q0}^{2 q0 / N}
    double zero_mean_long_exp = 0.0;   // 1 / (m1 - 1)
    double zero_mean_short_exp = 0.0;  // 1 / (m2 - 1)
    std::optional<double> nonzero_mean_rate;  // phi'(mean0) / C_P^2
};

RatePrediction predict_rates(double q0, int N, double m1, double m2,
                             double u0_norm_q0, double mean0,
                             const Nonlinearity& nl, double C_P);

// 1/sqrt(lambda_1) with lambda_1 = (pi / longest extent)^2, the first
// nonzero Neumann eigenvalue of the box.
double poincare_constant_box(std::span<const double> extents, int dim);

// 1/sqrt(lambda_1^h) from the discrete Neumann Laplacian of the mesh,
// by inverse power iteration on the mean-zero subspace.
double poincare_constant_numeric(const BoxMesh& mesh);

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

struct ExpFit {
    double rate = 0.0;
    double r2 = 0.0;
};

enum class Quantity { Mass, Mean, Min, Max, L1, L2, L4, Linf, EnergyPsi };

Quantity quantity_from_name(const std::string& name);

std::vector<std::pair<double, double>> series_quantity(const TimeSeries& s,
                                                       Quantity q);

// |u - ubar| sup per record, from the recorded min/max.
std::vector<std::pair<double, double>> deviation_linf(const TimeSeries& s,
                                                      double ubar);

// Least squares through (log t, log y) on records with t in [t_a, t_b].
FitResult fit_loglog(std::span<const std::pair<double, double>> pts,
                     double t_a, double t_b);
FitResult fit_power_rate(const TimeSeries& s, Quantity q, double t_a,
                         double t_b);

// Least squares through (t, log y); rate = -slope.
ExpFit fit_exp_rate(std::span<const std::pair<double, double>> pts, double t_a,
                    double t_b);

// ||u(t)||_inf divided by the two-branch smoothing envelope with K = 1;
// the max over records is the empirically realized prefactor.
std::vector<double> envelope_ratio(const TimeSeries& s,
                                   const RatePrediction& pred, double q0,
                                   double u0_norm);

// Last record time with ||u||_inf > 1, interpolated in log t against the
// neighbor record; nullopt when the sup norm never exceeds 1.
std::optional<double> detect_t_star(const TimeSeries& s);

}  // namespace flab

#endif
