#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "flab/mesh.hpp"
#include "flab/nonlinearity.hpp"
#include "flab/solver.hpp"
#include "oracles.hpp"

using namespace flab;

namespace {

MeshPtr mesh1d(double length, double origin, int n) {
    const double ext[] = {length};
    const double org[] = {origin};
    const int cells[] = {n};
    return std::make_shared<BoxMesh>(make_box_mesh(1, ext, org, cells));
}

MeshPtr mesh2d(int nx, int ny) {
    const double ext[] = {1.0, 1.0};
    const double org[] = {0.0, 0.0};
    const int cells[] = {nx, ny};
    return std::make_shared<BoxMesh>(make_box_mesh(2, ext, org, cells));
}

Field field_from(MeshPtr mesh, std::vector<double> v, double t = 0.0) {
    Field f;
    f.mesh = std::move(mesh);
    f.values = std::move(v);
    f.time = t;
    return f;
}

Field random_field(MeshPtr mesh, unsigned seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(mesh->cell_count());
    for (double& x : v) x = dist(rng);
    return field_from(std::move(mesh), std::move(v));
}

}  // namespace

TEST_CASE("apply_diffusion examples") {
    const auto nl = Nonlinearity::pure_power(2.0);

    const auto mc = mesh1d(3.0, 0.0, 3);
    const Field constant = field_from(mc, {2.5, 2.5, 2.5});
    for (double v : apply_diffusion(constant, nl)) CHECK(v == 0.0);

    // h = 1, phi values [0,1,0]: face-difference stencil with no boundary flux
    const Field hat = field_from(mc, {0.0, 1.0, 0.0});
    const auto lap = apply_diffusion(hat, nl);
    CHECK(lap[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(lap[1] == doctest::Approx(-2.0).epsilon(1e-14));
    CHECK(lap[2] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("apply_diffusion telescopes to zero total flux") {
    const auto nl = build_two_power(2.5, 1.8, 0.5, 2.0, 1.0);
    for (unsigned seed : {1u, 2u, 3u}) {
        const Field f = random_field(mesh1d(2.0, -1.0, 64), seed);
        const auto out = apply_diffusion(f, nl);
        double sum = 0.0;
        for (double v : out) sum += v;
        CHECK(std::fabs(f.mesh->cell_volume * sum) <= 1e-12);
    }
    const Field f2 = random_field(mesh2d(12, 9), 4u);
    const auto out2 = apply_diffusion(f2, nl);
    double sum2 = 0.0;
    for (double v : out2) sum2 += v;
    CHECK(std::fabs(f2.mesh->cell_volume * sum2) <= 1e-12);
}

TEST_CASE("constant datum is a fixed point of the step") {
    const auto nl = Nonlinearity::pure_power(2.0);
    const Field c = field_from(mesh1d(1.0, 0.0, 16), std::vector<double>(16, 0.7));
    SolverConfig cfg;
    auto [u, rep] = step_backward_euler(c, nl, 0.05, cfg);
    for (double v : u.values) CHECK(v == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(rep.newton_iters == 1);
    CHECK(u.time == doctest::Approx(0.05).epsilon(1e-15));
}

TEST_CASE("one step conserves mass") {
    const auto nl = build_two_power(3.0, 2.0, 0.5, 2.0, 1.0);
    const Field f = random_field(mesh1d(2.0, 0.0, 48), 9u, -2.0, 3.0);
    SolverConfig cfg;
    const double m0 = integral(f);
    auto [u, rep] = step_backward_euler(f, nl, 0.01, cfg);
    CHECK(std::fabs(integral(u) - m0) <= 1e-10 * (1.0 + lp_norm(f, 1.0)));
    CHECK(rep.final_residual <= 1e-10 * (1.0 + lp_norm(f, INFINITY)));
}

TEST_CASE("3-cell step matches the nested-bisection oracle") {
    const auto nl = Nonlinearity::pure_power(2.0);
    const Field f = field_from(mesh1d(3.0, 0.0, 3), {0.0, 1.0, 0.0});
    SolverConfig cfg;
    cfg.newton_tol = 1e-13;
    auto [u, rep] = step_backward_euler(f, nl, 0.1, cfg);

    const auto oracle = oracles::backward_euler_3cell(
        [&](double x) { return phi(nl, x); }, {0.0, 1.0, 0.0}, 0.1, 1.0);
    for (int i = 0; i < 3; ++i)
        CHECK(u.values[i] == doctest::Approx(oracle[i]).epsilon(1e-8));

    // frozen oracle output for this exact system
    CHECK(u.values[0] == doctest::Approx(0.072556672291577287).epsilon(1e-8));
    CHECK(u.values[1] == doctest::Approx(0.85488665541684543).epsilon(1e-8));
    CHECK(u.values[2] == doctest::Approx(0.072556672291577287).epsilon(1e-8));
}

TEST_CASE("run on a zero datum stays zero") {
    const auto nl = Nonlinearity::pure_power(2.0);
    const Field z = field_from(mesh1d(1.0, 0.0, 16), std::vector<double>(16, 0.0));
    SolverConfig cfg;
    cfg.t_end = 0.5;
    cfg.record_count = 10;
    const TimeSeries s = run(z, nl, cfg);
    for (const auto& r : s.records) {
        CHECK(r.linf == 0.0);
        CHECK(r.mass == 0.0);
    }
}

TEST_CASE("run on a constant datum keeps every norm flat") {
    const auto nl = build_two_power(2.0, 3.0, 0.5, 2.0, 1.0);
    const Field c = field_from(mesh1d(2.0, 0.0, 16), std::vector<double>(16, -1.3));
    SolverConfig cfg;
    cfg.t_end = 0.3;
    cfg.record_count = 8;
    const TimeSeries s = run(c, nl, cfg);
    for (const auto& r : s.records) {
        CHECK(r.linf == doctest::Approx(1.3).epsilon(1e-12));
        CHECK(r.mean == doctest::Approx(-1.3).epsilon(1e-12));
    }
}

TEST_CASE("records are strictly increasing in t and land on request") {
    const auto nl = Nonlinearity::pure_power(2.0);
    const Field f = random_field(mesh1d(1.0, 0.0, 32), 21u);
    SolverConfig cfg;
    cfg.t_end = 1.0;
    cfg.record_times = {0.125, 0.25, 0.5, 1.0};
    const TimeSeries s = run(f, nl, cfg);
    REQUIRE(s.records.size() == 5);  // initial snapshot + 4 requested
    CHECK(s.records[1].t == 0.125);
    CHECK(s.records[4].t == 1.0);
    for (size_t i = 1; i < s.records.size(); ++i)
        CHECK(s.records[i].t > s.records[i - 1].t);
}

TEST_CASE("run invariants on random data") {
    const auto nl = build_two_power(2.5, 1.8, 0.5, 2.0, 1.0);
    SolverConfig cfg;
    cfg.t_end = 0.5;
    cfg.dt0 = 1e-4;
    cfg.dt_growth = 1.1;
    cfg.record_times = {0.01, 0.05, 0.1, 0.25, 0.5};

    for (unsigned seed = 1; seed <= 5; ++seed) {
        const Field u0 = random_field(mesh1d(1.0, 0.0, 48), seed, -1.0, 2.0);
        const double mass0 = integral(u0);
        const double l1_0 = lp_norm(u0, 1.0);
        const double linf0 = lp_norm(u0, INFINITY);
        double min0 = u0.values[0], max0 = u0.values[0];
        for (double v : u0.values) {
            min0 = std::min(min0, v);
            max0 = std::max(max0, v);
        }

        const TimeSeries s = run(u0, nl, cfg);
        const double eps = 1e-9 * (1.0 + linf0);
        for (size_t i = 0; i < s.records.size(); ++i) {
            const auto& r = s.records[i];
            CHECK(std::fabs(r.mass - mass0) <= 1e-9 * (1.0 + l1_0));
            CHECK(r.min >= min0 - eps);   // order preservation
            CHECK(r.max <= max0 + eps);
            if (i > 0) {
                const auto& p = s.records[i - 1];
                CHECK(r.l1 <= p.l1 * (1.0 + 1e-8));
                CHECK(r.l2 <= p.l2 * (1.0 + 1e-8));
                CHECK(r.l4 <= p.l4 * (1.0 + 1e-8));
                CHECK(r.linf <= p.linf * (1.0 + 1e-8));
                CHECK(r.energy_psi <= p.energy_psi + 1e-8 * (1.0 + p.energy_psi));
            }
        }
    }
}

TEST_CASE("comparison and L1 contraction for ordered pairs") {
    const auto nl = build_two_power(2.5, 1.8, 0.5, 2.0, 1.0);
    SolverConfig cfg;
    cfg.t_end = 0.4;
    cfg.record_times = {0.05, 0.2, 0.4};

    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (int pair = 0; pair < 20; ++pair) {
        const auto mesh = mesh1d(1.0, 0.0, 32);
        Field u0 = random_field(mesh, 100 + pair, -1.0, 1.0);
        Field v0 = u0;
        for (double& v : v0.values) v -= 0.5 * dist(rng);

        std::vector<Field> us, vs;
        run(u0, nl, cfg, nullptr, [&](const Field& f) { us.push_back(f); });
        run(v0, nl, cfg, nullptr, [&](const Field& f) { vs.push_back(f); });
        REQUIRE(us.size() == vs.size());

        double d0 = 0.0;
        for (size_t i = 0; i < u0.values.size(); ++i)
            d0 += std::fabs(u0.values[i] - v0.values[i]);
        d0 *= mesh->cell_volume;

        for (size_t s = 0; s < us.size(); ++s) {
            double d = 0.0;
            for (size_t i = 0; i < us[s].values.size(); ++i) {
                CHECK(vs[s].values[i] <= us[s].values[i] + 1e-8);
                d += std::fabs(us[s].values[i] - vs[s].values[i]);
            }
            CHECK(d * mesh->cell_volume <= d0 + 1e-8 * (1.0 + d0));
        }
    }
}

TEST_CASE("zero-mean data keep a zero mean") {
    const auto nl = Nonlinearity::pure_power(2.0);
    const auto mesh = mesh1d(2.0, -1.0, 64);
    const Field u0 = project_function(
        mesh, [](std::array<double, 2> x) { return 0.5 * std::sin(M_PI * x[0]); });
    SolverConfig cfg;
    cfg.t_end = 2.0;
    cfg.record_count = 12;
    const TimeSeries s = run(u0, nl, cfg);
    for (const auto& r : s.records) CHECK(std::fabs(r.mean) <= 1e-10);
}

TEST_CASE("2D step conserves mass and damps energy") {
    const auto nl = build_two_power(2.5, 1.8, 0.5, 2.0, 1.0);
    const Field u0 = random_field(mesh2d(16, 16), 77u);
    SolverConfig cfg;
    cfg.t_end = 0.25;
    cfg.record_count = 8;
    const double m0 = integral(u0);
    const TimeSeries s = run(u0, nl, cfg);
    for (size_t i = 0; i < s.records.size(); ++i) {
        CHECK(std::fabs(s.records[i].mass - m0) <= 1e-9 * (1.0 + lp_norm(u0, 1.0)));
        if (i > 0)
            CHECK(s.records[i].energy_psi <=
                  s.records[i - 1].energy_psi + 1e-8 * (1.0 + s.records[i - 1].energy_psi));
    }
}

TEST_CASE("step failure surfaces as StepFailure") {
    const auto nl = Nonlinearity::pure_power(2.0);
    const Field f = field_from(mesh1d(3.0, 0.0, 3), {0.0, 40.0, 0.0});
    SolverConfig cfg;
    cfg.newton_max_iter = 1;  // starve the iteration
    CHECK_THROWS_AS(step_backward_euler(f, nl, 10.0, cfg), StepFailure);
}

TEST_CASE("run recovers from step failures by halving dt") {
    const auto nl = Nonlinearity::pure_power(3.0);
    const auto mesh = mesh1d(1.0, 0.0, 32);
    const Field u0 = random_field(mesh, 55u, 0.0, 5.0);
    SolverConfig cfg;
    cfg.t_end = 0.05;
    cfg.dt0 = 0.05;            // far too large for the iteration budget
    cfg.newton_max_iter = 3;   // starved on purpose
    cfg.record_times = {0.05};
    const double m0 = integral(u0);
    const TimeSeries s = run(u0, nl, cfg);
    CHECK(s.records.back().t == 0.05);
    CHECK(std::fabs(s.records.back().mass - m0) <= 1e-9 * (1.0 + lp_norm(u0, 1.0)));
}

TEST_CASE("2D solve matches 1D on y-independent data") {
    const auto nl = build_two_power(3.0, 2.0, 0.5, 2.0, 1.0);
    const int nx = 48;
    const auto m1 = mesh1d(2.0, -1.0, nx);
    const double ext[] = {2.0, 1.0};
    const double org[] = {-1.0, 0.0};
    const int cells[] = {nx, 8};
    const auto m2 = std::make_shared<BoxMesh>(make_box_mesh(2, ext, org, cells));

    auto profile = [](std::array<double, 2> x) {
        return 1.5 * std::exp(-8.0 * x[0] * x[0]);
    };
    const Field a0 = project_function(m1, profile);
    const Field b0 = project_function(m2, profile);  // constant in y

    SolverConfig cfg;
    cfg.t_end = 0.2;
    cfg.dt0 = 1e-4;
    cfg.newton_tol = 1e-12;
    cfg.record_times = {0.2};

    Field a_end, b_end;
    run(a0, nl, cfg, &a_end);
    run(b0, nl, cfg, &b_end);

    for (int iy = 0; iy < 8; ++iy)
        for (int ix = 0; ix < nx; ++ix)
            CHECK(b_end.values[m2->index(ix, iy)] ==
                  doctest::Approx(a_end.values[ix]).epsilon(1e-8));
}
