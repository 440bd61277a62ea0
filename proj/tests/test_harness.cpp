#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "flab/harness.hpp"
#include "flab/solver.hpp"

using namespace flab;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kMinimalConfig =
    "mesh.extents = 2.0\n"
    "mesh.origins = -1.0\n"
    "mesh.cells = 64\n"
    "nl.kind = pure-power\n"
    "nl.m = 2\n"
    "datum.kind = constant\n"
    "datum.amplitude = 1.5\n"
    "solver.t_end = 0.5\n";

}  // namespace

TEST_CASE("minimal config fills documented defaults") {
    const auto cfg = parse_config(kMinimalConfig);
    CHECK(cfg.dim == 1);
    CHECK(cfg.extents[0] == 2.0);
    CHECK(cfg.origins[0] == -1.0);
    CHECK(cfg.cells[0] == 64);
    CHECK(cfg.solver.t_end == 0.5);
    CHECK(cfg.solver.dt_growth == 1.05);
    CHECK(cfg.solver.newton_max_iter == 50);
    CHECK(cfg.solver.linear_tol == 1e-12);
    CHECK(cfg.q0 == 1.0);
    CHECK(cfg.p_set == std::vector<double>{1.0, 2.0, 4.0});
    CHECK(cfg.seed == 1);

    // the echo reproduces every effective key
    const std::string echo = format_config(cfg);
    CHECK(echo.find("mesh.cells=64") != std::string::npos);
    CHECK(echo.find("solver.dt_growth=1.05") != std::string::npos);
    CHECK(echo.find("analysis.q0=1") != std::string::npos);
}

TEST_CASE("m1 below one is rejected with the constraint message") {
    const std::string text = std::string(kMinimalConfig) + "nl.m1 = 0.5\n";
    try {
        parse_config(text);
        FAIL("expected rejection");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("m1 must exceed 1") != std::string::npos);
    }
}

TEST_CASE("duplicate keys are rejected naming both lines") {
    const std::string text =
        "mesh.extents = 1\nmesh.cells = 8\nmesh.cells = 16\n"
        "nl.kind = pure-power\ndatum.kind = constant\nsolver.t_end = 1\n";
    try {
        parse_config(text);
        FAIL("expected rejection");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("duplicate key 'mesh.cells'") != std::string::npos);
        CHECK(msg.find("2") != std::string::npos);
        CHECK(msg.find("3") != std::string::npos);
    }
}

TEST_CASE("unknown keys and malformed lines carry line numbers") {
    try {
        parse_config("mesh.extents = 1\nbogus.key = 3\n");
        FAIL("expected rejection");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 2") != std::string::npos);
        CHECK(msg.find("bogus.key") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("mesh.extents\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(std::string(kMinimalConfig) + "mesh.dim = 3\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(std::string(kMinimalConfig) + "solver.dt_growth = 0.5\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("nl.kind = pure-power\n"), ConfigError);  // missing keys
}

TEST_CASE("comments and blank lines are ignored") {
    const std::string text = std::string("# leading comment\n\n") + kMinimalConfig +
                             "  # trailing comment line\n";
    const auto cfg = parse_config(text);
    CHECK(cfg.datum_kind == "constant");
}

TEST_CASE("expression evaluator") {
    CHECK(eval_expression("1 + 2*3", 0, 0) == doctest::Approx(7.0));
    CHECK(eval_expression("sin(pi/2)", 0, 0) == doctest::Approx(1.0));
    CHECK(eval_expression("x^2 - y", 3.0, 1.0) == doctest::Approx(8.0));
    CHECK(eval_expression("-x + abs(-2)", 1.5, 0) == doctest::Approx(0.5));
    CHECK(eval_expression("max(x, y) * min(x, y)", 2.0, 5.0) == doctest::Approx(10.0));
    CHECK(eval_expression("exp(log(4))", 0, 0) == doctest::Approx(4.0));
    CHECK(eval_expression("2^3^1", 0, 0) == doctest::Approx(8.0));
    CHECK_THROWS_AS(eval_expression("1 +", 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(eval_expression("qux(3)", 0, 0), std::invalid_argument);
}

TEST_CASE("custom-expression datum samples the expression") {
    auto cfg = parse_config(std::string(kMinimalConfig) +
                            "datum.expression = 0.5*sin(pi*x)\n");
    cfg.datum_kind = "custom-expression";
    const auto mesh = make_mesh_from(cfg);
    const Field f = make_datum(cfg, mesh);
    const auto c0 = mesh->center(0);
    CHECK(f.values[0] == doctest::Approx(0.5 * std::sin(M_PI * c0[0])).epsilon(1e-14));
}

TEST_CASE("splitmix64 generator is stable across runs") {
    SplitMix64 a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
    SplitMix64 c(42);
    for (int i = 0; i < 1000; ++i) {
        const double u = c.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    // distinct seeds decorrelate immediately
    SplitMix64 d(1), e(2);
    CHECK(d.next() != e.next());
}

TEST_CASE("series CSV round trip is bit exact") {
    TimeSeries s;
    SplitMix64 rng(7);
    double t = 1e-6;
    for (int i = 0; i < 25; ++i) {
        SeriesRecord r;
        r.t = t;
        t *= 2.7;
        r.mass = rng.uniform() * 1e3;
        r.mean = rng.uniform() - 0.5;
        r.min = -rng.uniform();
        r.max = rng.uniform() * 40;
        r.l1 = rng.uniform();
        r.l2 = rng.uniform();
        r.l4 = rng.uniform();
        r.linf = rng.uniform() * 7;
        r.energy_psi = rng.uniform() * 1e-8;
        s.records.push_back(r);
    }
    const std::string path = "roundtrip_test.csv";
    emit_series(s, path);
    const TimeSeries back = read_series_csv(path);
    REQUIRE(back.records.size() == s.records.size());
    for (size_t i = 0; i < s.records.size(); ++i) {
        CHECK(back.records[i].t == s.records[i].t);
        CHECK(back.records[i].mass == s.records[i].mass);
        CHECK(back.records[i].energy_psi == s.records[i].energy_psi);
    }
    // writing again is byte-identical
    const std::string first = slurp(path);
    emit_series(back, path);
    CHECK(slurp(path) == first);
    std::remove(path.c_str());
}

TEST_CASE("empty series emits a header-only file") {
    TimeSeries s;
    const std::string path = "empty_test.csv";
    emit_series(s, path);
    CHECK(slurp(path) == "t,mass,mean,min,max,l1,l2,l4,linf,energy_psi\n");
    std::remove(path.c_str());
}

TEST_CASE("identical config and seed give byte-identical outputs") {
    auto cfg = parse_config(kMinimalConfig);
    cfg.datum_kind = "odd-bump";
    cfg.amplitude = 0.4;
    cfg.solver.record_count = 15;
    const auto mesh = make_mesh_from(cfg);
    const auto nl = make_nonlinearity(cfg);

    std::string bytes[2];
    for (int pass = 0; pass < 2; ++pass) {
        const Field u0 = make_datum(cfg, mesh);
        const TimeSeries s = run(u0, nl, cfg.solver);
        const std::string path = "determinism_test.csv";
        emit_series(s, path);
        bytes[pass] = slurp(path);
        std::remove(path.c_str());
    }
    CHECK(bytes[0] == bytes[1]);
    CHECK(bytes[0].size() > 100);
}

TEST_CASE("verdict files carry the fixed key set") {
    VerdictEntry v;
    v.preset = "demo";
    v.theorem = "mass-conservation";
    v.predicted = 0.0;
    v.measured = 1e-12;
    v.tolerance = 1e-9;
    v.pass = true;
    const std::string path = "verdict_test.txt";
    write_verdicts({v}, path);
    const std::string text = slurp(path);
    CHECK(text.find("preset=demo\n") != std::string::npos);
    CHECK(text.find("theorem=mass-conservation\n") != std::string::npos);
    CHECK(text.find("predicted=0\n") != std::string::npos);
    CHECK(text.find("measured=") != std::string::npos);
    CHECK(text.find("tolerance=") != std::string::npos);
    CHECK(text.find("pass=true\n") != std::string::npos);
    std::remove(path.c_str());
}

TEST_CASE("preset configs are available for every preset") {
    for (const auto& name : kPresetNames) {
        const auto cfg = default_preset_config(name);
        CHECK(cfg.solver.t_end > 0.0);
    }
    CHECK_THROWS_AS(default_preset_config("nope"), ConfigError);
}

TEST_CASE("datum kinds produce the advertised structure") {
    auto cfg = parse_config(kMinimalConfig);
    const auto mesh = make_mesh_from(cfg);

    cfg.datum_kind = "cosine-perturbation";
    cfg.offset = 1.0;
    cfg.amplitude = 0.1;
    const Field cosf = make_datum(cfg, mesh);
    CHECK(cosf.values.front() > 1.0);
    CHECK(cosf.values.back() < 1.0);

    cfg.datum_kind = "odd-bump";
    cfg.amplitude = 0.5;
    const Field odd = make_datum(cfg, mesh);
    CHECK(std::fabs(integral(odd)) <= 1e-12);

    cfg.datum_kind = "dipole";
    cfg.mass = 1.0;
    cfg.width = 0.1;
    cfg.separation = 1.0;
    const Field dip = make_datum(cfg, mesh);
    CHECK(std::fabs(integral(dip)) <= 1e-12);
    CHECK(lp_norm(dip, INFINITY) > 1.0);

    cfg.datum_kind = "zkb";
    cfg.mass = 1.0;
    cfg.tau = 0.01;
    const Field z = make_datum(cfg, mesh);
    CHECK(integral(z) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(z.time == 0.01);
}
