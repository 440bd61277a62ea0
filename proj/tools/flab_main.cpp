#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "flab/harness.hpp"
#include "flab/reference.hpp"
#include "flab/solver.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitVerdictFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitSolverAbort = 3;

void print_verdicts(const flab::PresetResult& res) {
    for (const auto& v : res.verdicts) {
        std::printf("[%s] %s: predicted=%.6g measured=%.6g tolerance=%.6g %s\n",
                    v.preset.c_str(), v.theorem.c_str(), v.predicted, v.measured,
                    v.tolerance, v.pass ? "PASS" : "FAIL");
    }
    if (!res.verdict_file.empty())
        std::printf("verdict file: %s\n", res.verdict_file.c_str());
    for (const auto& f : res.series_files) std::printf("series file: %s\n", f.c_str());
}

int cmd_run(const std::string& config_path) {
    const flab::ExperimentConfig cfg = flab::parse_config_file(config_path);
    std::printf("# effective configuration\n%s", flab::format_config(cfg).c_str());

    const flab::MeshPtr mesh = flab::make_mesh_from(cfg);
    const flab::Nonlinearity nl = flab::make_nonlinearity(cfg);
    const flab::Field u0 = flab::make_datum(cfg, mesh);
    flab::TimeSeries series = flab::run(u0, nl, cfg.solver);
    series.meta.q0 = cfg.q0;

    const std::string out = cfg.series_path.empty() ? "series.csv" : cfg.series_path;
    flab::emit_series(series, out);
    std::printf("series file: %s (%zu records)\n", out.c_str(), series.records.size());

    const auto& last = series.records.back();
    std::printf("final: t=%.6g mass=%.12g linf=%.6g energy_psi=%.6g\n", last.t,
                last.mass, last.linf, last.energy_psi);

    // default windows: early up to the norm crossover, late = last decade
    double e_a = cfg.early_a, e_b = cfg.early_b;
    double l_a = cfg.late_a, l_b = cfg.late_b;
    if (e_b <= 0.0 && series.records.size() >= 2) {
        const double crossover =
            std::pow(flab::lp_norm(u0, cfg.q0), 2.0 * cfg.q0 / cfg.dim);
        e_a = series.records[1].t;
        e_b = std::min(crossover, 0.1 * cfg.solver.t_end);
    }
    if (l_b <= 0.0) {
        l_b = cfg.solver.t_end;
        l_a = l_b / 10.0;
    }
    for (auto [name, a, b] : {std::tuple{"early", e_a, e_b}, {"late", l_a, l_b}}) {
        try {
            const auto fit = flab::fit_power_rate(series, flab::Quantity::Linf, a, b);
            std::printf("%s window [%g, %g]: slope=%.6g r2=%.6g\n", name, a, b,
                        fit.slope, fit.r2);
        } catch (const std::invalid_argument& e) {
            std::printf("%s window [%g, %g]: fit skipped (%s)\n", name, a, b, e.what());
        }
    }
    return kExitPass;
}

int cmd_verify(const std::string& preset, const std::string& config_path,
               const std::string& out_dir) {
    flab::ExperimentConfig cfg = config_path.empty()
                                     ? flab::default_preset_config(preset)
                                     : flab::parse_config_file(config_path);
    const flab::PresetResult res = flab::run_preset(preset, cfg, out_dir);
    print_verdicts(res);
    return res.exit_code;
}

int cmd_rates(const std::string& csv_path, const std::string& window,
              const std::string& quantity, bool exponential) {
    const auto colon = window.find(':');
    if (colon == std::string::npos) {
        std::fprintf(stderr, "rates: --window expects tA:tB\n");
        return kExitUsage;
    }
    const double t_a = std::stod(window.substr(0, colon));
    const double t_b = std::stod(window.substr(colon + 1));
    const flab::TimeSeries s = flab::read_series_csv(csv_path);
    const flab::Quantity q = flab::quantity_from_name(quantity);
    if (exponential) {
        const auto pts = flab::series_quantity(s, q);
        const auto fit = flab::fit_exp_rate(pts, t_a, t_b);
        std::printf("exp rate=%.12g r2=%.12g\n", fit.rate, fit.r2);
    } else {
        const auto fit = flab::fit_power_rate(s, q, t_a, t_b);
        std::printf("slope=%.12g intercept=%.12g r2=%.12g\n", fit.slope,
                    fit.intercept, fit.r2);
    }
    return kExitPass;
}

int cmd_check_phi(const std::string& config_path) {
    const flab::ExperimentConfig cfg = flab::parse_config_file(config_path);
    const flab::Nonlinearity nl = flab::make_nonlinearity(cfg);
    const double m1 = cfg.nl_kind == "pure-power" ? cfg.m : cfg.m1;
    const double m2 = cfg.nl_kind == "pure-power" ? cfg.m : cfg.m2;
    const auto rep = flab::verify_growth_conditions(nl, m1, m2, 1e3, 2000);
    std::printf("phi(1)=%.12g phi'(1)=%.12g psi(1)=%.12g\n", flab::phi(nl, 1.0),
                flab::phi_prime(nl, 1.0), flab::psi(nl, 1.0));
    std::printf("growth: c1_best=%.12g c2_best=%.12g ok=%s\n", rep.c1_best,
                rep.c2_best, rep.ok ? "true" : "false");
    if (nl.kind == flab::PhiKind::TwoPower) {
        // join continuity report
        const double eps = 1e-9;
        for (double u : {cfg.a, cfg.b}) {
            const double jump = std::fabs(flab::phi(nl, u + eps) - flab::phi(nl, u - eps));
            std::printf("phi near u=%g: two-sided spread %.3g\n", u, jump);
        }
    }
    return rep.ok ? kExitPass : kExitVerdictFail;
}

int cmd_poincare(const std::string& config_path) {
    const flab::ExperimentConfig cfg = flab::parse_config_file(config_path);
    const flab::MeshPtr mesh = flab::make_mesh_from(cfg);
    const double box = flab::poincare_constant_box(cfg.extents, cfg.dim);
    const double numeric = flab::poincare_constant_numeric(*mesh);
    std::printf("C_P box=%.12g numeric=%.12g rel_diff=%.3g\n", box, numeric,
                std::fabs(numeric - box) / box);
    return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flab: Neumann filtration-equation laboratory"};
    app.require_subcommand(1);

    std::string config_path, preset, out_dir = ".", window, quantity = "linf";
    bool exponential = false;

    auto* run = app.add_subcommand("run", "run a simulation from a config file");
    run->add_option("config", config_path, "key=value config file")->required();

    auto* verify = app.add_subcommand("verify", "run a verification preset");
    verify->add_option("preset", preset, "preset name")
        ->required()
        ->check(CLI::IsMember(flab::kPresetNames));
    std::string verify_config;
    verify->add_option("--config", verify_config, "override config file");
    verify->add_option("--out", out_dir, "output directory");

    auto* rates = app.add_subcommand("rates", "fit a decay rate from a series CSV");
    std::string csv_path;
    rates->add_option("series", csv_path, "series CSV file")->required();
    rates->add_option("--window", window, "fit window tA:tB")->required();
    rates->add_option("--quantity", quantity, "column to fit (default linf)");
    rates->add_flag("--exp", exponential, "fit an exponential rate instead of a power");

    auto* check = app.add_subcommand("check-phi", "certify the nonlinearity growth bounds");
    std::string check_config;
    check->add_option("config", check_config, "key=value config file")->required();

    auto* poin = app.add_subcommand("poincare", "box vs numeric Poincare constant");
    std::string poin_config;
    poin->add_option("config", poin_config, "key=value config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitUsage;
    }

    try {
        if (run->parsed()) return cmd_run(config_path);
        if (verify->parsed()) return cmd_verify(preset, verify_config, out_dir);
        if (rates->parsed()) return cmd_rates(csv_path, window, quantity, exponential);
        if (check->parsed()) return cmd_check_phi(check_config);
        if (poin->parsed()) return cmd_poincare(poin_config);
    } catch (const flab::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitUsage;
    } catch (const flab::SolverAbort& e) {
        std::fprintf(stderr, "solver abort: %s\n", e.what());
        return kExitSolverAbort;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitVerdictFail;
    }
    return kExitUsage;
}
