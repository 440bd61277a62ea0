#ifndef FLAB_HARNESS_HPP
#define FLAB_HARNESS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "flab/analysis.hpp"
#include "flab/mesh.hpp"
#include "flab/nonlinearity.hpp"
#include "flab/solver.hpp"

namespace flab {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Seeded generator used for all random initial data, so cross-language runs
// agree. Update constants (splitmix64):
//   state += 0x9E3779B97F4A7C15
//   z = state; z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
struct SplitMix64 {
    std::uint64_t state = 0;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}
    std::uint64_t next();
    double uniform();  // in [0, 1)
};

struct ExperimentConfig {
    // mesh
    int dim = 1;
    std::vector<double> extents{1.0};
    std::vector<double> origins{0.0};
    std::vector<int> cells{64};
    // nonlinearity
    std::string nl_kind = "pure-power";
    double m = 2.0;
    double m1 = 2.0, m2 = 2.0;
    double a = 0.5, b = 2.0;
    double scale = 1.0;
    // initial datum
    std::string datum_kind = "constant";
    double amplitude = 1.0;
    double offset = 0.0;
    double width = 0.1;
    double mass = 1.0;
    double separation = 0.0;   // dipole center spacing
    double frequency = 1.0;    // odd-bump mode count
    double tau = 0.01;         // zkb / glued evaluation time
    double t0 = 0.1;           // glued: second profile time shift
    double peak = 0.25;        // glued: second profile sup at t0
    std::vector<double> center;
    std::string expression;    // custom-expression datum
    std::string bump_shape = "quadratic";
    bool renormalize = true;
    // solver
    SolverConfig solver;
    // analysis
    double q0 = 1.0;
    std::vector<double> p_set{1.0, 2.0, 4.0};
    double early_a = 0.0, early_b = 0.0;  // 0 = preset default
    double late_a = 0.0, late_b = 0.0;
    // output
    std::string series_path;
    std::string verdict_path;
    std::uint64_t seed = 1;
};

// Parses the key=value format ("block.key = value", '#' comments). Unknown
// keys, duplicates, type mismatches and constraint violations are reported
// with line numbers.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Canonical echo of the effective configuration, defaults filled in.
std::string format_config(const ExperimentConfig& cfg);

MeshPtr make_mesh_from(const ExperimentConfig& cfg);
Nonlinearity make_nonlinearity(const ExperimentConfig& cfg);
Field make_datum(const ExperimentConfig& cfg, const MeshPtr& mesh);

struct VerdictEntry {
    std::string preset;
    std::string theorem;
    double predicted = 0.0;
    double measured = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct PresetResult {
    std::vector<VerdictEntry> verdicts;
    int exit_code = 0;  // 0 pass, 1 verdict failure, 3 solver abort
    std::vector<std::string> series_files;
    std::string verdict_file;

    bool all_pass() const {
        for (const auto& v : verdicts)
            if (!v.pass) return false;
        return true;
    }
};

extern const std::vector<std::string> kPresetNames;

ExperimentConfig default_preset_config(const std::string& preset);

// Runs one verification preset, writing the time-series CSV(s) and the
// verdict file under out_dir.
PresetResult run_preset(const std::string& preset, const ExperimentConfig& cfg,
                        const std::string& out_dir);

// CSV with fixed columns t,mass,mean,min,max,l1,l2,l4,linf,energy_psi,
// 17 significant digits, '\n' line endings.
void emit_series(const TimeSeries& s, const std::string& path);
TimeSeries read_series_csv(const std::string& path);

void write_verdicts(const std::vector<VerdictEntry>& verdicts,
                    const std::string& path);

// Parses "expr" of x, y, pi, e with + - * / ^, parentheses and the usual
// unary functions; used by the custom-expression datum.
double eval_expression(const std::string& expr, double x, double y);

// Sweep parallelism cap: FLAB_THREADS, defaulting to machine parallelism.
int sweep_threads();

}  // namespace flab

#endif
