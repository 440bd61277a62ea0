#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "flab/analysis.hpp"
#include "flab/harness.hpp"
#include "flab/mesh.hpp"
#include "flab/nonlinearity.hpp"
#include "flab/reference.hpp"
#include "flab/solver.hpp"

namespace py = pybind11;
using namespace flab;

namespace {

py::array_t<double> field_values(const Field& f) {
    py::array_t<double> out(py::ssize_t(f.values.size()));
    std::copy(f.values.begin(), f.values.end(), out.mutable_data());
    return out;
}

Field field_from_values(MeshPtr mesh, py::array_t<double, py::array::c_style> v,
                        double time) {
    Field f;
    f.mesh = std::move(mesh);
    f.time = time;
    f.values.assign(v.data(), v.data() + v.size());
    if (int(f.values.size()) != f.mesh->cell_count())
        throw std::invalid_argument("values length must equal the cell count");
    return f;
}

py::dict record_dict(const SeriesRecord& r) {
    py::dict d;
    d["t"] = r.t;
    d["mass"] = r.mass;
    d["mean"] = r.mean;
    d["min"] = r.min;
    d["max"] = r.max;
    d["l1"] = r.l1;
    d["l2"] = r.l2;
    d["l4"] = r.l4;
    d["linf"] = r.linf;
    d["energy_psi"] = r.energy_psi;
    return d;
}

py::array_t<double> series_column(const TimeSeries& s, const std::string& name) {
    std::vector<std::pair<double, double>> pts =
        name == "t" ? series_quantity(s, Quantity::Mass)
                    : series_quantity(s, quantity_from_name(name));
    py::array_t<double> out(py::ssize_t(pts.size()));
    for (size_t i = 0; i < pts.size(); ++i)
        out.mutable_data()[i] = name == "t" ? pts[i].first : pts[i].second;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Finite-volume laboratory for the Neumann filtration equation";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<SolverAbort>(m, "SolverAbort");

    py::enum_<PhiKind>(m, "PhiKind")
        .value("PurePower", PhiKind::PurePower)
        .value("TwoPower", PhiKind::TwoPower);

    py::class_<Nonlinearity>(m, "Nonlinearity")
        .def_readonly("kind", &Nonlinearity::kind)
        .def_readonly("m", &Nonlinearity::m)
        .def_readonly("m1", &Nonlinearity::m1)
        .def_readonly("m2", &Nonlinearity::m2)
        .def_readonly("a", &Nonlinearity::a)
        .def_readonly("b", &Nonlinearity::b)
        .def_readonly("scale", &Nonlinearity::scale)
        .def("__repr__", [](const Nonlinearity& nl) {
            if (nl.kind == PhiKind::PurePower)
                return "<Nonlinearity pure power m=" + std::to_string(nl.m) + ">";
            return "<Nonlinearity two-power m1=" + std::to_string(nl.m1) +
                   " m2=" + std::to_string(nl.m2) + ">";
        });

    m.def("pure_power", &Nonlinearity::pure_power, py::arg("m"),
          py::arg("scale") = 1.0);
    m.def("two_power", &build_two_power, py::arg("m1"), py::arg("m2"),
          py::arg("a") = 0.5, py::arg("b") = 2.0, py::arg("scale") = 1.0);
    m.def("phi", py::vectorize([](const Nonlinearity* nl, double u) {
              return phi(*nl, u);
          }),
          py::arg("nl"), py::arg("u"));
    m.def("phi_prime", py::vectorize([](const Nonlinearity* nl, double u) {
              return phi_prime(*nl, u);
          }),
          py::arg("nl"), py::arg("u"));
    m.def("psi", py::vectorize([](const Nonlinearity* nl, double u) {
              return psi(*nl, u);
          }),
          py::arg("nl"), py::arg("u"));

    py::class_<GrowthReport>(m, "GrowthReport")
        .def_readonly("c1_best", &GrowthReport::c1_best)
        .def_readonly("c2_best", &GrowthReport::c2_best)
        .def_readonly("ok", &GrowthReport::ok);
    m.def("verify_growth_conditions", &verify_growth_conditions, py::arg("nl"),
          py::arg("m1"), py::arg("m2"), py::arg("u_max") = 1e3,
          py::arg("n") = 1000);

    py::class_<BoxMesh, std::shared_ptr<BoxMesh>>(m, "BoxMesh")
        .def_property_readonly("dim", [](const BoxMesh& b) { return b.dim; })
        .def_property_readonly("cells",
                               [](const BoxMesh& b) {
                                   return std::vector<int>(b.cells.begin(),
                                                           b.cells.begin() + b.dim);
                               })
        .def_property_readonly("h",
                               [](const BoxMesh& b) {
                                   return std::vector<double>(b.h.begin(),
                                                              b.h.begin() + b.dim);
                               })
        .def_property_readonly("cell_volume",
                               [](const BoxMesh& b) { return b.cell_volume; })
        .def("cell_count", &BoxMesh::cell_count)
        .def("centers", [](const BoxMesh& b) {
            py::array_t<double> out({py::ssize_t(b.cell_count()), py::ssize_t(b.dim)});
            for (int i = 0; i < b.cell_count(); ++i) {
                const auto c = b.center(i);
                for (int ax = 0; ax < b.dim; ++ax)
                    out.mutable_data()[i * b.dim + ax] = c[ax];
            }
            return out;
        });

    m.def(
        "make_mesh",
        [](int dim, std::vector<double> extents, std::vector<double> origins,
           std::vector<int> cells) -> MeshPtr {
            return std::make_shared<BoxMesh>(
                make_box_mesh(dim, extents, origins, cells));
        },
        py::arg("dim"), py::arg("extents"), py::arg("origins"), py::arg("cells"));

    py::class_<Field>(m, "Field")
        .def_property_readonly("values", &field_values)
        .def_readonly("time", &Field::time)
        .def_property_readonly("mesh", [](const Field& f) { return f.mesh; });

    m.def("field_from_values", &field_from_values, py::arg("mesh"),
          py::arg("values"), py::arg("time") = 0.0);
    m.def(
        "project_function",
        [](MeshPtr mesh, const std::function<double(double, double)>& f,
           double time) {
            return project_function(
                mesh, [&](std::array<double, 2> x) { return f(x[0], x[1]); }, time);
        },
        py::arg("mesh"), py::arg("f"), py::arg("time") = 0.0);
    m.def("integral", &integral, py::arg("field"));
    m.def("lp_norm", &lp_norm, py::arg("field"), py::arg("p"));

    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init<>())
        .def_readwrite("dt0", &SolverConfig::dt0)
        .def_readwrite("dt_growth", &SolverConfig::dt_growth)
        .def_readwrite("dt_max", &SolverConfig::dt_max)
        .def_readwrite("t_end", &SolverConfig::t_end)
        .def_readwrite("newton_tol", &SolverConfig::newton_tol)
        .def_readwrite("newton_max_iter", &SolverConfig::newton_max_iter)
        .def_readwrite("linear_tol", &SolverConfig::linear_tol)
        .def_readwrite("record_count", &SolverConfig::record_count)
        .def_readwrite("record_t0", &SolverConfig::record_t0)
        .def_readwrite("record_times", &SolverConfig::record_times);

    py::class_<StepReport>(m, "StepReport")
        .def_readonly("dt_used", &StepReport::dt_used)
        .def_readonly("newton_iters", &StepReport::newton_iters)
        .def_readonly("final_residual", &StepReport::final_residual)
        .def_readonly("linear_iters_total", &StepReport::linear_iters_total);

    m.def("apply_diffusion", &apply_diffusion, py::arg("field"), py::arg("nl"));
    m.def("step_backward_euler", &step_backward_euler, py::arg("field"),
          py::arg("nl"), py::arg("dt"), py::arg("cfg") = SolverConfig{});

    py::class_<TimeSeries>(m, "TimeSeries")
        .def_property_readonly("records",
                               [](const TimeSeries& s) {
                                   py::list out;
                                   for (const auto& r : s.records)
                                       out.append(record_dict(r));
                                   return out;
                               })
        .def("times",
             [](const TimeSeries& s) {
                 py::array_t<double> out(py::ssize_t(s.records.size()));
                 for (size_t i = 0; i < s.records.size(); ++i)
                     out.mutable_data()[i] = s.records[i].t;
                 return out;
             })
        .def("column", &series_column, py::arg("name"))
        .def("__len__", [](const TimeSeries& s) { return s.records.size(); });

    m.def(
        "run",
        [](const Field& u0, const Nonlinearity& nl, const SolverConfig& cfg,
           bool want_final) {
            Field final_state;
            TimeSeries s = run(u0, nl, cfg, want_final ? &final_state : nullptr);
            py::object tail = want_final ? py::cast(final_state)
                                         : py::object(py::none());
            return py::make_tuple(py::cast(s), tail);
        },
        py::arg("u0"), py::arg("nl"), py::arg("cfg"), py::arg("want_final") = false);

    py::class_<ZkbProfile>(m, "ZkbProfile")
        .def_readonly("m", &ZkbProfile::m)
        .def_readonly("N", &ZkbProfile::N)
        .def_readonly("mass", &ZkbProfile::mass)
        .def_readonly("alpha", &ZkbProfile::alpha)
        .def_readonly("beta", &ZkbProfile::beta)
        .def_readonly("kappa", &ZkbProfile::kappa)
        .def_readonly("C", &ZkbProfile::C);

    m.def(
        "zkb_exponents",
        [](double mm, int N) {
            const auto e = zkb_exponents(mm, N);
            return py::make_tuple(e.alpha, e.beta, e.kappa);
        },
        py::arg("m"), py::arg("N"));
    m.def("zkb_normalize", &zkb_normalize, py::arg("m"), py::arg("N"), py::arg("mass"));
    m.def("zkb_normalize_closed_form_1d", &zkb_normalize_closed_form_1d,
          py::arg("m"), py::arg("mass"));
    m.def(
        "make_zkb",
        [](double mm, int N, double mass, std::vector<double> x0) {
            Point c{0.0, 0.0};
            for (size_t i = 0; i < x0.size() && i < 2; ++i) c[i] = x0[i];
            return make_zkb(mm, N, mass, c);
        },
        py::arg("m"), py::arg("N"), py::arg("mass"),
        py::arg("x0") = std::vector<double>{0.0, 0.0});
    m.def(
        "zkb_eval",
        [](const ZkbProfile& p, std::vector<double> x, double t) {
            Point c{0.0, 0.0};
            for (size_t i = 0; i < x.size() && i < 2; ++i) c[i] = x[i];
            return zkb_eval(p, c, t);
        },
        py::arg("profile"), py::arg("x"), py::arg("t"));
    m.def("zkb_support_radius", &zkb_support_radius, py::arg("profile"), py::arg("t"));
    m.def("zkb_peak", &zkb_peak, py::arg("profile"), py::arg("t"));
    m.def(
        "delta_like",
        [](MeshPtr mesh, std::vector<double> x0, double width, double mass,
           const std::string& shape) {
            Point c{0.0, 0.0};
            for (size_t i = 0; i < x0.size() && i < 2; ++i) c[i] = x0[i];
            return delta_like(mesh, c, width, mass,
                              shape == "cosine" ? BumpShape::CosineCap
                                                : BumpShape::QuadraticCap);
        },
        py::arg("mesh"), py::arg("x0"), py::arg("width"), py::arg("mass"),
        py::arg("shape") = "quadratic");

    m.def("theta", &theta, py::arg("s"), py::arg("r"), py::arg("N"));
    m.def("moser_p", &moser_p, py::arg("k"), py::arg("q0"), py::arg("N"), py::arg("m1"));
    m.def("moser_p_recurrence", &moser_p_recurrence, py::arg("k"), py::arg("q0"),
          py::arg("N"), py::arg("m1"));

    py::class_<RatePrediction>(m, "RatePrediction")
        .def_readonly("short_exp", &RatePrediction::short_exp)
        .def_readonly("long_exp", &RatePrediction::long_exp)
        .def_readonly("crossover_t", &RatePrediction::crossover_t)
        .def_readonly("zero_mean_long_exp", &RatePrediction::zero_mean_long_exp)
        .def_readonly("zero_mean_short_exp", &RatePrediction::zero_mean_short_exp)
        .def_property_readonly("nonzero_mean_rate",
                               [](const RatePrediction& p) -> py::object {
                                   if (p.nonzero_mean_rate)
                                       return py::cast(*p.nonzero_mean_rate);
                                   return py::none();
                               });
    m.def("predict_rates", &predict_rates, py::arg("q0"), py::arg("N"),
          py::arg("m1"), py::arg("m2"), py::arg("u0_norm_q0"), py::arg("mean0"),
          py::arg("nl"), py::arg("C_P"));

    m.def(
        "poincare_constant_box",
        [](std::vector<double> extents, int dim) {
            return poincare_constant_box(extents, dim);
        },
        py::arg("extents"), py::arg("dim"));
    m.def(
        "poincare_constant_numeric",
        [](MeshPtr mesh) { return poincare_constant_numeric(*mesh); },
        py::arg("mesh"));

    py::class_<FitResult>(m, "FitResult")
        .def_readonly("slope", &FitResult::slope)
        .def_readonly("intercept", &FitResult::intercept)
        .def_readonly("r2", &FitResult::r2);
    py::class_<ExpFit>(m, "ExpFit")
        .def_readonly("rate", &ExpFit::rate)
        .def_readonly("r2", &ExpFit::r2);

    m.def(
        "fit_power_rate",
        [](const TimeSeries& s, const std::string& quantity, double t_a, double t_b) {
            return fit_power_rate(s, quantity_from_name(quantity), t_a, t_b);
        },
        py::arg("series"), py::arg("quantity"), py::arg("t_a"), py::arg("t_b"));
    m.def(
        "fit_exp_rate",
        [](std::vector<std::pair<double, double>> pts, double t_a, double t_b) {
            return fit_exp_rate(pts, t_a, t_b);
        },
        py::arg("points"), py::arg("t_a"), py::arg("t_b"));
    m.def("deviation_linf", &deviation_linf, py::arg("series"), py::arg("ubar"));
    m.def("envelope_ratio", &envelope_ratio, py::arg("series"), py::arg("pred"),
          py::arg("q0"), py::arg("u0_norm"));
    m.def(
        "detect_t_star",
        [](const TimeSeries& s) -> py::object {
            const auto t = detect_t_star(s);
            if (t) return py::cast(*t);
            return py::none();
        },
        py::arg("series"));

    m.def("parse_config", &parse_config, py::arg("text"));
    m.def("format_config", &format_config, py::arg("config"));
    m.def("make_mesh_from", &make_mesh_from, py::arg("config"));
    m.def("make_nonlinearity", &make_nonlinearity, py::arg("config"));
    m.def("make_datum", &make_datum, py::arg("config"), py::arg("mesh"));
    m.def("default_preset_config", &default_preset_config, py::arg("preset"));
    m.def("preset_names", [] { return kPresetNames; });
    m.def(
        "run_preset",
        [](const std::string& preset, const ExperimentConfig& cfg,
           const std::string& out_dir) {
            const PresetResult res = run_preset(preset, cfg, out_dir);
            py::list verdicts;
            for (const auto& v : res.verdicts) {
                py::dict d;
                d["preset"] = v.preset;
                d["theorem"] = v.theorem;
                d["predicted"] = v.predicted;
                d["measured"] = v.measured;
                d["tolerance"] = v.tolerance;
                d["pass"] = v.pass;
                verdicts.append(d);
            }
            py::dict out;
            out["verdicts"] = verdicts;
            out["exit_code"] = res.exit_code;
            out["verdict_file"] = res.verdict_file;
            out["series_files"] = res.series_files;
            return out;
        },
        py::arg("preset"), py::arg("config"), py::arg("out_dir") = ".");
    m.def("emit_series", &emit_series, py::arg("series"), py::arg("path"));
    m.def("read_series_csv", &read_series_csv, py::arg("path"));

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_readwrite("dim", &ExperimentConfig::dim)
        .def_readwrite("extents", &ExperimentConfig::extents)
        .def_readwrite("origins", &ExperimentConfig::origins)
        .def_readwrite("cells", &ExperimentConfig::cells)
        .def_readwrite("nl_kind", &ExperimentConfig::nl_kind)
        .def_readwrite("m", &ExperimentConfig::m)
        .def_readwrite("m1", &ExperimentConfig::m1)
        .def_readwrite("m2", &ExperimentConfig::m2)
        .def_readwrite("datum_kind", &ExperimentConfig::datum_kind)
        .def_readwrite("amplitude", &ExperimentConfig::amplitude)
        .def_readwrite("offset", &ExperimentConfig::offset)
        .def_readwrite("width", &ExperimentConfig::width)
        .def_readwrite("mass", &ExperimentConfig::mass)
        .def_readwrite("tau", &ExperimentConfig::tau)
        .def_readwrite("seed", &ExperimentConfig::seed)
        .def_readwrite("solver", &ExperimentConfig::solver)
        .def_readwrite("q0", &ExperimentConfig::q0);
}
