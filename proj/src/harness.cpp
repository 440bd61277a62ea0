#include "flab/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>
#include <type_traits>

#include "flab/reference.hpp"

namespace flab {

std::uint64_t SplitMix64::next() {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double SplitMix64::uniform() {
    return double(next() >> 11) * 0x1.0p-53;
}

int sweep_threads() {
    if (const char* env = std::getenv("FLAB_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? int(hc) : 1;
}

// ---------------------------------------------------------------------------
// expression evaluator (datum.kind = custom-expression)

namespace {

struct ExprParser {
    const std::string& s;
    size_t pos = 0;
    double x, y;

    ExprParser(const std::string& str, double x_, double y_)
        : s(str), x(x_), y(y_) {}

    void skip() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
        skip();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& msg) {
        throw std::invalid_argument("expression: " + msg + " at position " +
                                    std::to_string(pos));
    }

    double parse() {
        const double v = expr();
        skip();
        if (pos != s.size()) fail("trailing input");
        return v;
    }

    double expr() {
        double v = term();
        for (;;) {
            if (eat('+')) v += term();
            else if (eat('-')) v -= term();
            else return v;
        }
    }
    double term() {
        double v = unary();
        for (;;) {
            if (eat('*')) v *= unary();
            else if (eat('/')) v /= unary();
            else return v;
        }
    }
    double unary() {
        if (eat('-')) return -unary();
        if (eat('+')) return unary();
        return power();
    }
    double power() {
        const double base = primary();
        if (eat('^')) return std::pow(base, unary());
        return base;
    }
    double primary() {
        skip();
        if (eat('(')) {
            const double v = expr();
            if (!eat(')')) fail("expected ')'");
            return v;
        }
        if (pos < s.size() &&
            (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.')) {
            char* end = nullptr;
            const double v = std::strtod(s.c_str() + pos, &end);
            pos = end - s.c_str();
            return v;
        }
        if (pos < s.size() && std::isalpha(static_cast<unsigned char>(s[pos]))) {
            size_t start = pos;
            while (pos < s.size() &&
                   (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
                ++pos;
            const std::string name = s.substr(start, pos - start);
            if (name == "x") return x;
            if (name == "y") return y;
            if (name == "pi") return M_PI;
            if (name == "e") return M_E;
            if (!eat('(')) fail("unknown identifier '" + name + "'");
            const double a = expr();
            double b = 0.0;
            bool two = false;
            if (eat(',')) {
                b = expr();
                two = true;
            }
            if (!eat(')')) fail("expected ')'");
            if (two) {
                if (name == "pow") return std::pow(a, b);
                if (name == "min") return std::min(a, b);
                if (name == "max") return std::max(a, b);
                fail("unknown two-argument function '" + name + "'");
            }
            if (name == "sin") return std::sin(a);
            if (name == "cos") return std::cos(a);
            if (name == "tan") return std::tan(a);
            if (name == "exp") return std::exp(a);
            if (name == "log") return std::log(a);
            if (name == "sqrt") return std::sqrt(a);
            if (name == "abs") return std::fabs(a);
            if (name == "tanh") return std::tanh(a);
            fail("unknown function '" + name + "'");
        }
        fail("expected a value");
    }
};

}  // namespace

double eval_expression(const std::string& expr, double x, double y) {
    ExprParser p(expr, x, y);
    return p.parse();
}

// ---------------------------------------------------------------------------
// key=value config

namespace {

struct RawConfig {
    // key -> (value, line)
    std::map<std::string, std::pair<std::string, int>> kv;

    bool has(const std::string& k) const { return kv.count(k) != 0; }
    int line(const std::string& k) const { return kv.at(k).second; }
};

[[noreturn]] void cfg_fail(int line, const std::string& msg) {
    throw ConfigError("line " + std::to_string(line) + ": " + msg);
}

double to_double(const RawConfig& raw, const std::string& k, const std::string& v) {
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        cfg_fail(raw.line(k), "key '" + k + "': expected a number, got '" + v + "'");
    if (!std::isfinite(d))
        cfg_fail(raw.line(k), "key '" + k + "': value must be finite");
    return d;
}

long to_int(const RawConfig& raw, const std::string& k, const std::string& v) {
    char* end = nullptr;
    const long i = std::strtol(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        cfg_fail(raw.line(k), "key '" + k + "': expected an integer, got '" + v + "'");
    return i;
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : v) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

const std::vector<std::string> kKnownKeys = {
    "mesh.dim", "mesh.extents", "mesh.origins", "mesh.cells",
    "nl.kind", "nl.m", "nl.m1", "nl.m2", "nl.a", "nl.b", "nl.scale",
    "datum.kind", "datum.amplitude", "datum.offset", "datum.width",
    "datum.mass", "datum.separation", "datum.frequency", "datum.tau",
    "datum.t0", "datum.peak", "datum.center", "datum.expression",
    "datum.shape", "datum.renormalize",
    "solver.dt0", "solver.dt_growth", "solver.dt_max", "solver.t_end",
    "solver.newton_tol", "solver.newton_max_iter", "solver.linear_tol",
    "solver.record_count", "solver.record_t0", "solver.record_times",
    "analysis.q0", "analysis.p_set", "analysis.early_window",
    "analysis.late_window",
    "output.series", "output.verdict", "seed"};

std::pair<double, double> parse_window(const RawConfig& raw, const std::string& k,
                                       const std::string& v) {
    const auto colon = v.find(':');
    if (colon == std::string::npos)
        cfg_fail(raw.line(k), "key '" + k + "': expected tA:tB");
    const double a = to_double(raw, k, trim(v.substr(0, colon)));
    const double b = to_double(raw, k, trim(v.substr(colon + 1)));
    if (!(a < b)) cfg_fail(raw.line(k), "key '" + k + "': need tA < tB");
    return {a, b};
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    RawConfig raw;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            cfg_fail(lineno, "expected key=value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) cfg_fail(lineno, "empty key");
        if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end())
            cfg_fail(lineno, "unknown key '" + key + "'");
        auto [it, inserted] = raw.kv.emplace(key, std::make_pair(value, lineno));
        if (!inserted)
            throw ConfigError("duplicate key '" + key + "' at lines " +
                              std::to_string(it->second.second) + " and " +
                              std::to_string(lineno));
    }

    for (const char* req : {"mesh.extents", "mesh.cells", "nl.kind",
                            "datum.kind", "solver.t_end"})
        if (!raw.has(req))
            throw ConfigError(std::string("missing mandatory key '") + req + "'");

    ExperimentConfig cfg;
    auto getd = [&](const std::string& k, double def) {
        return raw.has(k) ? to_double(raw, k, raw.kv.at(k).first) : def;
    };
    auto geti = [&](const std::string& k, long def) {
        return raw.has(k) ? to_int(raw, k, raw.kv.at(k).first) : def;
    };
    auto gets = [&](const std::string& k, const std::string& def) {
        return raw.has(k) ? raw.kv.at(k).first : def;
    };

    // mesh
    {
        const auto exts = split_list(raw.kv.at("mesh.extents").first);
        cfg.extents.clear();
        for (const auto& e : exts)
            cfg.extents.push_back(to_double(raw, "mesh.extents", e));
        cfg.dim = int(geti("mesh.dim", long(cfg.extents.size())));
        if (cfg.dim != 1 && cfg.dim != 2)
            cfg_fail(raw.has("mesh.dim") ? raw.line("mesh.dim") : raw.line("mesh.extents"),
                     "mesh.dim must be 1 or 2");
        if (int(cfg.extents.size()) != cfg.dim)
            cfg_fail(raw.line("mesh.extents"), "mesh.extents: expected one entry per axis");
        cfg.origins.assign(cfg.dim, 0.0);
        if (raw.has("mesh.origins")) {
            const auto os = split_list(raw.kv.at("mesh.origins").first);
            if (int(os.size()) != cfg.dim)
                cfg_fail(raw.line("mesh.origins"), "mesh.origins: expected one entry per axis");
            for (int i = 0; i < cfg.dim; ++i)
                cfg.origins[i] = to_double(raw, "mesh.origins", os[i]);
        }
        const auto cs = split_list(raw.kv.at("mesh.cells").first);
        if (int(cs.size()) != cfg.dim)
            cfg_fail(raw.line("mesh.cells"), "mesh.cells: expected one entry per axis");
        cfg.cells.clear();
        for (const auto& c : cs) {
            const long n = to_int(raw, "mesh.cells", c);
            if (n < 3) cfg_fail(raw.line("mesh.cells"), "mesh.cells: need at least 3 cells");
            cfg.cells.push_back(int(n));
        }
    }

    // nonlinearity
    cfg.nl_kind = gets("nl.kind", "pure-power");
    if (cfg.nl_kind != "pure-power" && cfg.nl_kind != "two-power")
        cfg_fail(raw.line("nl.kind"), "nl.kind must be pure-power or two-power");
    cfg.m = getd("nl.m", 2.0);
    cfg.m1 = getd("nl.m1", 2.0);
    cfg.m2 = getd("nl.m2", 2.0);
    cfg.a = getd("nl.a", 0.5);
    cfg.b = getd("nl.b", 2.0);
    cfg.scale = getd("nl.scale", 1.0);
    if (raw.has("nl.m") && !(cfg.m > 1.0)) cfg_fail(raw.line("nl.m"), "m must exceed 1");
    if (raw.has("nl.m1") && !(cfg.m1 > 1.0)) cfg_fail(raw.line("nl.m1"), "m1 must exceed 1");
    if (raw.has("nl.m2") && !(cfg.m2 > 1.0)) cfg_fail(raw.line("nl.m2"), "m2 must exceed 1");
    if (raw.has("nl.scale") && !(cfg.scale > 0.0))
        cfg_fail(raw.line("nl.scale"), "scale must be positive");

    // datum
    cfg.datum_kind = raw.kv.at("datum.kind").first;
    {
        static const std::vector<std::string> kinds = {
            "constant", "cosine-perturbation", "delta-like", "zkb", "glued",
            "odd-bump", "dipole", "custom-expression"};
        if (std::find(kinds.begin(), kinds.end(), cfg.datum_kind) == kinds.end())
            cfg_fail(raw.line("datum.kind"), "unknown datum.kind '" + cfg.datum_kind + "'");
    }
    cfg.amplitude = getd("datum.amplitude", 1.0);
    cfg.offset = getd("datum.offset", 0.0);
    cfg.width = getd("datum.width", 0.1);
    cfg.mass = getd("datum.mass", 1.0);
    cfg.separation = getd("datum.separation", 0.0);
    cfg.frequency = getd("datum.frequency", 1.0);
    cfg.tau = getd("datum.tau", 0.01);
    cfg.t0 = getd("datum.t0", 0.1);
    cfg.peak = getd("datum.peak", 0.25);
    cfg.expression = gets("datum.expression", "");
    cfg.bump_shape = gets("datum.shape", "quadratic");
    if (cfg.bump_shape != "quadratic" && cfg.bump_shape != "cosine")
        cfg_fail(raw.line("datum.shape"), "datum.shape must be quadratic or cosine");
    if (raw.has("datum.renormalize")) {
        const std::string v = raw.kv.at("datum.renormalize").first;
        if (v == "true" || v == "1") cfg.renormalize = true;
        else if (v == "false" || v == "0") cfg.renormalize = false;
        else cfg_fail(raw.line("datum.renormalize"), "expected true/false");
    }
    if (cfg.datum_kind == "custom-expression" && cfg.expression.empty())
        cfg_fail(raw.line("datum.kind"), "custom-expression needs datum.expression");
    cfg.center.assign(2, 0.0);
    {
        // default center: box midpoint
        for (int i = 0; i < cfg.dim; ++i)
            cfg.center[i] = cfg.origins[i] + 0.5 * cfg.extents[i];
        if (raw.has("datum.center")) {
            const auto cs = split_list(raw.kv.at("datum.center").first);
            if (int(cs.size()) != cfg.dim)
                cfg_fail(raw.line("datum.center"), "datum.center: expected one entry per axis");
            for (int i = 0; i < cfg.dim; ++i)
                cfg.center[i] = to_double(raw, "datum.center", cs[i]);
        }
    }

    // solver
    cfg.solver.t_end = to_double(raw, "solver.t_end", raw.kv.at("solver.t_end").first);
    if (!(cfg.solver.t_end > 0.0)) cfg_fail(raw.line("solver.t_end"), "t_end must be positive");
    cfg.solver.dt0 = getd("solver.dt0", 0.0);
    cfg.solver.dt_growth = getd("solver.dt_growth", 1.05);
    if (!(cfg.solver.dt_growth >= 1.0))
        cfg_fail(raw.line("solver.dt_growth"), "dt_growth must be >= 1");
    cfg.solver.dt_max = getd("solver.dt_max", 0.0);
    cfg.solver.newton_tol = getd("solver.newton_tol", 0.0);
    cfg.solver.newton_max_iter = int(geti("solver.newton_max_iter", 50));
    cfg.solver.linear_tol = getd("solver.linear_tol", 1e-12);
    cfg.solver.record_count = int(geti("solver.record_count", 100));
    cfg.solver.record_t0 = getd("solver.record_t0", 0.0);
    if (raw.has("solver.record_times")) {
        for (const auto& t : split_list(raw.kv.at("solver.record_times").first))
            cfg.solver.record_times.push_back(to_double(raw, "solver.record_times", t));
    }

    // analysis
    cfg.q0 = getd("analysis.q0", 1.0);
    if (!(cfg.q0 >= 1.0)) cfg_fail(raw.line("analysis.q0"), "q0 must be >= 1");
    if (raw.has("analysis.p_set")) {
        cfg.p_set.clear();
        for (const auto& p : split_list(raw.kv.at("analysis.p_set").first))
            cfg.p_set.push_back(to_double(raw, "analysis.p_set", p));
    }
    if (raw.has("analysis.early_window")) {
        auto [a, b] = parse_window(raw, "analysis.early_window",
                                   raw.kv.at("analysis.early_window").first);
        cfg.early_a = a;
        cfg.early_b = b;
    }
    if (raw.has("analysis.late_window")) {
        auto [a, b] = parse_window(raw, "analysis.late_window",
                                   raw.kv.at("analysis.late_window").first);
        cfg.late_a = a;
        cfg.late_b = b;
    }

    cfg.series_path = gets("output.series", "");
    cfg.verdict_path = gets("output.verdict", "");
    cfg.seed = std::uint64_t(geti("seed", 1));
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

namespace {

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class T>
std::string join_list(const std::vector<T>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        if constexpr (std::is_same_v<T, double>)
            out += fmt_g(v[i]);
        else
            out += std::to_string(v[i]);
    }
    return out;
}

}  // namespace

std::string format_config(const ExperimentConfig& c) {
    std::ostringstream o;
    o << "mesh.dim=" << c.dim << "\n";
    o << "mesh.extents=" << join_list(c.extents) << "\n";
    o << "mesh.origins=" << join_list(c.origins) << "\n";
    o << "mesh.cells=" << join_list(c.cells) << "\n";
    o << "nl.kind=" << c.nl_kind << "\n";
    if (c.nl_kind == "pure-power") {
        o << "nl.m=" << fmt_g(c.m) << "\n";
    } else {
        o << "nl.m1=" << fmt_g(c.m1) << "\n";
        o << "nl.m2=" << fmt_g(c.m2) << "\n";
        o << "nl.a=" << fmt_g(c.a) << "\n";
        o << "nl.b=" << fmt_g(c.b) << "\n";
    }
    o << "nl.scale=" << fmt_g(c.scale) << "\n";
    o << "datum.kind=" << c.datum_kind << "\n";
    o << "datum.amplitude=" << fmt_g(c.amplitude) << "\n";
    o << "datum.offset=" << fmt_g(c.offset) << "\n";
    o << "datum.width=" << fmt_g(c.width) << "\n";
    o << "datum.mass=" << fmt_g(c.mass) << "\n";
    o << "datum.separation=" << fmt_g(c.separation) << "\n";
    o << "datum.frequency=" << fmt_g(c.frequency) << "\n";
    o << "datum.tau=" << fmt_g(c.tau) << "\n";
    o << "datum.t0=" << fmt_g(c.t0) << "\n";
    o << "datum.peak=" << fmt_g(c.peak) << "\n";
    if (!c.center.empty())
        o << "datum.center=" << fmt_g(c.center[0])
          << (c.dim == 2 && c.center.size() > 1 ? "," + fmt_g(c.center[1]) : "")
          << "\n";
    if (!c.expression.empty()) o << "datum.expression=" << c.expression << "\n";
    o << "datum.shape=" << c.bump_shape << "\n";
    o << "datum.renormalize=" << (c.renormalize ? "true" : "false") << "\n";
    o << "solver.dt0=" << fmt_g(c.solver.dt0) << "\n";
    o << "solver.dt_growth=" << fmt_g(c.solver.dt_growth) << "\n";
    o << "solver.dt_max=" << fmt_g(c.solver.dt_max) << "\n";
    o << "solver.t_end=" << fmt_g(c.solver.t_end) << "\n";
    o << "solver.newton_tol=" << fmt_g(c.solver.newton_tol) << "\n";
    o << "solver.newton_max_iter=" << c.solver.newton_max_iter << "\n";
    o << "solver.linear_tol=" << fmt_g(c.solver.linear_tol) << "\n";
    o << "solver.record_count=" << c.solver.record_count << "\n";
    o << "solver.record_t0=" << fmt_g(c.solver.record_t0) << "\n";
    if (!c.solver.record_times.empty())
        o << "solver.record_times=" << join_list(c.solver.record_times) << "\n";
    o << "analysis.q0=" << fmt_g(c.q0) << "\n";
    o << "analysis.p_set=" << join_list(c.p_set) << "\n";
    if (c.early_b > 0.0)
        o << "analysis.early_window=" << fmt_g(c.early_a) << ":" << fmt_g(c.early_b) << "\n";
    if (c.late_b > 0.0)
        o << "analysis.late_window=" << fmt_g(c.late_a) << ":" << fmt_g(c.late_b) << "\n";
    if (!c.series_path.empty()) o << "output.series=" << c.series_path << "\n";
    if (!c.verdict_path.empty()) o << "output.verdict=" << c.verdict_path << "\n";
    o << "seed=" << c.seed << "\n";
    return o.str();
}

MeshPtr make_mesh_from(const ExperimentConfig& cfg) {
    return std::make_shared<BoxMesh>(
        make_box_mesh(cfg.dim, cfg.extents, cfg.origins, cfg.cells));
}

Nonlinearity make_nonlinearity(const ExperimentConfig& cfg) {
    if (cfg.nl_kind == "pure-power") return Nonlinearity::pure_power(cfg.m, cfg.scale);
    return build_two_power(cfg.m1, cfg.m2, cfg.a, cfg.b, cfg.scale);
}

Field make_datum(const ExperimentConfig& cfg, const MeshPtr& mesh) {
    Point c{0.0, 0.0};  // default: box midpoint
    for (int ax = 0; ax < mesh->dim; ++ax)
        c[ax] = size_t(ax) < cfg.center.size()
                    ? cfg.center[ax]
                    : mesh->origin[ax] + 0.5 * mesh->extent[ax];
    const BumpShape shape = cfg.bump_shape == "cosine" ? BumpShape::CosineCap
                                                       : BumpShape::QuadraticCap;
    if (cfg.datum_kind == "constant") {
        return project_function(mesh, [&](Point) { return cfg.amplitude; });
    }
    if (cfg.datum_kind == "cosine-perturbation") {
        // offset + amplitude * prod_ax cos(frequency * pi * (x - origin) / L)
        return project_function(mesh, [&](Point x) {
            double v = cfg.amplitude;
            for (int ax = 0; ax < mesh->dim; ++ax)
                v *= std::cos(cfg.frequency * M_PI *
                              (x[ax] - mesh->origin[ax]) / mesh->extent[ax]);
            return cfg.offset + v;
        });
    }
    if (cfg.datum_kind == "odd-bump") {
        // amplitude * prod_ax sin(frequency * pi * 2 (x - center) / L); odd
        // about the box center, so the discrete mean vanishes on symmetric
        // meshes; frequency counts half-wavelengths per half box
        return project_function(mesh, [&](Point x) {
            double v = cfg.amplitude;
            for (int ax = 0; ax < mesh->dim; ++ax)
                v *= std::sin(cfg.frequency * M_PI * 2.0 * (x[ax] - c[ax]) /
                              mesh->extent[ax]);
            return v;
        });
    }
    if (cfg.datum_kind == "delta-like")
        return delta_like(mesh, c, cfg.width, cfg.mass, shape);
    if (cfg.datum_kind == "dipole") {
        const double sep = cfg.separation > 0.0 ? cfg.separation : 0.5 * mesh->extent[0];
        Point cl = c, cr = c;
        cl[0] -= 0.5 * sep;
        cr[0] += 0.5 * sep;
        Field up = delta_like(mesh, cl, cfg.width, cfg.mass, shape);
        const Field down = delta_like(mesh, cr, cfg.width, cfg.mass, shape);
        for (size_t i = 0; i < up.values.size(); ++i) up.values[i] -= down.values[i];
        return up;
    }
    if (cfg.datum_kind == "zkb") {
        const ZkbProfile p = make_zkb(cfg.nl_kind == "pure-power" ? cfg.m : cfg.m2,
                                      mesh->dim, cfg.mass, c);
        Field f = project_function(
            mesh, [&](Point x) { return zkb_eval(p, x, cfg.tau); }, cfg.tau);
        if (cfg.renormalize) {
            const double got = integral(f);
            if (got > 0.0)
                for (double& v : f.values) v *= cfg.mass / got;
        }
        return f;
    }
    if (cfg.datum_kind == "glued") {
        const double m_star = cfg.nl_kind == "two-power" ? cfg.m2 : cfg.m;
        const double m_ell = cfg.nl_kind == "two-power" ? cfg.m1 : cfg.m;
        const ZkbProfile p_star = make_zkb(m_star, mesh->dim, cfg.mass, c);
        // second profile pinned by its sup at t0: C = (peak * t0^alpha)^(m-1)
        const ZkbExponents e = zkb_exponents(m_ell, mesh->dim);
        const double C = std::pow(cfg.peak * std::pow(cfg.t0, e.alpha), m_ell - 1.0);
        const ZkbProfile p_ell = make_zkb_from_C(m_ell, mesh->dim, C, c);
        return glued_datum(mesh, p_star, p_ell, cfg.tau, cfg.t0);
    }
    if (cfg.datum_kind == "custom-expression") {
        return project_function(mesh, [&](Point x) {
            return eval_expression(cfg.expression, x[0], x[1]);
        });
    }
    throw ConfigError("unknown datum kind: " + cfg.datum_kind);
}

// ---------------------------------------------------------------------------
// CSV + verdicts

static const char* kCsvHeader = "t,mass,mean,min,max,l1,l2,l4,linf,energy_psi";

void emit_series(const TimeSeries& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_series: cannot open " + path);
    out << kCsvHeader << "\n";
    for (const auto& r : s.records) {
        out << fmt_g(r.t) << ',' << fmt_g(r.mass) << ',' << fmt_g(r.mean) << ','
            << fmt_g(r.min) << ',' << fmt_g(r.max) << ',' << fmt_g(r.l1) << ','
            << fmt_g(r.l2) << ',' << fmt_g(r.l4) << ',' << fmt_g(r.linf) << ','
            << fmt_g(r.energy_psi) << "\n";
    }
    if (!out) throw std::runtime_error("emit_series: write failure on " + path);
}

TimeSeries read_series_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_series_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("read_series_csv: empty file " + path);
    if (trim(line) != kCsvHeader)
        throw std::runtime_error("read_series_csv: unexpected header in " + path);
    TimeSeries s;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cols = split_list(line);
        if (cols.size() != 10)
            throw std::runtime_error("read_series_csv: line " + std::to_string(lineno) +
                                     ": expected 10 columns");
        double v[10];
        for (int i = 0; i < 10; ++i) {
            char* end = nullptr;
            v[i] = std::strtod(cols[i].c_str(), &end);
            if (end == cols[i].c_str())
                throw std::runtime_error("read_series_csv: line " +
                                         std::to_string(lineno) + ": bad number");
        }
        s.records.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9]});
    }
    return s;
}

void write_verdicts(const std::vector<VerdictEntry>& verdicts,
                    const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_verdicts: cannot open " + path);
    bool first = true;
    for (const auto& v : verdicts) {
        if (!first) out << "\n";
        first = false;
        out << "preset=" << v.preset << "\n";
        out << "theorem=" << v.theorem << "\n";
        out << "predicted=" << fmt_g(v.predicted) << "\n";
        out << "measured=" << fmt_g(v.measured) << "\n";
        out << "tolerance=" << fmt_g(v.tolerance) << "\n";
        out << "pass=" << (v.pass ? "true" : "false") << "\n";
    }
}

}  // namespace flab
