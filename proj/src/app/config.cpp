#include "chemrep/app/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "chemrep/errors.hpp"
#include "chemrep/field_io.hpp"

namespace chemrep::app {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad(const std::string& msg) { fail(ErrorKind::config_error, msg); }

std::string trim(std::string s) {
    auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
    return s;
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

double to_double(const std::string& text, const std::string& key) {
    const std::string t = trim(text);
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(t, &used);
    } catch (const std::exception&) {
        bad(key + ": expected a number, got '" + text + "'");
    }
    if (used != t.size() || std::isnan(x)) bad(key + ": expected a number, got '" + text + "'");
    return x;
}

long long to_integer(const std::string& text, const std::string& key) {
    const std::string t = trim(text);
    std::size_t used = 0;
    long long x = 0;
    try {
        x = std::stoll(t, &used);
    } catch (const std::exception&) {
        bad(key + ": expected an integer, got '" + text + "'");
    }
    if (used != t.size()) bad(key + ": expected an integer, got '" + text + "'");
    return x;
}

int to_int(const std::string& text, const std::string& key, long long lo) {
    const long long x = to_integer(text, key);
    if (x < lo || x > 1000000000LL) bad(key + ": out of range: " + text);
    return static_cast<int>(x);
}

bool to_bool(const std::string& text, const std::string& key) {
    const std::string t = lower(trim(text));
    if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
    if (t == "false" || t == "no" || t == "off" || t == "0") return false;
    bad(key + ": expected true or false, got '" + text + "'");
}

/// Items separated by commas and/or whitespace.
std::vector<std::string> split_list(const std::string& text) {
    std::string t = text;
    std::replace(t.begin(), t.end(), ',', ' ');
    std::istringstream in(t);
    std::vector<std::string> out;
    for (std::string item; in >> item;) out.push_back(item);
    return out;
}

std::vector<double> to_doubles(const std::string& text, const std::string& key) {
    std::vector<double> out;
    for (const std::string& s : split_list(text)) out.push_back(to_double(s, key));
    return out;
}

/// "name(a, b, ...)" -> name and the argument texts; nullopt when not a call.
std::optional<std::pair<std::string, std::vector<std::string>>> as_call(const std::string& text) {
    const std::string t = trim(text);
    const auto open = t.find('(');
    if (open == std::string::npos || t.back() != ')') return std::nullopt;
    return std::pair{lower(trim(t.substr(0, open))),
                     split_list(t.substr(open + 1, t.size() - open - 2))};
}

fs::path resolve(const std::string& spec, const fs::path& base) {
    fs::path p = trim(spec);
    return p.is_absolute() ? p : base / p;
}

struct Key {
    std::string section;
    std::string name;
    std::string fallback;
    std::string help;
    std::function<void(RunConfig&, const std::string&)> set;
};

const std::vector<Key>& schema() {
    static const std::vector<Key> keys = [] {
        std::vector<Key> k;
        auto add = [&](std::string sec, std::string name, std::string def, std::string help,
                       std::function<void(RunConfig&, const std::string&)> set) {
            k.push_back({std::move(sec), std::move(name), std::move(def), std::move(help),
                         std::move(set)});
        };

        add("run", "command", "", "simulate | optimize | verify | mms | seed (empty: from the command line)",
            [](RunConfig& c, const std::string& v) {
                if (trim(v).empty())
                    c.command.reset();
                else
                    c.command = parse_command(trim(v));
            });
        add("run", "out", "out", "output directory",
            [](RunConfig& c, const std::string& v) { c.out = trim(v); });
        add("run", "seed", "1", "seed of every randomized check",
            [](RunConfig& c, const std::string& v) {
                const long long s = to_integer(v, "run.seed");
                if (s < 0) bad("run.seed must be non-negative");
                c.seed = static_cast<std::uint64_t>(s);
            });
        add("run", "snapshot_stride", "10", "write u, v, f snapshots every this many steps",
            [](RunConfig& c, const std::string& v) {
                c.snapshot_stride = to_int(v, "run.snapshot_stride", 1);
            });

        add("scenario", "p", "2", "production and logistic exponent, > 1",
            [](RunConfig& c, const std::string& v) {
                c.scenario.params.p = to_double(v, "scenario.p");
            });
        add("scenario", "r", "0", "proliferation rate (logistic only)",
            [](RunConfig& c, const std::string& v) {
                c.scenario.params.r = to_double(v, "scenario.r");
            });
        add("scenario", "mu", "0", "competition coefficient (logistic only)",
            [](RunConfig& c, const std::string& v) {
                c.scenario.params.mu = to_double(v, "scenario.mu");
            });
        add("scenario", "logistic", "false", "include the reaction r u - mu u^p",
            [](RunConfig& c, const std::string& v) {
                c.scenario.params.logistic = to_bool(v, "scenario.logistic");
            });
        add("scenario", "eps", "0", "regularization parameter; 0 runs the plain scheme",
            [](RunConfig& c, const std::string& v) {
                c.scenario.params.eps = to_double(v, "scenario.eps");
            });
        add("scenario", "drift_scheme", "upwind", "upwind | central",
            [](RunConfig& c, const std::string& v) {
                const std::string s = lower(trim(v));
                if (s == "upwind")
                    c.scenario.params.drift_scheme = DriftScheme::upwind;
                else if (s == "central")
                    c.scenario.params.drift_scheme = DriftScheme::central;
                else
                    bad("scenario.drift_scheme: expected upwind or central, got '" + v + "'");
            });
        add("scenario", "linear_solver", "direct", "direct (sparse LDL^T) | cg",
            [](RunConfig& c, const std::string& v) {
                const std::string s = lower(trim(v));
                if (s == "direct")
                    c.scenario.params.linear_solver = LinearSolverKind::direct;
                else if (s == "cg")
                    c.scenario.params.linear_solver = LinearSolverKind::cg;
                else
                    bad("scenario.linear_solver: expected direct or cg, got '" + v + "'");
            });
        add("scenario", "T", "0.2", "time horizon",
            [](RunConfig& c, const std::string& v) { c.scenario.T = to_double(v, "scenario.T"); });
        add("scenario", "N", "40", "number of time steps",
            [](RunConfig& c, const std::string& v) { c.scenario.N = to_int(v, "scenario.N", 1); });
        add("scenario", "dim", "1", "space dimension, 1 to 3",
            [](RunConfig& c, const std::string& v) {
                c.scenario.dim = to_int(v, "scenario.dim", 1);
            });
        add("scenario", "lengths", "1", "domain side lengths, one per axis (one value is repeated)",
            [](RunConfig& c, const std::string& v) {
                c.scenario.lengths = to_doubles(v, "scenario.lengths");
            });
        add("scenario", "cells", "32", "cells per axis (one value is repeated)",
            [](RunConfig& c, const std::string& v) {
                c.scenario.cells.clear();
                for (const std::string& s : split_list(v))
                    c.scenario.cells.push_back(to_int(s, "scenario.cells", 1));
            });
        add("scenario", "control_box", "all",
            "all, or lo_1 hi_1 [lo_2 hi_2 [lo_3 hi_3]]: cells whose centres lie in the box",
            [](RunConfig& c, const std::string& v) {
                if (lower(trim(v)) == "all") {
                    c.scenario.control_box.reset();
                    return;
                }
                const std::vector<double> b = to_doubles(v, "scenario.control_box");
                if (b.empty() || b.size() % 2 != 0 || b.size() > 6)
                    bad("scenario.control_box: expected 'all' or lo/hi pairs, got '" + v + "'");
                Box box;
                for (std::size_t a = 0; a < b.size() / 2; ++a) {
                    box.lo[a] = b[2 * a];
                    box.hi[a] = b[2 * a + 1];
                }
                c.scenario.control_box = box;
            });
        add("scenario", "u0_spec", "gaussian(0.35, 0.12, 1, 0.2)", "initial u (field spec)",
            [](RunConfig& c, const std::string& v) { c.scenario.u0_spec = trim(v); });
        add("scenario", "v0_spec", "gaussian(0.62, 0.18, 0.8, 0.1)", "initial v (field spec)",
            [](RunConfig& c, const std::string& v) { c.scenario.v0_spec = trim(v); });
        add("scenario", "f_spec", "constant(0)", "time-constant control for simulate (field spec)",
            [](RunConfig& c, const std::string& v) { c.scenario.f_spec = trim(v); });
        add("scenario", "eps_sweep", "", "eps values compared against eps = 0 by simulate",
            [](RunConfig& c, const std::string& v) {
                c.eps_sweep = to_doubles(v, "scenario.eps_sweep");
                for (double e : c.eps_sweep)
                    if (!(e > 0.0)) bad("scenario.eps_sweep: values must be positive");
            });
        add("scenario", "kappa", "", "lower bound for v used by seed (empty: min v0)",
            [](RunConfig& c, const std::string& v) {
                if (trim(v).empty())
                    c.kappa.reset();
                else
                    c.kappa = to_double(v, "scenario.kappa");
            });

        add("cost", "gamma_u", "1", "weight of the u tracking terms, > 0",
            [](RunConfig& c, const std::string& v) { c.cost.gamma_u = to_double(v, "cost.gamma_u"); });
        add("cost", "gamma_v", "0.5", "weight of the v tracking term",
            [](RunConfig& c, const std::string& v) { c.cost.gamma_v = to_double(v, "cost.gamma_v"); });
        add("cost", "gamma_f", "0.01", "weight of the control cost",
            [](RunConfig& c, const std::string& v) { c.cost.gamma_f = to_double(v, "cost.gamma_f"); });
        add("cost", "delta", "0", "control norm exponent shift, L^{5/2 + delta} in space",
            [](RunConfig& c, const std::string& v) { c.cost.delta = to_double(v, "cost.delta"); });
        add("cost", "f_min", "-inf", "lower control bound",
            [](RunConfig& c, const std::string& v) { c.cost.f_min = to_double(v, "cost.f_min"); });
        add("cost", "f_max", "inf", "upper control bound",
            [](RunConfig& c, const std::string& v) { c.cost.f_max = to_double(v, "cost.f_max"); });
        add("cost", "f0_spec", "constant(0)", "initial control for optimize (field spec)",
            [](RunConfig& c, const std::string& v) { c.cost.f0_spec = trim(v); });
        add("cost", "target_spec", "uncontrolled(0.1)",
            "uncontrolled | uncontrolled(shift) | constant(u_d, v_d) | directory of u_/v_ snapshots",
            [](RunConfig& c, const std::string& v) { c.cost.target_spec = trim(v); });
        add("cost", "max_iters", "200", "iteration cap of the projected gradient method",
            [](RunConfig& c, const std::string& v) {
                c.cost.max_iters = to_int(v, "cost.max_iters", 0);
            });
        add("cost", "tol_J", "1e-12", "stop when the cost decreases by less than this",
            [](RunConfig& c, const std::string& v) { c.cost.tol_J = to_double(v, "cost.tol_J"); });
        add("cost", "tol_opt", "1e-6", "stop when the optimality residual is below this",
            [](RunConfig& c, const std::string& v) { c.cost.tol_opt = to_double(v, "cost.tol_opt"); });
        add("cost", "s_init", "200", "initial trial step of each line search",
            [](RunConfig& c, const std::string& v) { c.cost.s_init = to_double(v, "cost.s_init"); });

        add("verify", "transpose_tol", "1e-10", "dense tangent/adjoint transpose error",
            [](RunConfig& c, const std::string& v) {
                c.verify.transpose_tol = to_double(v, "verify.transpose_tol");
            });
        add("verify", "gradient_tol", "1e-5", "adjoint gradient vs central differences",
            [](RunConfig& c, const std::string& v) {
                c.verify.gradient_tol = to_double(v, "verify.gradient_tol");
            });
        add("verify", "duality_tol", "1e-9", "duality identity error",
            [](RunConfig& c, const std::string& v) {
                c.verify.duality_tol = to_double(v, "verify.duality_tol");
            });
        add("verify", "mass_tol", "1e-10", "per-step mass residual and mass drift",
            [](RunConfig& c, const std::string& v) {
                c.verify.mass_tol = to_double(v, "verify.mass_tol");
            });
        add("verify", "k0_slack", "1e-8", "allowed excess of the mass over its bound",
            [](RunConfig& c, const std::string& v) {
                c.verify.k0_slack = to_double(v, "verify.k0_slack");
            });
        add("verify", "energy_rate_min", "0.9", "minimum observed energy-residual rate in dt",
            [](RunConfig& c, const std::string& v) {
                c.verify.energy_rate_min = to_double(v, "verify.energy_rate_min");
            });
        add("verify", "positivity_scenarios", "50", "random upwind scenarios for positivity",
            [](RunConfig& c, const std::string& v) {
                c.verify.positivity_scenarios = to_int(v, "verify.positivity_scenarios", 1);
            });
        add("verify", "vi_tol", "1e-6", "optimize: min pairing must be >= -vi_tol (1 + ||grad||)",
            [](RunConfig& c, const std::string& v) { c.vi_tol = to_double(v, "verify.vi_tol"); });
        add("verify", "vi_samples", "100", "optimize: sampled admissible controls",
            [](RunConfig& c, const std::string& v) {
                c.vi_samples = to_int(v, "verify.vi_samples", 1);
            });
        add("verify", "gradient_directions", "10", "optimize --check-gradient: random directions",
            [](RunConfig& c, const std::string& v) {
                c.gradient_directions = to_int(v, "verify.gradient_directions", 1);
            });
        add("verify", "seed_residual_tol", "1e-10", "seed: residual of the seeded trajectory",
            [](RunConfig& c, const std::string& v) {
                c.seed_residual_tol = to_double(v, "verify.seed_residual_tol");
            });

        add("mms", "problems", "a1 a11 a19 nonlinear", "manufactured problems to study",
            [](RunConfig& c, const std::string& v) {
                c.mms_problems.clear();
                for (const std::string& s : split_list(v)) c.mms_problems.push_back(parse_mms_problem(s));
                if (c.mms_problems.empty()) bad("mms.problems: empty list");
            });
        add("mms", "dims", "1 2", "space dimensions to study",
            [](RunConfig& c, const std::string& v) {
                c.mms_dims.clear();
                for (const std::string& s : split_list(v)) {
                    const int d = to_int(s, "mms.dims", 1);
                    if (d > 2) bad("mms.dims: only 1 and 2 have standard studies");
                    c.mms_dims.push_back(d);
                }
                if (c.mms_dims.empty()) bad("mms.dims: empty list");
            });
        add("mms", "space_rate_min", "1.9", "minimum observed order in h on the last refinement",
            [](RunConfig& c, const std::string& v) {
                c.space_rate_min = to_double(v, "mms.space_rate_min");
            });
        add("mms", "time_rate_min", "0.9", "minimum observed order in dt on the last refinement",
            [](RunConfig& c, const std::string& v) {
                c.time_rate_min = to_double(v, "mms.time_rate_min");
            });
        return k;
    }();
    return keys;
}

RunConfig defaults_from_schema() {
    RunConfig c;
    for (const Key& k : schema()) k.set(c, k.fallback);
    return c;
}

void check(const RunConfig& c) {
    const ScenarioConfig& s = c.scenario;
    if (s.dim < 1 || s.dim > 3) bad("scenario.dim must be 1, 2 or 3");
    auto fits = [&](std::size_t n) { return n == 1 || n == static_cast<std::size_t>(s.dim); };
    if (!fits(s.lengths.size())) bad("scenario.lengths: need 1 or dim values");
    if (!fits(s.cells.size())) bad("scenario.cells: need 1 or dim values");
    if (!(s.T > 0.0) || !std::isfinite(s.T)) bad("scenario.T must be positive");
    if (!s.params.logistic && (s.params.r != 0.0 || s.params.mu != 0.0))
        bad("scenario.r and scenario.mu must be 0 unless logistic = true");
    try {
        ModelParams p = s.params;
        p.validate();
    } catch (const Error& e) {
        bad(std::string("scenario: ") + e.what());
    }
}

}  // namespace

Command parse_command(const std::string& name) {
    const std::string s = lower(trim(name));
    if (s == "simulate") return Command::simulate;
    if (s == "optimize") return Command::optimize;
    if (s == "verify") return Command::verify;
    if (s == "mms") return Command::mms;
    if (s == "seed") return Command::seed;
    bad("unknown command '" + name + "'");
}

std::string to_string(Command c) {
    switch (c) {
        case Command::simulate: return "simulate";
        case Command::optimize: return "optimize";
        case Command::verify: return "verify";
        case Command::mms: return "mms";
        case Command::seed: return "seed";
    }
    return "?";
}

RunConfig parse_config(std::istream& in, const fs::path& base_dir) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        bad(std::string("malformed config: ") + e.message() + " (line " +
            std::to_string(e.line()) + ")");
    }
    RunConfig c = defaults_from_schema();
    c.base_dir = base_dir;
    for (const auto& [section, body] : tree) {
        if (body.empty()) bad("key '" + section + "' outside a [block]");
        for (const auto& [name, value] : body) {
            const auto& keys = schema();
            const auto it = std::find_if(keys.begin(), keys.end(), [&](const Key& k) {
                return k.section == section && k.name == name;
            });
            if (it == keys.end()) {
                const bool known = std::any_of(keys.begin(), keys.end(),
                                               [&](const Key& k) { return k.section == section; });
                bad(known ? "unknown key '" + name + "' in [" + section + "]"
                          : "unknown block [" + section + "]");
            }
            it->set(c, value.data());
        }
    }
    check(c);
    return c;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::config_error, "cannot open config " + path.string());
    return parse_config(in, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

RunConfig default_config() {
    RunConfig c = defaults_from_schema();
    check(c);
    return c;
}

std::string config_reference() {
    std::ostringstream out;
    out << "# Every key with its default. Field specs: a number, constant(c),\n"
           "# gaussian(c_1, .., c_dim, width, amp[, base]) = base + amp exp(-|x - c|^2 / width^2),\n"
           "# or the path of a snapshot file. Relative paths resolve against the config file.\n";
    std::string section;
    for (const Key& k : schema()) {
        if (k.section != section) {
            section = k.section;
            out << "\n[" << section << "]\n";
        }
        out << "# " << k.help << '\n' << k.name << " = " << k.fallback << '\n';
    }
    return out.str();
}

GridPtr make_grid(const ScenarioConfig& sc) {
    std::vector<double> len(sc.dim);
    std::vector<int> cells(sc.dim);
    for (int a = 0; a < sc.dim; ++a) {
        len[a] = sc.lengths.size() == 1 ? sc.lengths[0] : sc.lengths[a];
        cells[a] = sc.cells.size() == 1 ? sc.cells[0] : sc.cells[a];
    }
    return build_grid(sc.dim, len, cells, sc.control_box);
}

Field make_field(const std::string& spec, const GridPtr& grid, const fs::path& base_dir) {
    const std::string t = trim(spec);
    if (t.empty()) bad("empty field spec");
    if (const auto call = as_call(t)) {
        const auto& [name, args] = *call;
        std::vector<double> a;
        for (const std::string& s : args) a.push_back(to_double(s, "field spec " + t));
        if (name == "constant") {
            if (a.size() != 1) bad("constant(c) takes one value: " + t);
            return Field(grid, a[0]);
        }
        if (name == "gaussian") {
            const std::size_t d = static_cast<std::size_t>(grid->dim());
            if (a.size() != d + 2 && a.size() != d + 3)
                bad("gaussian needs " + std::to_string(d) + " centre coordinates, width, amp[, base]: " + t);
            const double width = a[d], amp = a[d + 1], base = a.size() == d + 3 ? a[d + 2] : 0.0;
            if (!(width > 0.0)) bad("gaussian width must be positive: " + t);
            return Field::sample(grid, [&](auto x) {
                double r2 = 0.0;
                for (std::size_t i = 0; i < d; ++i) r2 += (x[i] - a[i]) * (x[i] - a[i]);
                return base + amp * std::exp(-r2 / (width * width));
            });
        }
        bad("unknown field spec '" + t + "'");
    }
    std::size_t used = 0;
    try {
        const double c = std::stod(t, &used);
        if (used == t.size()) return Field(grid, c);
    } catch (const std::exception&) {
    }
    const fs::path path = resolve(t, base_dir);
    if (!fs::is_regular_file(path)) bad("field file not found: " + path.string());
    try {
        Field f = read_field_on(path, grid);
        return f;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::grid_mismatch) throw;
        bad("cannot read field " + path.string() + ": " + e.what());
    }
}

Control make_control(const std::string& spec, const GridPtr& grid, TimeGrid time,
                     const fs::path& base_dir) {
    const Field slice = make_field(spec, grid, base_dir);
    Control f = Control::zero(grid, time);
    for (Field& s : f.slices) s = slice;
    f.apply_mask();
    return f;
}

Setup make_setup(const RunConfig& cfg) {
    Setup s;
    const GridPtr g = make_grid(cfg.scenario);
    s.time = TimeGrid{cfg.scenario.T, cfg.scenario.N};
    s.params = cfg.scenario.params;
    s.u0 = make_field(cfg.scenario.u0_spec, g, cfg.base_dir);
    s.v0 = make_field(cfg.scenario.v0_spec, g, cfg.base_dir);
    s.f = make_control(cfg.scenario.f_spec, g, s.time, cfg.base_dir);
    return s;
}

CostParams make_cost(const RunConfig& cfg, const Setup& s) {
    const CostConfig& cc = cfg.cost;
    CostParams cost;
    cost.gamma_u = cc.gamma_u;
    cost.gamma_v = cc.gamma_v;
    cost.gamma_f = cc.gamma_f;
    cost.delta = cc.delta;
    const GridPtr& g = s.u0.grid;
    const std::string t = trim(cc.target_spec);
    auto uncontrolled = [&](double shift) {
        const StateTrajectory free =
            solve_state(s.u0, s.v0, Control::zero(g, s.time), s.params, s.time);
        cost.u_d = free.u;
        cost.v_d = free.v;
        for (std::size_t n = 0; n < free.u.node_count(); ++n) {
            for (double& x : cost.u_d[n].values) x += shift;
            for (double& x : cost.v_d[n].values) x += shift;
        }
    };
    if (lower(t) == "uncontrolled") {
        uncontrolled(0.0);
    } else if (const auto call = as_call(t)) {
        const auto& [name, args] = *call;
        if (name == "uncontrolled" && args.size() == 1) {
            uncontrolled(to_double(args[0], "cost.target_spec"));
        } else if (name == "constant" && args.size() == 2) {
            cost.u_d = Trajectory::filled(g, s.time, to_double(args[0], "cost.target_spec"));
            cost.v_d = Trajectory::filled(g, s.time, to_double(args[1], "cost.target_spec"));
        } else {
            bad("cost.target_spec: unknown target '" + t + "'");
        }
    } else {
        const fs::path dir = resolve(t, cfg.base_dir);
        if (!fs::is_directory(dir)) bad("cost.target_spec: directory not found: " + dir.string());
        std::vector<Field> us, vs;
        for (int n = 0; n <= s.time.steps; ++n) {
            char name[32];
            std::snprintf(name, sizeof name, "_%05d.txt", n);
            const fs::path pu = dir / ("u" + std::string(name));
            const fs::path pv = dir / ("v" + std::string(name));
            if (!fs::is_regular_file(pu) || !fs::is_regular_file(pv))
                bad("cost.target_spec: missing target snapshot for node " + std::to_string(n) +
                    " in " + dir.string());
            us.push_back(read_field_on(pu, g));
            vs.push_back(read_field_on(pv, g));
        }
        cost.u_d = Trajectory(s.time, std::move(us));
        cost.v_d = Trajectory(s.time, std::move(vs));
    }
    try {
        cost.validate();
    } catch (const Error& e) {
        bad(std::string("cost: ") + e.what());
    }
    return cost;
}

}  // namespace chemrep::app
