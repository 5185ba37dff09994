#include "chemrep/app/commands.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "chemrep/checks.hpp"
#include "chemrep/diagnostics.hpp"
#include "chemrep/errors.hpp"
#include "chemrep/field_io.hpp"

namespace chemrep::app {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

ordered_json num(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string snapshot_name(char var, int n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c_%05d.txt", var, n);
    return buf;
}

void prepare(const fs::path& out) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) fail(ErrorKind::io_error, "cannot create output directory " + out.string());
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream f(path);
    if (!f) fail(ErrorKind::io_error, "cannot write " + path.string());
    return f;
}

void write_json(const fs::path& path, const ordered_json& j) {
    std::ofstream f = open_out(path);
    f << j.dump(2) << '\n';
}

bool due(int n, int last, int stride) { return n % stride == 0 || n == last; }

void write_states(const fs::path& out, const StateTrajectory& traj, int stride) {
    const int last = static_cast<int>(traj.u.node_count()) - 1;
    for (int n = 0; n <= last; ++n) {
        if (!due(n, last, stride)) continue;
        write_field(out / snapshot_name('u', n), traj.u[n]);
        write_field(out / snapshot_name('v', n), traj.v[n]);
    }
}

void write_control(const fs::path& out, const Control& f, int stride) {
    const int last = static_cast<int>(f.steps()) - 1;
    for (int n = 0; n <= last; ++n)
        if (due(n, last, stride)) write_field(out / snapshot_name('f', n), f[n]);
}

ordered_json grid_json(const Grid& g) {
    ordered_json j;
    j["dim"] = g.dim();
    for (int a = 0; a < g.dim(); ++a) {
        j["cells"].push_back(g.cells(a));
        j["spacing"].push_back(g.spacing(a));
    }
    j["control_cells"] = g.control_count();
    return j;
}

ordered_json setup_json(const Setup& s) {
    ordered_json j;
    j["grid"] = grid_json(*s.u0.grid);
    j["time"] = {{"T", s.time.horizon}, {"N", s.time.steps}, {"dt", s.time.dt()}};
    const ModelParams& p = s.params;
    j["params"] = {{"p", p.p},
                   {"r", p.r},
                   {"mu", p.mu},
                   {"eps", p.eps},
                   {"logistic", p.logistic},
                   {"drift_scheme", p.drift_scheme == DriftScheme::upwind ? "upwind" : "central"},
                   {"linear_solver", p.linear_solver == LinearSolverKind::direct ? "direct" : "cg"}};
    return j;
}

ordered_json cost_json(const CostBreakdown& c) {
    return {{"term_u_5p2", num(c.term_u_5p2)}, {"term_u_103", num(c.term_u_103)},
            {"term_v", num(c.term_v)},         {"term_f", num(c.term_f)},
            {"total", num(c.total)}};
}

ordered_json diagnostics_json(const DiagnosticsReport& d) {
    ordered_json j;
    j["min_u"] = num(d.min_u);
    j["min_v"] = num(d.min_v);
    j["mass"] = {{"initial", num(d.mass.series.front())},
                 {"final", num(d.mass.series.back())},
                 {"max", num(d.mass.max_mass)},
                 {"k0", num(d.mass.k0)},
                 {"residual_max", num(d.mass.residual_max)}};
    j["energy"] = {{"initial", num(d.energy.energy.front())},
                   {"final", num(d.energy.energy.back())},
                   {"residual_l1", num(d.energy.residual_l1)}};
    j["norms"] = {{"u_L5p/2", num(d.serrin.u_5p2)},   {"u_L10/3", num(d.serrin.u_103)},
                  {"u_LinfLp", num(d.serrin.u_inf_p)}, {"u_L5p/3", num(d.serrin.u_5p3)},
                  {"u_L2p-1", num(d.serrin.u_2pm1)},   {"f", num(d.serrin.f_norm)}};
    j["exponents"] = {{"gamma", d.exponents.gamma},
                      {"alpha", d.exponents.alpha},
                      {"beta", d.exponents.beta},
                      {"mu", d.exponents.mu}};
    return j;
}

ordered_json check_json(const std::string& name, double value, double tol, bool passed) {
    return {{"name", name}, {"value", num(value)}, {"tolerance", num(tol)}, {"passed", passed}};
}

void log_check(std::ostream& log, const std::string& name, double value, double tol, bool passed) {
    log << (passed ? "PASS " : "FAIL ") << name << " value=" << value << " tol=" << tol << '\n';
}

ControlProblem control_problem(const RunConfig& cfg, const Setup& s) {
    return ControlProblem{s.u0, s.v0, s.params, s.time, make_cost(cfg, s)};
}

void write_history(const fs::path& path, const std::vector<PgdRecord>& history) {
    std::ofstream f = open_out(path);
    f << "iter,J,term_u_5p2,term_u_103,term_v,term_f,residual,step\n";
    for (const PgdRecord& r : history) {
        f << r.iter << ',' << fmt(r.cost.total) << ',' << fmt(r.cost.term_u_5p2) << ','
          << fmt(r.cost.term_u_103) << ',' << fmt(r.cost.term_v) << ',' << fmt(r.cost.term_f)
          << ',' << fmt(r.residual) << ',' << fmt(r.step) << '\n';
    }
}

bool monotone(const std::vector<PgdRecord>& history) {
    for (std::size_t k = 1; k < history.size(); ++k)
        if (!(history[k].cost.total < history[k - 1].cost.total)) return false;
    return true;
}

}  // namespace

int simulate(const RunConfig& cfg, std::ostream& log) {
    const Setup s = make_setup(cfg);
    prepare(cfg.out);
    const StateTrajectory traj = solve_state(s.u0, s.v0, s.f, s.params, s.time);
    const DiagnosticsReport d = diagnose(traj, s.f, s.params, cfg.cost.delta);

    write_states(cfg.out, traj, cfg.snapshot_stride);
    {
        std::ofstream ts = open_out(cfg.out / "timeseries.csv");
        write_time_series_csv(ts, d, s.time);
    }
    ordered_json rep;
    rep["command"] = "simulate";
    rep.update(setup_json(s));
    rep["diagnostics"] = diagnostics_json(d);

    if (!cfg.eps_sweep.empty()) {
        const std::vector<double> dev = eps_deviation(s, cfg.eps_sweep);
        std::ofstream f = open_out(cfg.out / "eps_sweep.csv");
        f << "eps,deviation\n";
        for (std::size_t k = 0; k < dev.size(); ++k) {
            f << fmt(cfg.eps_sweep[k]) << ',' << fmt(dev[k]) << '\n';
            rep["eps_sweep"].push_back({{"eps", cfg.eps_sweep[k]}, {"deviation", num(dev[k])}});
        }
    }
    write_json(cfg.out / "report.json", rep);
    log << "simulate: " << s.time.steps << " steps, min u " << d.min_u << ", mass residual "
        << d.mass.residual_max << ", energy residual " << d.energy.residual_l1 << '\n';
    return exit_code::ok;
}

int optimize(const RunConfig& cfg, bool check_gradient, std::ostream& log) {
    const Setup s = make_setup(cfg);
    const ControlProblem problem = control_problem(cfg, s);
    const AdmissibleBox box{cfg.cost.f_min, cfg.cost.f_max};
    box.validate();
    prepare(cfg.out);
    const Control f0 =
        project(make_control(cfg.cost.f0_spec, s.u0.grid, s.time, cfg.base_dir), box);
    const PgdOptions opts{cfg.cost.max_iters, cfg.cost.tol_J, cfg.cost.tol_opt, cfg.cost.s_init};

    auto save = [&](const PgdResult& res) {
        write_control(cfg.out, res.f, cfg.snapshot_stride);
        write_states(cfg.out, res.final.traj, cfg.snapshot_stride);
        write_history(cfg.out / "history.csv", res.history);
    };

    PgdResult res;
    try {
        res = pgd(f0, problem, box, opts);
    } catch (const LineSearchError& e) {
        save(e.partial());
        throw;
    }
    save(res);

    bool ok = true;
    ordered_json rep;
    rep["command"] = "optimize";
    rep.update(setup_json(s));
    rep["stop_reason"] = res.stop_reason;
    rep["iterations"] = res.history.back().iter;
    rep["cost"] = cost_json(res.final.cost);
    rep["optimality_residual"] = num(res.history.back().residual);
    const bool mono = monotone(res.history);
    rep["monotone"] = mono;
    ok = ok && mono;

    const ViReport vi = vi_check(res.f, res.final.gradient, box, cfg.vi_samples, cfg.seed);
    const double vi_floor = -cfg.vi_tol * (1.0 + vi.grad_norm);
    const bool vi_ok = vi.min_pairing >= vi_floor;
    rep["vi_check"] = {{"min_pairing", num(vi.min_pairing)},
                       {"grad_norm", num(vi.grad_norm)},
                       {"samples", vi.samples},
                       {"threshold", num(vi_floor)},
                       {"passed", vi_ok}};
    log_check(log, "vi_check", vi.min_pairing, vi_floor, vi_ok);
    ok = ok && vi_ok;

    // Checked at f0: near a stationary point the directional derivatives shrink
    // to the size of the difference-quotient noise.
    if (check_gradient) {
        const std::vector<GradientCheckRow> rows =
            gradient_check(problem, f0, cfg.gradient_directions, cfg.seed);
        double worst = 0.0;
        ordered_json jr = ordered_json::array();
        for (const GradientCheckRow& r : rows) {
            worst = std::max(worst, r.rel_error);
            jr.push_back({{"adjoint", num(r.adjoint)},
                          {"difference", num(r.difference)},
                          {"rel_error", num(r.rel_error)}});
        }
        const bool g_ok = worst <= cfg.verify.gradient_tol;
        rep["gradient_check"] = {{"at", "initial control"},
                                 {"rows", jr},
                                 {"max_rel_error", num(worst)},
                                 {"tolerance", cfg.verify.gradient_tol},
                                 {"passed", g_ok}};
        log_check(log, "gradient_check", worst, cfg.verify.gradient_tol, g_ok);
        ok = ok && g_ok;
    }
    rep["passed"] = ok;
    write_json(cfg.out / "report.json", rep);
    log << "optimize: " << res.stop_reason << " after " << res.history.back().iter
        << " iterations, J = " << res.final.cost.total << '\n';
    return ok ? exit_code::ok : exit_code::check_failed;
}

int verify(const RunConfig& cfg, std::ostream& log) {
    prepare(cfg.out);
    VerifyOptions opts = cfg.verify;
    opts.seed = cfg.seed;
    const std::vector<CheckResult> checks = run_verification(opts);
    bool ok = true;
    ordered_json rep;
    rep["command"] = "verify";
    rep["seed"] = cfg.seed;
    rep["checks"] = ordered_json::array();
    for (const CheckResult& c : checks) {
        ordered_json j = check_json(c.name, c.value, c.tolerance, c.passed);
        if (!c.detail.empty()) j["detail"] = c.detail;
        rep["checks"].push_back(j);
        log_check(log, c.name, c.value, c.tolerance, c.passed);
        ok = ok && c.passed;
    }
    rep["passed"] = ok;
    write_json(cfg.out / "report.json", rep);
    return ok ? exit_code::ok : exit_code::check_failed;
}

int mms(const RunConfig& cfg, std::ostream& log) {
    prepare(cfg.out);
    std::ofstream csv = open_out(cfg.out / "convergence.csv");
    csv << "problem,study,dim,level,h,dt,error,rate\n";
    bool ok = true;
    ordered_json rep;
    rep["command"] = "mms";
    rep["studies"] = ordered_json::array();
    for (MmsProblem problem : cfg.mms_problems) {
        for (int dim : cfg.mms_dims) {
            for (StudyKind kind : {StudyKind::space, StudyKind::time}) {
                const MmsStudy st = mms_standard_study(problem, kind, dim);
                for (const ConvergenceRow& r : st.rows) {
                    csv << to_string(problem) << ',' << to_string(kind) << ',' << dim << ','
                        << r.level << ',' << fmt(r.h) << ',' << fmt(r.dt) << ',' << fmt(r.error)
                        << ',' << (std::isnan(r.rate) ? std::string() : fmt(r.rate)) << '\n';
                }
                const double rate = st.rows.back().rate;
                const double need = kind == StudyKind::space ? cfg.space_rate_min : cfg.time_rate_min;
                const bool passed = rate >= need;
                const std::string name = std::string(to_string(problem)) + "_" +
                                         std::string(to_string(kind)) + "_" +
                                         std::to_string(dim) + "d";
                rep["studies"].push_back(check_json(name, rate, need, passed));
                log_check(log, name, rate, need, passed);
                ok = ok && passed;
            }
        }
    }
    rep["passed"] = ok;
    write_json(cfg.out / "report.json", rep);
    return ok ? exit_code::ok : exit_code::check_failed;
}

int seed(const RunConfig& cfg, std::ostream& log) {
    const Setup s = make_setup(cfg);
    prepare(cfg.out);
    const auto [f, traj] = seed_admissible(s.u0, s.v0, s.params, s.time, cfg.kappa);
    write_control(cfg.out, f, cfg.snapshot_stride);
    write_states(cfg.out, traj, cfg.snapshot_stride);
    const StateResidual res = residual_check(traj, f, s.params);
    const bool ok = res.max() <= cfg.seed_residual_tol;
    ordered_json rep;
    rep["command"] = "seed";
    rep.update(setup_json(s));
    rep["f_min"] = num(f.min());
    rep["f_max"] = num(f.max());
    rep["residual"] = {{"u", num(res.u)}, {"v", num(res.v)}};
    rep["check"] = check_json("seed_residual", res.max(), cfg.seed_residual_tol, ok);
    write_json(cfg.out / "report.json", rep);
    log_check(log, "seed_residual", res.max(), cfg.seed_residual_tol, ok);
    return ok ? exit_code::ok : exit_code::check_failed;
}

int run(const Invocation& inv, std::ostream& log, std::ostream& err) {
    fs::path out = inv.out.value_or("out");
    auto report = [&](const std::string& kind, const std::string& message) {
        const ordered_json j = {{"error", {{"kind", kind}, {"message", message}}}};
        err << j.dump() << '\n';
        std::error_code ec;
        fs::create_directories(out, ec);
        if (!ec) {
            std::ofstream f(out / "error.json");
            if (f) f << j.dump(2) << '\n';
        }
        return exit_code::error;
    };
    try {
        RunConfig cfg = inv.config ? load_config(*inv.config) : default_config();
        if (inv.out) cfg.out = *inv.out;
        out = cfg.out;
        if (inv.seed) cfg.seed = *inv.seed;
        if (inv.mms_problem) cfg.mms_problems = {parse_mms_problem(*inv.mms_problem)};
        const std::optional<Command> cmd = inv.command ? inv.command : cfg.command;
        if (!cmd) fail(ErrorKind::config_error, "no command given on the command line or in [run]");
        switch (*cmd) {
            case Command::simulate: return simulate(cfg, log);
            case Command::optimize: return optimize(cfg, inv.check_gradient, log);
            case Command::verify: return verify(cfg, log);
            case Command::mms: return mms(cfg, log);
            case Command::seed: return seed(cfg, log);
        }
        return exit_code::error;
    } catch (const Error& e) {
        return report(std::string(to_string(e.kind())), e.what());
    } catch (const std::exception& e) {
        return report("InternalError", e.what());
    }
}

}  // namespace chemrep::app
