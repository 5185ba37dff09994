#include "chemrep/forward.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chemrep/errors.hpp"

namespace chemrep {

void ModelParams::validate() const {
    require(std::isfinite(p) && p > 1.0, ErrorKind::invalid_argument, "p must exceed 1");
    require(std::isfinite(r) && r >= 0.0, ErrorKind::invalid_argument, "r must be >= 0");
    require(std::isfinite(mu) && mu >= 0.0, ErrorKind::invalid_argument, "mu must be >= 0");
    require(std::isfinite(eps) && eps >= 0.0, ErrorKind::invalid_argument, "eps must be >= 0");
}

// Control ------------------------------------------------------------------

Control Control::zero(const GridPtr& grid, TimeGrid time) { return constant(grid, time, 0.0); }

Control Control::constant(const GridPtr& grid, TimeGrid time, double value) {
    Control c;
    c.time = time;
    c.slices.assign(static_cast<std::size_t>(time.steps), Field(grid, value));
    c.apply_mask();
    return c;
}

void Control::apply_mask() {
    for (Field& f : slices) {
        const Grid& g = *f.grid;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!g.in_control(i)) f.values[i] = 0.0;
        }
    }
}

bool Control::off_mask_zero() const {
    for (const Field& f : slices) {
        const Grid& g = *f.grid;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!g.in_control(i) && f.values[i] != 0.0) return false;
        }
    }
    return true;
}

double Control::max() const {
    double m = -infinity;
    for (const Field& f : slices) m = std::max(m, f.max());
    return m;
}

double Control::min() const {
    double m = infinity;
    for (const Field& f : slices) m = std::min(m, f.min());
    return m;
}

Control axpy(const Control& x, double a, const Control& y) {
    require(x.steps() == y.steps(), ErrorKind::grid_mismatch, "controls have different lengths");
    Control out = x;
    for (std::size_t n = 0; n < x.steps(); ++n) {
        require_same_grid(x[n], y[n], "axpy");
        for (std::size_t i = 0; i < x[n].size(); ++i) out[n].values[i] += a * y[n].values[i];
    }
    return out;
}

double control_inner(const Control& a, const Control& b) {
    require(a.steps() == b.steps(), ErrorKind::grid_mismatch, "controls have different lengths");
    double acc = 0.0;
    for (std::size_t n = 0; n < a.steps(); ++n) acc += inner(a[n], b[n]);
    return acc * a.time.dt();
}

double control_norm(const Control& a) { return std::sqrt(control_inner(a, a)); }

// Step building blocks -----------------------------------------------------

SparseMatrix u_step_matrix(const Field& u_n, const ModelParams& params, double dt) {
    const double mu = params.competition();
    std::vector<double> damping(u_n.size(), 0.0);
    if (mu != 0.0) {
        for (std::size_t i = 0; i < u_n.size(); ++i) {
            damping[i] = mu * pos_pow(u_n.values[i], params.p - 1.0);
        }
    }
    return shifted_laplacian(*u_n.grid, 1.0 / dt, damping);
}

Field u_step_rhs(const Field& u_n, const Field& v_n, const ModelParams& params, double dt) {
    Field b = drift_divergence(u_n, v_n, params.drift_scheme);
    const double c = 1.0 / dt + params.rate();
    for (std::size_t i = 0; i < b.size(); ++i) b.values[i] += c * u_n.values[i];
    return b;
}

SparseMatrix v_step_matrix(const Field& f_n, double dt) {
    const Grid& g = *f_n.grid;
    std::vector<double> reaction(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g.in_control(i)) reaction[i] = -f_n.values[i];
    }
    return shifted_laplacian(g, 1.0 / dt + 1.0, reaction);
}

Field v_step_rhs(const Field& v_n, const Field& u_next, const ModelParams& params, double dt) {
    Field b(v_n.grid);
    for (std::size_t i = 0; i < b.size(); ++i) {
        b.values[i] = v_n.values[i] / dt + pos_pow(u_next.values[i], params.p);
    }
    return b;
}

void check_step_stability(const Field& v_n, const Field& f_n, const ModelParams& params,
                          double dt) {
    const Grid& g = *v_n.grid;
    double f_max = -infinity;
    for (std::size_t i = 0; i < g.size(); ++i) {
        require(std::isfinite(f_n.values[i]), ErrorKind::invalid_argument, "control is not finite");
        if (g.in_control(i)) f_max = std::max(f_max, f_n.values[i]);
    }
    if (1.0 / dt + 1.0 - f_max <= 0.0) {
        fail(ErrorKind::stability_violation,
             "1/dt + 1 - max f = " + std::to_string(1.0 / dt + 1.0 - f_max) + " is not positive");
    }
    if (params.drift_scheme != DriftScheme::upwind) return;

    std::vector<double> outflow(g.size(), 0.0);
    g.for_each_face([&](int axis, std::size_t, std::size_t lo, std::size_t hi) {
        const double h = g.spacing(axis);
        const double k = (v_n.values[hi] - v_n.values[lo]) / (h * h);
        outflow[donor_is_upper(k) ? hi : lo] += std::abs(k);
    });
    const double bound = 1.0 + params.rate() * dt;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (dt * outflow[i] > bound) {
            fail(ErrorKind::stability_violation,
                 "upwind CFL bound fails at cell " + std::to_string(i) + ": dt * outflow = " +
                     std::to_string(dt * outflow[i]) + " > " + std::to_string(bound));
        }
    }
}

namespace {

void add_to(Field& b, const Field* s) {
    if (s == nullptr) return;
    require_same_grid(b, *s, "step source");
    for (std::size_t i = 0; i < b.size(); ++i) b.values[i] += s->values[i];
}

Field solve_with(const SparseMatrix& a, const Field& b, LinearSolverKind kind,
                 const Field* guess = nullptr) {
    SpdSolver solver(a, kind);
    std::span<const double> g;
    if (guess != nullptr) g = guess->values;
    return Field(b.grid, solver.solve(b.values, g));
}

Field u_half_step(const Field& u_n, const Field& v_n, const ModelParams& params, double dt,
                  const Field* source) {
    Field b = u_step_rhs(u_n, v_n, params, dt);
    add_to(b, source);
    return solve_with(u_step_matrix(u_n, params, dt), b, params.linear_solver, &u_n);
}

void require_nonnegative(const Field& w, const char* name) {
    for (double x : w.values) {
        require(std::isfinite(x), ErrorKind::invalid_argument,
                std::string(name) + " contains a non-finite value");
        require(x >= 0.0, ErrorKind::negative_initial_data,
                std::string(name) + " has a negative entry");
    }
}

void check_control_shape(const Control& f, const Field& u0, TimeGrid time) {
    require(f.steps() == static_cast<std::size_t>(time.steps), ErrorKind::grid_mismatch,
            "control must have one slice per time step");
    for (const Field& s : f.slices) require_same_grid(s, u0, "control slice");
}

}  // namespace

StepResult step_state(const Field& u_n, const Field& v_n, const Field& f_n,
                      const ModelParams& params, double dt, StepSources sources) {
    require_same_grid(u_n, v_n, "step_state");
    require_same_grid(u_n, f_n, "step_state");
    check_step_stability(v_n, f_n, params, dt);

    Field u_next = u_half_step(u_n, v_n, params, dt, sources.u);
    Field bv = v_step_rhs(v_n, u_next, params, dt);
    add_to(bv, sources.v);
    Field v_next = solve_with(v_step_matrix(f_n, dt), bv, params.linear_solver, &v_n);
    return {std::move(u_next), std::move(v_next)};
}

Field regularized_initial_w(const Field& v0, double eps) {
    if (eps == 0.0) return v0;
    Field w = laplacian(v0);
    for (std::size_t i = 0; i < w.size(); ++i) w.values[i] = v0.values[i] - eps * w.values[i];
    return w;
}

RegularizedStepResult step_state_regularized(const Field& u_n, const Field& w_n, const Field& f_n,
                                             const ModelParams& params, double dt) {
    require(params.eps >= 0.0, ErrorKind::invalid_argument, "eps must be >= 0");
    if (params.eps == 0.0) {
        StepResult s = step_state(u_n, w_n, f_n, params, dt);
        Field w = s.v;
        return {std::move(s.u), std::move(w), std::move(s.v)};
    }
    require_same_grid(u_n, w_n, "step_state_regularized");
    require_same_grid(u_n, f_n, "step_state_regularized");
    const Grid& g = *u_n.grid;

    const SparseMatrix smoothing = shifted_laplacian(g, 1.0, {}, params.eps);
    const Field v_n(u_n.grid, SpdSolver(smoothing, params.linear_solver).solve(w_n.values));
    check_step_stability(v_n, f_n, params, dt);
    Field u_next = u_half_step(u_n, v_n, params, dt, nullptr);

    // The w-equation written for v^{n+1}:
    //   ((1/dt + 1) I - L)(I - eps L) v - diag(f 1_c theta) v = w^n/dt + pos(u^{n+1})^p
    // where theta marks the cells with v >= 0, found by active-set iteration.
    const SparseMatrix base =
        SparseMatrix(shifted_laplacian(g, 1.0 / dt + 1.0, {}) * smoothing).pruned();
    Field rhs = v_step_rhs(w_n, u_next, params, dt);
    std::vector<std::uint8_t> active(g.size(), 1);
    Field v_next(u_n.grid);
    bool settled = false;
    for (int iter = 0; iter < 20 && !settled; ++iter) {
        std::vector<double> reaction(g.size(), 0.0);
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (g.in_control(i) && active[i]) reaction[i] = -f_n.values[i];
        }
        const SparseMatrix a = base + diagonal_matrix(reaction);
        v_next.values = SpdSolver(a, params.linear_solver).solve(rhs.values);
        settled = true;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!g.in_control(i) || f_n.values[i] == 0.0) continue;
            const std::uint8_t want = v_next.values[i] >= 0.0 ? 1 : 0;
            if (want != active[i]) {
                active[i] = want;
                settled = false;
            }
        }
    }
    require(settled, ErrorKind::solver_failure,
            "positive-part iteration of the regularized step did not settle");

    Field w_next(u_n.grid, multiply(smoothing, v_next.values));
    return {std::move(u_next), std::move(w_next), std::move(v_next)};
}

StateTrajectory solve_state(const Field& u0, const Field& v0, const Control& f,
                            const ModelParams& params, TimeGrid time, const SolveOptions& opts) {
    params.validate();
    time.validate();
    require_same_grid(u0, v0, "solve_state");
    check_control_shape(f, u0, time);
    require_nonnegative(u0, "u0");
    require_nonnegative(v0, "v0");
    const double dt = time.dt();
    const auto nodes = static_cast<std::size_t>(time.steps) + 1;

    StateTrajectory out;
    out.u.time = time;
    out.v.time = time;
    out.u.nodes.reserve(nodes);
    out.v.nodes.reserve(nodes);
    out.u.nodes.push_back(u0);
    out.v.nodes.push_back(v0);
    if (opts.observer) opts.observer(0, u0, v0);

    if (params.eps > 0.0) {
        require(opts.forcing == nullptr, ErrorKind::invalid_argument,
                "forcing is not supported by the regularized stepper");
        Trajectory w;
        w.time = time;
        w.nodes.reserve(nodes);
        w.nodes.push_back(regularized_initial_w(v0, params.eps));
        for (int n = 0; n < time.steps; ++n) {
            RegularizedStepResult s =
                step_state_regularized(out.u.nodes[n], w.nodes[n], f[n], params, dt);
            out.u.nodes.push_back(std::move(s.u));
            out.v.nodes.push_back(std::move(s.v));
            w.nodes.push_back(std::move(s.w));
            if (opts.observer) opts.observer(n + 1, out.u.nodes.back(), out.v.nodes.back());
        }
        out.w = std::move(w);
        return out;
    }

    for (int n = 0; n < time.steps; ++n) {
        StepSources sources;
        Field su, sv;
        if (opts.forcing != nullptr) {
            const double t = time.time(n + 1);
            if (opts.forcing->u) {
                su = opts.forcing->u(t);
                sources.u = &su;
            }
            if (opts.forcing->v) {
                sv = opts.forcing->v(t);
                sources.v = &sv;
            }
        }
        StepResult s = step_state(out.u.nodes[n], out.v.nodes[n], f[n], params, dt, sources);
        out.u.nodes.push_back(std::move(s.u));
        out.v.nodes.push_back(std::move(s.v));
        if (opts.observer) opts.observer(n + 1, out.u.nodes.back(), out.v.nodes.back());
    }
    return out;
}

std::pair<Control, StateTrajectory> seed_admissible(const Field& u0, const Field& v0,
                                                    const ModelParams& params, TimeGrid time,
                                                    std::optional<double> kappa) {
    params.validate();
    time.validate();
    require_same_grid(u0, v0, "seed_admissible");
    require(u0.grid->control_is_everywhere(), ErrorKind::invalid_argument,
            "seeding needs the control region to be the whole domain");
    require_nonnegative(u0, "u0");
    require_nonnegative(v0, "v0");
    const double k = kappa.value_or(v0.min());
    require(k > 0.0 && v0.min() >= k, ErrorKind::kappa_violation,
            "v0 must be bounded below by a positive kappa");

    const double dt = time.dt();
    const GridPtr& grid = u0.grid;
    const SpdSolver heat(shifted_laplacian(*grid, 1.0 / dt, {}), params.linear_solver);
    const Field no_control(grid, 0.0);

    StateTrajectory traj;
    traj.u.time = time;
    traj.v.time = time;
    traj.u.nodes.push_back(u0);
    traj.v.nodes.push_back(v0);
    Control f = Control::zero(grid, time);
    for (int n = 0; n < time.steps; ++n) {
        const Field& u_n = traj.u.nodes[n];
        const Field& v_n = traj.v.nodes[n];
        check_step_stability(v_n, no_control, params, dt);
        Field u_next = u_half_step(u_n, v_n, params, dt, nullptr);

        Field bv = v_n;
        bv *= 1.0 / dt;
        Field v_next(grid, heat.solve(bv.values, v_n.values));
        if (v_next.min() < 0.5 * k) {
            fail(ErrorKind::kappa_violation, "v fell below kappa/2 at step " +
                                                 std::to_string(n + 1));
        }
        for (std::size_t i = 0; i < grid->size(); ++i) {
            f[n].values[i] = 1.0 - pos_pow(u_next.values[i], params.p) / v_next.values[i];
        }
        traj.u.nodes.push_back(std::move(u_next));
        traj.v.nodes.push_back(std::move(v_next));
    }
    return {std::move(f), std::move(traj)};
}

}  // namespace chemrep
