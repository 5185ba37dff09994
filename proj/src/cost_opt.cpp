#include "chemrep/cost_opt.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "chemrep/errors.hpp"

namespace chemrep {

namespace {

constexpr double armijo_c1 = 1e-4;
constexpr double shrink = 0.5;
constexpr int max_shrinks = 60;

double signed_pow(double x, double e) {
    if (x == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(x), e), x);
}

void check_targets(const Trajectory& target, const Trajectory& state, const char* name) {
    require(target.node_count() >= state.node_count() - 1, ErrorKind::grid_mismatch,
            std::string(name) + " needs a value at every node");
    require_same_grid(target[0], state[0], name);
}

}  // namespace

void CostParams::validate() const {
    require(gamma_u > 0.0, ErrorKind::invalid_argument, "gamma_u must be positive");
    require(gamma_v >= 0.0 && gamma_f >= 0.0, ErrorKind::invalid_argument,
            "gamma_v and gamma_f must be non-negative");
    require(delta >= 0.0, ErrorKind::invalid_argument, "delta must be non-negative");
}

void AdmissibleBox::validate() const {
    require(!std::isnan(f_min) && !std::isnan(f_max) && f_min <= f_max,
            ErrorKind::invalid_argument, "admissible box needs f_min <= f_max");
}

double control_region_norm(const Field& f, double q) {
    const Grid& g = *f.grid;
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (g.in_control(i)) s += std::pow(std::abs(f[i]), q);
    return std::pow(s * g.cell_volume(), 1.0 / q);
}

CostBreakdown eval_cost(const StateTrajectory& traj, const Control& f, const CostParams& cost,
                        double p) {
    check_targets(cost.u_d, traj.u, "u_d");
    check_targets(cost.v_d, traj.v, "v_d");
    require(f.steps() + 1 == traj.u.node_count(), ErrorKind::grid_mismatch,
            "control and trajectory disagree on the number of steps");
    require_same_grid(f[0], traj.u[0], "eval_cost");
    const double dt = traj.u.time.dt();
    const double q = 2.5 + cost.delta;
    CostBreakdown out;
    for (std::size_t n = 0; n < f.steps(); ++n) {
        const Field wu = traj.u[n] - cost.u_d[n];
        const Field wv = traj.v[n] - cost.v_d[n];
        out.term_u_5p2 += dt * std::pow(lq_norm(wu, 2.5 * p), 2.5 * p);
        out.term_u_103 += dt * std::pow(lq_norm(wu, 10.0 / 3.0), 10.0 / 3.0);
        out.term_v += dt * inner(wv, wv);
        out.term_f += dt * std::pow(control_region_norm(f[n], q), 2.5);
    }
    out.term_u_5p2 *= 2.0 / (5.0 * p);
    out.term_u_103 *= 0.3;
    out.term_v *= 0.5;
    out.term_f *= 0.4;
    out.total = cost.gamma_u * (out.term_u_5p2 + out.term_u_103) + cost.gamma_v * out.term_v +
                cost.gamma_f * out.term_f;
    return out;
}

AdjointSources cost_state_derivative(const StateTrajectory& traj, const CostParams& cost,
                                     double p) {
    check_targets(cost.u_d, traj.u, "u_d");
    check_targets(cost.v_d, traj.v, "v_d");
    const GridPtr& grid = traj.u.grid();
    AdjointSources out{Trajectory::filled(grid, traj.u.time), Trajectory::filled(grid, traj.u.time)};
    const std::size_t steps = traj.u.node_count() - 1;
    for (std::size_t n = 0; n < steps; ++n) {
        for (std::size_t i = 0; i < grid->size(); ++i) {
            const double w = traj.u[n][i] - cost.u_d[n][i];
            out.su[n][i] =
                cost.gamma_u * (signed_pow(w, (5.0 * p - 2.0) / 2.0) + signed_pow(w, 7.0 / 3.0));
            out.sv[n][i] = cost.gamma_v * (traj.v[n][i] - cost.v_d[n][i]);
        }
    }
    return out;
}

Control reduced_gradient(const Control& f, const StateTrajectory& traj,
                         const AdjointPair& adjoint, const CostParams& cost) {
    require(adjoint.eta_bar.size() == f.steps(), ErrorKind::grid_mismatch,
            "adjoint and control disagree on the number of steps");
    const Grid& g = *f.grid();
    const double q = 2.5 + cost.delta;
    Control out = Control::zero(f.grid(), f.time);
    for (std::size_t n = 0; n < f.steps(); ++n) {
        double scale = cost.gamma_f;
        if (cost.delta > 0.0) {
            const double norm = control_region_norm(f[n], q);
            scale = norm > 0.0 ? cost.gamma_f * std::pow(norm, -cost.delta) : 0.0;
        }
        const Field& v_next = traj.v[n + 1];
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!g.in_control(i)) continue;
            out[n][i] = scale * signed_pow(f[n][i], 1.5 + cost.delta) +
                        v_next[i] * adjoint.eta_bar[n][i];
        }
    }
    return out;
}

Control project(const Control& f, const AdmissibleBox& box) {
    Control out = f;
    for (Field& s : out.slices)
        for (double& x : s.values) x = std::clamp(x, box.f_min, box.f_max);
    out.apply_mask();
    return out;
}

CostBreakdown reduced_cost(const ControlProblem& problem, const Control& f) {
    const StateTrajectory traj = solve_state(problem.u0, problem.v0, f, problem.params, problem.time);
    return eval_cost(traj, f, problem.cost, problem.params.p);
}

GradientEvaluation evaluate_gradient(const ControlProblem& problem, const Control& f) {
    GradientEvaluation out;
    out.traj = solve_state(problem.u0, problem.v0, f, problem.params, problem.time);
    out.cost = eval_cost(out.traj, f, problem.cost, problem.params.p);
    const AdjointSources sources = cost_state_derivative(out.traj, problem.cost, problem.params.p);
    const Linearization lin = linearize_at(out.traj, f, problem.params);
    out.adjoint = solve_adjoint(lin, sources);
    out.gradient = reduced_gradient(f, out.traj, out.adjoint, problem.cost);
    return out;
}

double optimality_residual(const Control& f, const Control& grad, const AdmissibleBox& box) {
    const Control moved = project(axpy(f, -1.0, grad), box);
    return control_norm(axpy(f, -1.0, moved));
}

ViReport vi_check(const Control& f, const Control& grad, const AdmissibleBox& box, int samples,
                  std::uint64_t seed) {
    require(samples > 0, ErrorKind::invalid_argument, "vi_check needs at least one sample");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const Grid& g = *f.grid();
    ViReport rep;
    rep.grad_norm = control_norm(grad);
    rep.samples = samples;
    rep.min_pairing = infinity;
    Control sample = f;
    for (int k = 0; k < samples; ++k) {
        for (std::size_t n = 0; n < f.steps(); ++n) {
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (!g.in_control(i)) continue;
                const double lo = std::isfinite(box.f_min) ? box.f_min : f[n][i] - 1.0;
                const double hi = std::isfinite(box.f_max) ? box.f_max : f[n][i] + 1.0;
                sample[n][i] = lo + (hi - lo) * unit(rng);
            }
        }
        rep.min_pairing = std::min(rep.min_pairing, control_inner(grad, axpy(sample, -1.0, f)));
    }
    return rep;
}

PgdResult pgd(const Control& f0, const ControlProblem& problem, const AdmissibleBox& box,
              const PgdOptions& opts) {
    problem.cost.validate();
    box.validate();
    require(problem.cost.gamma_f > 0.0 || box.bounded(), ErrorKind::invalid_argument,
            "gamma_f = 0 requires a bounded admissible box");
    require(opts.max_iters >= 0 && opts.s_init > 0.0 && opts.tol_J >= 0.0 && opts.tol_opt >= 0.0,
            ErrorKind::invalid_argument, "invalid optimizer options");

    PgdResult res;
    res.f = project(f0, box);
    res.final = evaluate_gradient(problem, res.f);
    double residual = optimality_residual(res.f, res.final.gradient, box);
    res.history.push_back({0, res.final.cost, residual, 0.0});

    for (int it = 1;; ++it) {
        if (residual < opts.tol_opt) {
            res.stop_reason = "stationary";
            return res;
        }
        if (it > opts.max_iters) {
            res.stop_reason = "max_iters";
            return res;
        }
        const double j_old = res.final.cost.total;
        double s = opts.s_init;
        std::optional<Control> accepted;
        CostBreakdown accepted_cost;
        for (int k = 0; k <= max_shrinks; ++k, s *= shrink) {
            Control trial = project(axpy(res.f, -s, res.final.gradient), box);
            const Control d = axpy(trial, -1.0, res.f);
            const double slope = control_inner(res.final.gradient, d);
            if (!(slope < 0.0)) continue;
            try {
                const CostBreakdown c = reduced_cost(problem, trial);
                if (c.total <= j_old + armijo_c1 * slope && c.total < j_old) {
                    accepted = std::move(trial);
                    accepted_cost = c;
                    break;
                }
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::stability_violation &&
                    e.kind() != ErrorKind::solver_failure)
                    throw;
            }
        }
        if (!accepted) {
            res.stop_reason = "line_search_failure";
            throw LineSearchError("no step satisfied the Armijo condition after 60 shrinks",
                                  std::move(res));
        }
        res.f = std::move(*accepted);
        res.final = evaluate_gradient(problem, res.f);
        residual = optimality_residual(res.f, res.final.gradient, box);
        res.history.push_back({it, res.final.cost, residual, s});
        if (j_old - accepted_cost.total < opts.tol_J) {
            res.stop_reason = "stalled";
            return res;
        }
    }
}

StateResidual residual_check(const StateTrajectory& traj, const Control& f,
                             const ModelParams& params) {
    const double dt = traj.u.time.dt();
    require(f.steps() + 1 == traj.u.node_count() && traj.v.node_count() == traj.u.node_count(),
            ErrorKind::grid_mismatch, "control and trajectory disagree on the number of steps");
    StateResidual out;
    auto scaled = [dt](const SparseMatrix& a, const Field& x, const Field& b) {
        const std::vector<double> ax = multiply(a, x.values);
        double r = 0.0, xm = 1.0;
        for (std::size_t i = 0; i < ax.size(); ++i) {
            r = std::max(r, std::abs(dt * (ax[i] - b[i])));
            xm = std::max(xm, std::abs(x[i]));
        }
        return r / xm;
    };
    for (std::size_t n = 0; n < f.steps(); ++n) {
        const Field& u = traj.u[n];
        const Field& v = traj.v[n];
        require_same_grid(u, f[n], "residual_check");
        out.u = std::max(out.u, scaled(u_step_matrix(u, params, dt), traj.u[n + 1],
                                       u_step_rhs(u, v, params, dt)));
        out.v = std::max(out.v, scaled(v_step_matrix(f[n], dt), traj.v[n + 1],
                                       v_step_rhs(v, traj.u[n + 1], params, dt)));
    }
    return out;
}

std::vector<GradientCheckRow> gradient_check(const ControlProblem& problem, const Control& f,
                                             int directions, std::uint64_t seed, double step) {
    require(directions > 0 && step > 0.0, ErrorKind::invalid_argument,
            "gradient_check needs directions > 0 and step > 0");
    const GradientEvaluation base = evaluate_gradient(problem, f);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<GradientCheckRow> rows;
    for (int k = 0; k < directions; ++k) {
        Control d = Control::zero(f.grid(), f.time);
        for (Field& s : d.slices)
            for (double& x : s.values) x = unit(rng);
        d.apply_mask();
        const double jp = reduced_cost(problem, axpy(f, step, d)).total;
        const double jm = reduced_cost(problem, axpy(f, -step, d)).total;
        GradientCheckRow row;
        row.adjoint = control_inner(base.gradient, d);
        row.difference = (jp - jm) / (2.0 * step);
        row.rel_error = std::abs(row.adjoint - row.difference) /
                        std::max(std::abs(row.difference), 1e-300);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace chemrep
