#include "chemrep/linearized.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chemrep/errors.hpp"

namespace chemrep {

namespace {

template <class T>
const T* series_at(const std::vector<T>& series, int n, int steps, const char* name) {
    if (series.empty()) return nullptr;
    if (series.size() == 1) return &series.front();
    require(series.size() == static_cast<std::size_t>(steps) + 1, ErrorKind::grid_mismatch,
            std::string(name) + " needs 0, 1 or N+1 entries");
    return &series[static_cast<std::size_t>(n)];
}

}  // namespace

Linearization linearize_at(const StateTrajectory& traj, const Control& f,
                           const ModelParams& params) {
    params.validate();
    require(params.eps == 0.0, ErrorKind::invalid_argument,
            "linearization is only available for the unregularized stepper");
    const TimeGrid time = traj.u.time;
    require(traj.u.node_count() == static_cast<std::size_t>(time.steps) + 1 &&
                traj.v.node_count() == traj.u.node_count(),
            ErrorKind::grid_mismatch, "trajectory must hold N+1 nodes of u and v");
    require(f.steps() == static_cast<std::size_t>(time.steps), ErrorKind::grid_mismatch,
            "control must have one slice per time step");
    const GridPtr grid = traj.u.grid();
    for (std::size_t n = 0; n < traj.u.node_count(); ++n) {
        require_same_grid(traj.u[n], traj.u[0], "linearize_at");
        require_same_grid(traj.v[n], traj.u[0], "linearize_at");
    }
    for (const Field& s : f.slices) require_same_grid(s, traj.u[0], "linearize_at");

    const double p = params.p, r = params.rate(), mu = params.competition();
    const double dt = time.dt();
    Linearization lin;
    lin.grid = grid;
    lin.time = time;
    lin.coeffs.v_decay = 1.0;

    for (int n = 0; n <= time.steps; ++n) {
        const Field& u = traj.u[n];
        Field a(grid), d(grid), b1(grid), b2(grid);
        const Field& fn = f[static_cast<std::size_t>(std::min(n, time.steps - 1))];
        for (std::size_t i = 0; i < grid->size(); ++i) {
            const double up = pos_pow(u[i], p - 1.0);
            a[i] = -r + mu * p * up;
            d[i] = -u[i];
            b1[i] = grid->in_control(i) ? -fn[i] : 0.0;
            b2[i] = -p * up;
        }
        FaceField c = face_gradient(traj.v[n]);
        for (auto& axis : c.values) {
            for (double& x : axis) x = -x;
        }
        lin.coeffs.a.push_back(std::move(a));
        lin.coeffs.c.push_back(std::move(c));
        lin.coeffs.d.push_back(std::move(d));
        lin.coeffs.beta1.push_back(std::move(b1));
        lin.coeffs.beta2.push_back(std::move(b2));
    }

    lin.steps.reserve(static_cast<std::size_t>(time.steps));
    for (int n = 0; n < time.steps; ++n) {
        const Field& u = traj.u[n];
        const Field& v = traj.v[n];
        const Field& u_next = traj.u[n + 1];
        const Field& v_next = traj.v[n + 1];
        // Derivative of b_u in u, minus the derivative of the lagged damping
        // coefficient applied to u^{n+1}.
        std::vector<double> diag(grid->size());
        for (std::size_t i = 0; i < grid->size(); ++i) {
            const double lag = (mu != 0.0 && u[i] > 0.0)
                                   ? mu * (p - 1.0) * std::pow(u[i], p - 2.0) * u_next[i]
                                   : 0.0;
            diag[i] = 1.0 / dt + r - lag;
        }
        SparseMatrix k_uu = drift_matrix_in_u(v, params.drift_scheme) + diagonal_matrix(diag);
        SparseMatrix k_uv = drift_matrix_in_v(u, v, params.drift_scheme);
        std::vector<double> production(grid->size()), gain(grid->size());
        for (std::size_t i = 0; i < grid->size(); ++i) {
            production[i] = p * pos_pow(u_next[i], p - 1.0);
            gain[i] = grid->in_control(i) ? v_next[i] : 0.0;
        }
        lin.steps.push_back(StepJacobian{
            dt,
            SpdSolver(u_step_matrix(u, params, dt), params.linear_solver),
            SpdSolver(v_step_matrix(f[static_cast<std::size_t>(n)], dt), params.linear_solver),
            std::move(k_uu),
            std::move(k_uv),
            std::move(production),
            std::move(gain),
        });
    }
    return lin;
}

StepResult tangent_step(const StepJacobian& jac, const Field& du, const Field& dv,
                        const Field& df) {
    require_same_grid(du, dv, "tangent_step");
    require_same_grid(du, df, "tangent_step");
    std::vector<double> bu = multiply(jac.k_uu, du.values);
    const std::vector<double> cross = multiply(jac.k_uv, dv.values);
    for (std::size_t i = 0; i < bu.size(); ++i) bu[i] += cross[i];
    Field u_next(du.grid, jac.a_u.solve(bu));

    std::vector<double> bv(du.size());
    for (std::size_t i = 0; i < bv.size(); ++i) {
        bv[i] = dv[i] / jac.dt + jac.production[i] * u_next[i] + jac.control_gain[i] * df[i];
    }
    Field v_next(du.grid, jac.a_v.solve(bv));
    return {std::move(u_next), std::move(v_next)};
}

TangentPair solve_tangent(const Linearization& lin, const Control& direction) {
    require(direction.steps() == lin.steps.size(), ErrorKind::grid_mismatch,
            "direction must have one slice per time step");
    TangentPair out;
    out.u = Trajectory::filled(lin.grid, lin.time);
    out.v = Trajectory::filled(lin.grid, lin.time);
    for (std::size_t n = 0; n < lin.steps.size(); ++n) {
        StepResult s = tangent_step(lin.steps[n], out.u[n], out.v[n], direction[n]);
        out.u[n + 1] = std::move(s.u);
        out.v[n + 1] = std::move(s.v);
    }
    return out;
}

TangentPair solve_coupled_linear(const LinCoeffs& k, const GridPtr& grid, TimeGrid time,
                                 DriftScheme scheme, const std::optional<Field>& u0,
                                 const std::optional<Field>& v0) {
    time.validate();
    const int steps = time.steps;
    const double dt = time.dt();
    const Grid& g = *grid;

    TangentPair out;
    out.u = Trajectory::filled(grid, time);
    out.v = Trajectory::filled(grid, time);
    if (u0) {
        require_same_grid(*u0, out.u[0], "solve_coupled_linear");
        out.u[0] = *u0;
    }
    if (v0) {
        require_same_grid(*v0, out.v[0], "solve_coupled_linear");
        out.v[0] = *v0;
    }

    for (int n = 0; n < steps; ++n) {
        const Field* a = series_at(k.a, n + 1, steps, "a");
        const FaceField* c = series_at(k.c, n, steps, "c");
        const Field* d = series_at(k.d, n, steps, "d");
        const Field* b1 = series_at(k.beta1, n + 1, steps, "beta1");
        const Field* b2 = series_at(k.beta2, n + 1, steps, "beta2");
        const Field* gu0 = series_at(k.g_u0, n + 1, steps, "g_u0");
        const FaceField* gu1 = series_at(k.g_u1, n + 1, steps, "g_u1");
        const Field* gv = series_at(k.g_v, n + 1, steps, "g_v");
        const Field& un = out.u[n];
        const Field& vn = out.v[n];

        std::vector<double> react_u(g.size(), 0.0), react_v(g.size(), k.v_decay);
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (a) react_u[i] = (*a)[i];
            if (b1) react_v[i] += (*b1)[i];
            if (1.0 / dt + react_u[i] <= 0.0 || 1.0 / dt + react_v[i] <= 0.0) {
                fail(ErrorKind::stability_violation,
                     "implicit reaction makes the step operator indefinite at step " +
                         std::to_string(n));
            }
        }

        std::vector<double> bu(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) bu[i] = un[i] / dt;
        if (c) {
            if (scheme == DriftScheme::upwind) {
                std::vector<double> outflow(g.size(), 0.0);
                g.for_each_face([&](int axis, std::size_t face, std::size_t lo, std::size_t hi) {
                    const double q = c->values[axis][face] / g.spacing(axis);
                    outflow[q > 0.0 ? lo : hi] += std::abs(q);
                });
                for (std::size_t i = 0; i < g.size(); ++i) {
                    require(dt * outflow[i] <= 1.0, ErrorKind::stability_violation,
                            "upwind CFL bound fails for the transport velocity");
                }
            }
            const std::vector<double> t = multiply(transport_matrix(*c, scheme), un.values);
            for (std::size_t i = 0; i < g.size(); ++i) bu[i] -= t[i];
        }
        if (d) {
            const std::vector<double> t = multiply(diffusion_matrix(*d), vn.values);
            for (std::size_t i = 0; i < g.size(); ++i) bu[i] -= t[i];
        }
        if (gu0) {
            for (std::size_t i = 0; i < g.size(); ++i) bu[i] += (*gu0)[i];
        }
        if (gu1) {
            const Field div = face_divergence(*gu1);
            for (std::size_t i = 0; i < g.size(); ++i) bu[i] -= div[i];
        }
        Field u_next(grid, SpdSolver(shifted_laplacian(g, 1.0 / dt, react_u),
                                     LinearSolverKind::direct)
                               .solve(bu));

        std::vector<double> bv(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            bv[i] = vn[i] / dt;
            if (b2) bv[i] -= (*b2)[i] * u_next[i];
            if (gv) bv[i] += (*gv)[i];
        }
        Field v_next(grid, SpdSolver(shifted_laplacian(g, 1.0 / dt, react_v),
                                     LinearSolverKind::direct)
                               .solve(bv));
        out.u[n + 1] = std::move(u_next);
        out.v[n + 1] = std::move(v_next);
    }
    return out;
}

}  // namespace chemrep
