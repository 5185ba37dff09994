#include "chemrep/adjoint.hpp"

#include <cmath>

#include "chemrep/errors.hpp"

namespace chemrep {

double h_source(double w, double p) {
    if (w == 0.0) return 0.0;
    const double a = std::abs(w);
    return std::pow(a, (5.0 * p - 4.0) / 2.0) * w + std::pow(a, 4.0 / 3.0) * w;
}

Field h_source(const Field& w, double p) {
    require(p > 1.0, ErrorKind::invalid_argument, "h_source needs p > 1");
    Field out(w.grid);
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = h_source(w[i], p);
    return out;
}

AdjointStepResult adjoint_step(const StepJacobian& jac, const Field& sigma_next,
                               const Field& eta_next, const Field* su, const Field* sv) {
    require_same_grid(sigma_next, eta_next, "adjoint_step");
    const std::size_t m = sigma_next.size();
    Field eta_hat(eta_next.grid, jac.a_v.solve(eta_next.values));
    std::vector<double> bu(m);
    for (std::size_t i = 0; i < m; ++i) bu[i] = sigma_next[i] + jac.production[i] * eta_hat[i];
    const std::vector<double> sigma_hat = jac.a_u.solve(bu);

    Field sigma(sigma_next.grid, multiply_transpose(jac.k_uu, sigma_hat));
    Field eta(sigma_next.grid, multiply_transpose(jac.k_uv, sigma_hat));
    Field control(sigma_next.grid);
    for (std::size_t i = 0; i < m; ++i) {
        eta[i] += eta_hat[i] / jac.dt;
        control[i] = jac.control_gain[i] * eta_hat[i];
        if (su != nullptr) sigma[i] += jac.dt * (*su)[i];
        if (sv != nullptr) eta[i] += jac.dt * (*sv)[i];
    }
    return {std::move(sigma), std::move(eta), std::move(control), std::move(eta_hat)};
}

AdjointPair solve_adjoint(const Linearization& lin, const AdjointSources& sources) {
    const std::size_t steps = lin.steps.size();
    require(sources.su.node_count() >= steps && sources.sv.node_count() >= steps,
            ErrorKind::grid_mismatch, "adjoint sources need a value at every step");
    AdjointPair out;
    out.sigma = Trajectory::filled(lin.grid, lin.time);
    out.eta = Trajectory::filled(lin.grid, lin.time);
    out.eta_bar.assign(steps, Field(lin.grid));
    for (std::size_t k = steps; k-- > 0;) {
        AdjointStepResult s = adjoint_step(lin.steps[k], out.sigma[k + 1], out.eta[k + 1],
                                           &sources.su[k], &sources.sv[k]);
        out.sigma[k] = std::move(s.sigma);
        out.eta[k] = std::move(s.eta);
        s.eta_hat *= 1.0 / lin.steps[k].dt;
        out.eta_bar[k] = std::move(s.eta_hat);
    }
    return out;
}

namespace {

/// Cell-centred grad a . grad b from face products shared equally by both cells.
Field gradient_product(const Field& a, const Field& b) {
    const Grid& g = *a.grid;
    Field out(a.grid);
    g.for_each_face([&](int axis, std::size_t, std::size_t lo, std::size_t hi) {
        const double h = g.spacing(axis);
        const double q = (a[hi] - a[lo]) * (b[hi] - b[lo]) / (h * h);
        out[lo] += 0.5 * q;
        out[hi] += 0.5 * q;
    });
    return out;
}

}  // namespace

AdjointResidualReport adjoint_residual_check(const AdjointPair& adjoint,
                                             const StateTrajectory& traj, const Control& f,
                                             const ModelParams& params,
                                             const AdjointSources& sources) {
    const TimeGrid time = traj.u.time;
    const double dt = time.dt();
    const double p = params.p, r = params.rate(), mu = params.competition();
    const GridPtr& grid = traj.u.grid();
    AdjointResidualReport rep;
    double rs = 0.0, re = 0.0;
    for (int n = 1; n < time.steps; ++n) {
        const Field& s = adjoint.sigma[n];
        const Field& e = adjoint.eta[n];
        const Field& u = traj.u[n];
        const Field ls = laplacian(s), le = laplacian(e);
        const Field gp = gradient_product(s, traj.v[n]);
        const Field div = drift_divergence(u, s, DriftScheme::central);
        Field res_s(grid), res_e(grid);
        for (std::size_t i = 0; i < grid->size(); ++i) {
            const double up = pos_pow(u[i], p - 1.0);
            const double ds = -(adjoint.sigma[n + 1][i] - adjoint.sigma[n - 1][i]) / (2 * dt);
            const double de = -(adjoint.eta[n + 1][i] - adjoint.eta[n - 1][i]) / (2 * dt);
            const double fc = grid->in_control(i) ? f[static_cast<std::size_t>(n)][i] : 0.0;
            res_s[i] = ds - ls[i] + gp[i] - p * up * e[i] - r * s[i] + p * mu * up * s[i] -
                       sources.su[n][i];
            res_e[i] = de - le[i] - div[i] + e[i] - fc * e[i] - sources.sv[n][i];
        }
        rs += dt * inner(res_s, res_s);
        re += dt * inner(res_e, res_e);
    }
    rep.sigma_residual = std::sqrt(rs);
    rep.eta_residual = std::sqrt(re);
    rep.sigma_norm = bochner_norm(adjoint.sigma, 2.0, 2.0);
    rep.eta_norm = bochner_norm(adjoint.eta, 2.0, 2.0);
    return rep;
}

}  // namespace chemrep
