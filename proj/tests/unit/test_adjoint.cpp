#include <gtest/gtest.h>

#include <cmath>

#include "chemrep/adjoint.hpp"
#include "chemrep/cost_opt.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace chemrep;
using namespace chemrep::testing;

TEST(HSource, Examples) {
    auto g = line(4);
    for (double p : {1.2, 2.0, 3.5}) {
        EXPECT_EQ(h_source(0.0, p), 0.0);
        EXPECT_NEAR(h_source(1.0, p), 2.0, 1e-15);
        EXPECT_NEAR(h_source(-1.0, p), -2.0, 1e-15);
    }
    EXPECT_NEAR(h_source(4.0, 2.0), 256.0 + 4.0 * std::cbrt(256.0), 1e-11);
    EXPECT_NEAR(4.0 * std::cbrt(256.0), 25.398, 1e-3);
    EXPECT_THROW(h_source(Field(g), 1.0), Error);
}

TEST(HSource, IsOdd) {
    std::mt19937_64 rng(5);
    auto g = line(30);
    Field w = random_field(g, rng, -3.0, 3.0);
    for (double p : {1.5, 2.0, 2.5}) {
        Field a = h_source(w, p);
        Field b = h_source(-1.0 * w, p);
        for (std::size_t i = 0; i < w.size(); ++i) EXPECT_EQ(a[i], -b[i]);
    }
}

TEST(AdjointStep, ScalarReductionMatchesHandTranspose) {
    // Constant fields: diffusion and drift vanish, so every cell follows the
    // same scalar 2x2 update.
    auto g = line(3);
    const TimeGrid time{0.1, 1};
    const double dt = 0.1;
    ModelParams params;
    params.p = 2.5;
    params.logistic = true;
    params.r = 0.7;
    params.mu = 0.4;
    const double u = 1.3, v = 0.8, f = 0.6;
    Control ctl = Control::constant(g, time, f);
    const StateTrajectory traj = solve_state(Field(g, u), Field(g, v), ctl, params, time);
    const Linearization lin = linearize_at(traj, ctl, params);

    const double p = params.p;
    const double au = 1 / dt + params.mu * std::pow(u, p - 1);
    const double u1 = (1 / dt + params.r) * u / au;
    const double av = 1 / dt + 1 - f;
    const double v1 = (v / dt + std::pow(u1, p)) / av;
    ASSERT_NEAR(traj.u[1][1], u1, 1e-13);
    ASSERT_NEAR(traj.v[1][1], v1, 1e-13);

    const double duu = (1 / dt + params.r - params.mu * (p - 1) * std::pow(u, p - 2) * u1) / au;
    const double dvu = p * std::pow(u1, p - 1) * duu / av;
    const double dvv = 1 / (dt * av);
    const double dvf = v1 / av;

    const double s1 = 0.37, e1 = -1.21;
    const AdjointStepResult r = adjoint_step(lin.steps[0], Field(g, s1), Field(g, e1));
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(r.sigma[i], duu * s1 + dvu * e1, 1e-12);
        EXPECT_NEAR(r.eta[i], dvv * e1, 1e-12);
        EXPECT_NEAR(r.control[i], dvf * e1, 1e-12);
    }
}

TEST(AdjointStep, SingleStepTransposeOfTangentStep) {
    std::mt19937_64 rng(11);
    for (double p : {1.5, 2.0, 2.5}) {
        Scenario s = standard_scenario(p, 12, 6, true, DriftScheme::upwind, 0.03);
        const StateTrajectory traj = solve_state(s.u0, s.v0, s.f, s.params, s.time);
        const Linearization lin = linearize_at(traj, s.f, s.params);
        for (const StepJacobian& jac : lin.steps) {
            Field du = random_field(s.grid, rng), dv = random_field(s.grid, rng);
            Field df = random_field(s.grid, rng);
            Field sn = random_field(s.grid, rng), en = random_field(s.grid, rng);
            const StepResult t = tangent_step(jac, du, dv, df);
            const AdjointStepResult a = adjoint_step(jac, sn, en);
            double lhs = 0.0, rhs = 0.0;
            for (std::size_t i = 0; i < du.size(); ++i) {
                lhs += t.u[i] * sn[i] + t.v[i] * en[i];
                rhs += du[i] * a.sigma[i] + dv[i] * a.eta[i] + df[i] * a.control[i];
            }
            EXPECT_LE(relative_gap(lhs, rhs), 1e-12);
        }
    }
}

TEST(SolveAdjoint, ZeroSourcesGiveZeroAdjoint) {
    Scenario s = standard_scenario(2.0);
    const StateTrajectory traj = solve_state(s.u0, s.v0, s.f, s.params, s.time);
    const Linearization lin = linearize_at(traj, s.f, s.params);
    ControlProblem pr = tracking_problem(s, 0.0, 0.0, 0.3);
    pr.cost.gamma_u = 0.0;
    const AdjointPair a = solve_adjoint(lin, cost_state_derivative(traj, pr.cost, s.params.p));
    for (int n = 0; n <= s.time.steps; ++n) {
        EXPECT_EQ(lq_norm(a.sigma[n], infinity), 0.0);
        EXPECT_EQ(lq_norm(a.eta[n], infinity), 0.0);
    }
    const AdjointResidualReport rep = adjoint_residual_check(
        a, traj, s.f, s.params, cost_state_derivative(traj, pr.cost, s.params.p));
    EXPECT_EQ(rep.sigma_residual, 0.0);
    EXPECT_EQ(rep.eta_residual, 0.0);
}

TEST(SolveAdjoint, TerminalConditionsHoldExactly) {
    Scenario s = standard_scenario(1.5);
    const StateTrajectory traj = solve_state(s.u0, s.v0, s.f, s.params, s.time);
    const ControlProblem pr = tracking_problem(s, 1.0, 0.0, 0.2);
    const AdjointPair a = solve_adjoint(linearize_at(traj, s.f, s.params),
                                        cost_state_derivative(traj, pr.cost, s.params.p));
    EXPECT_EQ(lq_norm(a.sigma[static_cast<std::size_t>(s.time.steps)], infinity), 0.0);
    EXPECT_EQ(lq_norm(a.eta[static_cast<std::size_t>(s.time.steps)], infinity), 0.0);
    EXPECT_GT(lq_norm(a.sigma[0], infinity), 0.0);
}

TEST(SolveAdjoint, DenseOracleTranspose) {
    for (auto scheme : {DriftScheme::upwind, DriftScheme::central}) {
        Scenario s = standard_scenario(2.0, 8, 4, true, scheme, 0.04);
        const StateTrajectory traj = solve_state(s.u0, s.v0, s.f, s.params, s.time);
        const Linearization lin = linearize_at(traj, s.f, s.params);
        const DenseMaps maps = dense_maps(lin, traj);
        EXPECT_LE(transpose_error(maps), 1e-10);
        EXPECT_LE(dense_pairing_error(maps, 100, 17), 1e-10);
    }
}

TEST(SolveAdjoint, DualityIdentity) {
    for (double p : {1.5, 2.0, 2.5}) {
        Scenario s = standard_scenario(p);
        EXPECT_LE(duality_error(s, 20, 23), 1e-9) << "p = " << p;
        const StateTrajectory traj = solve_state(s.u0, s.v0, s.f, s.params, s.time);
        const ControlProblem pr = tracking_problem(s, 0.5, 0.0, 0.25);
        const AdjointSources src = cost_state_derivative(traj, pr.cost, p);
        EXPECT_LE(duality_error(s, 20, 29, &src), 1e-9) << "p = " << p;
    }
}

TEST(SolveAdjoint, ContinuousResidualShrinksUnderRefinement) {
    std::vector<double> res;
    for (int level = 0; level < 2; ++level) {
        const int cells = 32 << level;
        const int steps = 40 << (2 * level);
        Scenario s = standard_scenario(2.0, cells, steps, true, DriftScheme::central);
        const StateTrajectory traj = solve_state(s.u0, s.v0, s.f, s.params, s.time);
        const ControlProblem pr = tracking_problem(s, 1.0, 0.0, 0.2);
        const AdjointSources src = cost_state_derivative(traj, pr.cost, 2.0);
        const AdjointPair a = solve_adjoint(linearize_at(traj, s.f, s.params), src);
        const AdjointResidualReport rep = adjoint_residual_check(a, traj, s.f, s.params, src);
        res.push_back(rep.sigma_residual + rep.eta_residual);
        EXPECT_GT(rep.sigma_norm, 0.0);
    }
    RecordProperty("residual_ratio", std::to_string(res[0] / res[1]));
    std::printf("adjoint residual %.3e -> %.3e (ratio %.2f)\n", res[0], res[1], res[0] / res[1]);
    EXPECT_GE(res[0] / res[1], 1.7);
}
