#include "chemrep/checks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "chemrep/diagnostics.hpp"
#include "chemrep/errors.hpp"

namespace chemrep {

namespace {

Field bump(const GridPtr& g, double centre, double width, double amp, double base) {
    return Field::sample(g, [&](auto x) {
        double r2 = 0.0;
        for (int a = 0; a < g->dim(); ++a) r2 += (x[a] - centre) * (x[a] - centre);
        return base + amp * std::exp(-r2 / (width * width));
    });
}

}  // namespace

Setup standard_setup(double p, int cells, int steps, bool logistic, DriftScheme scheme,
                     double horizon) {
    Box box;
    box.lo = {0.2, 0, 0};
    box.hi = {0.85, 0, 0};
    const std::array<double, 1> len{1.0};
    const std::array<int, 1> n{cells};
    const GridPtr g = build_grid(1, len, n, box);
    Setup s;
    s.time = TimeGrid{horizon, steps};
    s.params.p = p;
    s.params.logistic = logistic;
    s.params.r = logistic ? 1.0 : 0.0;
    s.params.mu = logistic ? 0.5 : 0.0;
    s.params.drift_scheme = scheme;
    s.u0 = bump(g, 0.35, 0.12, 1.0, 0.2);
    s.v0 = bump(g, 0.62, 0.18, 0.8, 0.1);
    s.f = Control::zero(g, s.time);
    for (int k = 0; k < steps; ++k) {
        const double t = s.time.time(k);
        s.f[k] = Field::sample(
            g, [t](auto x) { return 0.5 * std::cos(2 * std::numbers::pi * x[0]) * (1 + t); });
    }
    s.f.apply_mask();
    return s;
}

ControlProblem tracking_problem(const Setup& s, double gamma_v, double gamma_f, double shift) {
    ControlProblem pr{s.u0, s.v0, s.params, s.time, {}};
    const StateTrajectory free =
        solve_state(s.u0, s.v0, Control::zero(s.u0.grid, s.time), s.params, s.time);
    pr.cost.gamma_u = 1.0;
    pr.cost.gamma_v = gamma_v;
    pr.cost.gamma_f = gamma_f;
    pr.cost.u_d = free.u;
    pr.cost.v_d = free.v;
    for (std::size_t n = 0; n < free.u.node_count(); ++n) {
        for (double& x : pr.cost.u_d[n].values) x += shift;
        for (double& x : pr.cost.v_d[n].values) x += shift;
    }
    return pr;
}

double relative_gap(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

Field random_field(const GridPtr& g, std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Field f(g);
    for (double& x : f.values) x = dist(rng);
    return f;
}

Control random_control(const GridPtr& g, TimeGrid t, std::mt19937_64& rng) {
    Control c = Control::zero(g, t);
    for (Field& s : c.slices) s = random_field(g, rng);
    c.apply_mask();
    return c;
}

DenseMaps dense_maps(const Linearization& lin, const StateTrajectory& traj) {
    const GridPtr& g = lin.grid;
    const std::size_t m = g->size();
    const std::size_t steps = lin.steps.size();
    std::vector<std::size_t> cells;
    for (std::size_t i = 0; i < m; ++i)
        if (g->in_control(i)) cells.push_back(i);
    const auto nc = static_cast<Eigen::Index>(cells.size() * steps);
    const auto ns = static_cast<Eigen::Index>(2 * m * steps);
    DenseMaps out{Eigen::MatrixXd::Zero(ns, nc), Eigen::MatrixXd::Zero(nc, ns)};
    auto state_row = [&](std::size_t n, std::size_t comp, std::size_t i) {
        return static_cast<Eigen::Index>(n * 2 * m + comp * m + i);
    };
    auto control_row = [&](std::size_t n, std::size_t k) {
        return static_cast<Eigen::Index>(n * cells.size() + k);
    };
    for (std::size_t n = 0; n < steps; ++n) {
        for (std::size_t k = 0; k < cells.size(); ++k) {
            Control e = Control::zero(g, lin.time);
            e[n][cells[k]] = 1.0;
            const TangentPair t = solve_tangent(lin, e);
            for (std::size_t q = 0; q < steps; ++q) {
                for (std::size_t i = 0; i < m; ++i) {
                    out.tangent(state_row(q, 0, i), control_row(n, k)) = t.u[q][i];
                    out.tangent(state_row(q, 1, i), control_row(n, k)) = t.v[q][i];
                }
            }
        }
    }
    for (std::size_t q = 0; q < steps; ++q) {
        for (std::size_t comp = 0; comp < 2; ++comp) {
            for (std::size_t i = 0; i < m; ++i) {
                AdjointSources s{Trajectory::filled(g, lin.time), Trajectory::filled(g, lin.time)};
                (comp == 0 ? s.su : s.sv)[q][i] = 1.0;
                const AdjointPair a = solve_adjoint(lin, s);
                for (std::size_t n = 0; n < steps; ++n)
                    for (std::size_t k = 0; k < cells.size(); ++k)
                        out.pullback(control_row(n, k), state_row(q, comp, i)) =
                            traj.v[n + 1][cells[k]] * a.eta_bar[n][cells[k]];
            }
        }
    }
    return out;
}

double transpose_error(const DenseMaps& maps) {
    const double scale = std::max(maps.tangent.cwiseAbs().maxCoeff(), 1e-300);
    return (maps.tangent.transpose() - maps.pullback).cwiseAbs().maxCoeff() / scale;
}

double dense_pairing_error(const DenseMaps& maps, int pairs, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < pairs; ++k) {
        Eigen::VectorXd f(maps.tangent.cols()), s(maps.tangent.rows());
        for (auto& x : f) x = unit(rng);
        for (auto& x : s) x = unit(rng);
        worst = std::max(worst, relative_gap(s.dot(maps.tangent * f), (maps.pullback * s).dot(f)));
    }
    return worst;
}

double duality_error(const Setup& s, int directions, std::mt19937_64& rng,
                     const AdjointSources* sources) {
    const GridPtr& g = s.u0.grid;
    const StateTrajectory traj = solve_state(s.u0, s.v0, s.f, s.params, s.time);
    const Linearization lin = linearize_at(traj, s.f, s.params);
    AdjointSources src{Trajectory::filled(g, s.time), Trajectory::filled(g, s.time)};
    if (sources != nullptr) {
        src = *sources;
    } else {
        for (int n = 0; n < s.time.steps; ++n) {
            src.su[n] = random_field(g, rng);
            src.sv[n] = random_field(g, rng);
        }
    }
    const AdjointPair adj = solve_adjoint(lin, src);
    const double dt = s.time.dt();
    double worst = 0.0;
    for (int k = 0; k < directions; ++k) {
        const Control d = random_control(g, s.time, rng);
        const TangentPair t = solve_tangent(lin, d);
        double lhs = 0.0, rhs = 0.0;
        for (int n = 0; n < s.time.steps; ++n) {
            lhs += dt * (inner(src.su[n], t.u[n]) + inner(src.sv[n], t.v[n]));
            Field gr(g);
            for (std::size_t i = 0; i < gr.size(); ++i)
                if (g->in_control(i)) gr[i] = traj.v[n + 1][i] * adj.eta_bar[n][i];
            rhs += dt * inner(gr, d[n]);
        }
        worst = std::max(worst, relative_gap(lhs, rhs));
    }
    return worst;
}

Setup random_upwind_setup(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> cells(6, 20);
    const int dim = unit(rng) < 0.5 ? 1 : 2;
    const std::array<double, 2> len{1.0, 1.0};
    const std::array<int, 2> n{cells(rng), cells(rng)};
    Box box;
    box.lo = {0.4 * unit(rng), 0.4 * unit(rng), 0};
    box.hi = {0.6 + 0.4 * unit(rng), 0.6 + 0.4 * unit(rng), 0};
    const GridPtr g = build_grid(dim, std::span(len).first(dim), std::span(n).first(dim), box);
    Setup s;
    s.params.p = 1.1 + 2.0 * unit(rng);
    s.params.logistic = unit(rng) < 0.7;
    s.params.r = 2.0 * unit(rng);
    s.params.mu = 2.0 * unit(rng);
    s.u0 = random_field(g, rng, 0.0, 2.0);
    s.v0 = random_field(g, rng, 0.0, 1.0);
    s.u0[0] = 0.0;
    const double level = -2.0 + 4.0 * unit(rng);
    int steps = 10;
    for (int attempt = 0;; ++attempt) {
        s.time = TimeGrid{0.1, steps};
        s.f = Control::zero(g, s.time);
        std::mt19937_64 local(rng());
        for (Field& slice : s.f.slices) slice = random_field(g, local, level - 1.0, level + 1.0);
        s.f.apply_mask();
        try {
            solve_state(s.u0, s.v0, s.f, s.params, s.time);
            return s;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::stability_violation || attempt > 12) throw;
            steps *= 2;
        }
    }
}

PositivityResult positivity_trials(int count, std::mt19937_64& rng) {
    PositivityResult out;
    out.min_u = infinity;
    out.min_v = infinity;
    for (int k = 0; k < count; ++k) {
        const Setup s = random_upwind_setup(rng);
        const StateTrajectory traj = solve_state(s.u0, s.v0, s.f, s.params, s.time);
        for (const Field& u : traj.u.nodes) out.min_u = std::min(out.min_u, u.min());
        for (const Field& v : traj.v.nodes) out.min_v = std::min(out.min_v, v.min());
        ++out.scenarios;
    }
    return out;
}

Setup energy_level(double p, bool logistic, int level) {
    return standard_setup(p, 32 << level, 160 << (2 * level), logistic, DriftScheme::central);
}

std::vector<double> eps_deviation(const Setup& s, const std::vector<double>& eps) {
    ModelParams base = s.params;
    base.eps = 0.0;
    const StateTrajectory ref = solve_state(s.u0, s.v0, s.f, base, s.time);
    std::vector<double> out;
    for (double e : eps) {
        ModelParams params = s.params;
        params.eps = e;
        const StateTrajectory traj = solve_state(s.u0, s.v0, s.f, params, s.time);
        Trajectory diff = traj.v;
        for (std::size_t n = 0; n < diff.node_count(); ++n) diff[n] -= ref.v[n];
        out.push_back(bochner_norm(diff, infinity, 2.0));
    }
    return out;
}

std::vector<CheckResult> run_verification(const VerifyOptions& opts) {
    std::mt19937_64 rng(opts.seed);
    std::vector<CheckResult> out;
    auto at_most = [&](std::string name, double value, double tol, std::string detail = {}) {
        out.push_back({std::move(name), value, tol, value <= tol, std::move(detail)});
    };
    auto at_least = [&](std::string name, double value, double tol, std::string detail = {}) {
        out.push_back({std::move(name), value, tol, value >= tol, std::move(detail)});
    };

    {
        const Setup s = standard_setup(2.0, 8, 4, true, DriftScheme::upwind, 0.04);
        const StateTrajectory traj = solve_state(s.u0, s.v0, s.f, s.params, s.time);
        const DenseMaps maps = dense_maps(linearize_at(traj, s.f, s.params), traj);
        at_most("transpose_matrix", transpose_error(maps), opts.transpose_tol);
        at_most("transpose_pairing", dense_pairing_error(maps, 100, rng), opts.transpose_tol);
    }

    for (double p : {1.5, 2.0, 2.5}) {
        const Setup s = standard_setup(p);
        const ControlProblem pr = tracking_problem(s, 0.5, 0.1, 0.2);
        double worst = 0.0;
        for (const GradientCheckRow& row : gradient_check(pr, s.f, 10, rng()))
            worst = std::max(worst, row.rel_error);
        const std::string tag = "p=" + std::to_string(p).substr(0, 3);
        at_most("gradient_" + tag, worst, opts.gradient_tol);
        at_most("duality_" + tag, duality_error(s, 20, rng), opts.duality_tol);

        const StateTrajectory traj = solve_state(s.u0, s.v0, s.f, s.params, s.time);
        const MassReport m = mass_report(traj, s.params);
        at_most("mass_residual_" + tag, m.residual_max, opts.mass_tol);
        at_most("mass_k0_" + tag, m.max_mass - m.k0, opts.k0_slack);
    }

    {
        Setup s = standard_setup(2.0, 32, 200, false, DriftScheme::upwind, 0.2);
        s.f = Control::zero(s.u0.grid, s.time);
        const StateTrajectory traj = solve_state(s.u0, s.v0, s.f, s.params, s.time);
        const double m0 = integrate(traj.u[0]);
        const double drift = std::abs(integrate(traj.u[200]) - m0) / m0;
        at_most("mass_conservation", drift, opts.mass_tol);
    }

    {
        const PositivityResult pos = positivity_trials(opts.positivity_scenarios, rng);
        at_least("positivity", std::min(pos.min_u, pos.min_v), 0.0,
                 std::to_string(pos.scenarios) + " scenarios");
    }

    for (const auto& [p, logistic] : {std::pair{1.5, false}, std::pair{2.5, true}}) {
        const EnergyStudy st =
            energy_study([&](int k) { return energy_level(p, logistic, k); }, 3);
        const double rate = *std::min_element(st.rates.begin(), st.rates.end());
        at_least(std::string("energy_rate_p=") + (p < 2 ? "1.5" : "2.5"), rate,
                 opts.energy_rate_min);
    }
    return out;
}

}  // namespace chemrep
