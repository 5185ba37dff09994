#include "chemrep/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "chemrep/errors.hpp"

namespace chemrep {

ExponentTable exponent_table(double p) {
    require(p > 1.0, ErrorKind::invalid_argument, "exponent_table needs p > 1");
    ExponentTable t{};
    if (p <= 2.0)
        t.gamma = 5.0 * p / (3.0 + p);
    else if (p < 12.0 / 5.0)
        t.gamma = 25.0 * p / (18.0 + 5.0 * p);
    else
        t.gamma = 2.0;
    t.alpha = std::max(3.0, 3.0 * (p - 1.0));
    t.beta = std::max(5.0, 5.0 * (p - 1.0));
    t.mu = p <= 2.0 ? 10.0 * p / (7.0 * p - 6.0) : 2.5;
    return t;
}

double k0_bound(const Field& u0, const ModelParams& params) {
    const double m0 = integrate(u0);
    const double r = params.rate(), mu = params.competition();
    if (r == 0.0) return m0;
    if (mu == 0.0) return infinity;
    return std::max(m0, std::pow(r / mu, 1.0 / (params.p - 1.0)) * u0.grid->domain_volume());
}

MassReport mass_report(const StateTrajectory& traj, const ModelParams& params) {
    const double dt = traj.u.time.dt();
    const double r = params.rate(), mu = params.competition();
    MassReport rep;
    rep.k0 = k0_bound(traj.u[0], params);
    for (const Field& u : traj.u.nodes) rep.series.push_back(integrate(u));
    rep.max_mass = *std::max_element(rep.series.begin(), rep.series.end());
    for (std::size_t n = 0; n + 1 < traj.u.node_count(); ++n) {
        const Field& u = traj.u[n];
        const Field& un = traj.u[n + 1];
        double lagged = 0.0;
        if (mu != 0.0) {
            Field w(u.grid);
            for (std::size_t i = 0; i < w.size(); ++i) w[i] = pos_pow(u[i], params.p - 1.0) * un[i];
            lagged = integrate(w);
        }
        const double res =
            rep.series[n + 1] - rep.series[n] + dt * (mu * lagged - r * rep.series[n]);
        rep.residual.push_back(std::abs(res) / std::max(1.0, std::abs(rep.series[n])));
        rep.residual_max = std::max(rep.residual_max, rep.residual.back());
    }
    return rep;
}

namespace {

Field pos_power(const Field& u, double e) {
    Field out(u.grid);
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = pos_pow(u[i], e);
    return out;
}

Field clamp_negative(const Field& u) {
    Field out = u;
    for (double& x : out.values) x = std::max(x, 0.0);
    return out;
}

}  // namespace

double energy(const Field& u, const Field& v, double p) {
    const Field up = pos_power(u, 0.5 * p);
    return inner(up, up) / (p * (p - 1.0)) + h1_norm_sq(v) / (2.0 * p);
}

EnergyReport energy_report(const StateTrajectory& traj, const Control& f,
                           const ModelParams& params) {
    const double dt = traj.u.time.dt();
    const double p = params.p, r = params.rate(), mu = params.competition();
    EnergyReport rep;
    for (std::size_t n = 0; n < traj.u.node_count(); ++n)
        rep.energy.push_back(energy(traj.u[n], traj.v[n], p));
    for (std::size_t n = 0; n + 1 < traj.u.node_count(); ++n) {
        const Field& u = traj.u[n + 1];
        const Field& v = traj.v[n + 1];
        const Grid& g = *u.grid;
        const Field lv = laplacian(v);
        Field fv(u.grid);
        for (std::size_t i = 0; i < g.size(); ++i)
            if (g.in_control(i)) fv[i] = f[n][i] * v[i];
        const double mass_v = integrate(v);
        const double mass_up = integrate(pos_power(u, p));
        const double dissipation =
            4.0 / (p * p) * gradient_norm_sq(pos_power(u, 0.5 * p)) +
            (inner(lv, lv) + gradient_norm_sq(v) + mass_v * mass_v) / p +
            (mu != 0.0 ? mu / (p - 1.0) * integrate(pos_power(u, 2.0 * p - 1.0)) : 0.0);
        const double sources = r / (p - 1.0) * mass_up - inner(fv, lv) / p +
                               mass_v * (mass_up + integrate(fv)) / p;
        const double res = (rep.energy[n + 1] - rep.energy[n]) / dt + dissipation - sources;
        rep.residual.push_back(res);
        rep.residual_l1 += dt * std::abs(res);
    }
    return rep;
}

EnergyStudy energy_study(const std::function<Setup(int)>& make_level, int levels) {
    require(levels >= 2, ErrorKind::invalid_argument, "a refinement study needs two levels");
    EnergyStudy study;
    std::vector<double> dts;
    for (int k = 0; k < levels; ++k) {
        const Setup lv = make_level(k);
        const StateTrajectory traj = solve_state(lv.u0, lv.v0, lv.f, lv.params, lv.time);
        study.residual_l1.push_back(energy_report(traj, lv.f, lv.params).residual_l1);
        dts.push_back(lv.time.dt());
    }
    for (int k = 0; k + 1 < levels; ++k) {
        study.rates.push_back(std::log(study.residual_l1[k] / study.residual_l1[k + 1]) /
                              std::log(dts[k] / dts[k + 1]));
    }
    return study;
}

SerrinReport serrin_report(const StateTrajectory& traj, const Control& f, double p,
                           double delta) {
    Trajectory u = traj.u;
    for (Field& x : u.nodes) x = clamp_negative(x);
    SerrinReport rep;
    rep.u_5p2 = bochner_norm(u, 2.5 * p, 2.5 * p);
    rep.u_103 = bochner_norm(u, 10.0 / 3.0, 10.0 / 3.0);
    rep.u_inf_p = bochner_norm(u, infinity, p);
    rep.u_5p3 = bochner_norm(u, 5.0 * p / 3.0, 5.0 * p / 3.0);
    rep.u_2pm1 = bochner_norm(u, 2.0 * p - 1.0, 2.0 * p - 1.0);
    // Control slices live at t_0 .. t_{N-1}; the padded final node carries no weight.
    std::vector<Field> slices = f.slices;
    slices.emplace_back(f.grid());
    rep.f_norm = bochner_norm(Trajectory(f.time, std::move(slices)), 2.5, 2.5 + delta);
    return rep;
}

DiagnosticsReport diagnose(const StateTrajectory& traj, const Control& f,
                           const ModelParams& params, double delta) {
    DiagnosticsReport rep;
    rep.mass = mass_report(traj, params);
    rep.energy = energy_report(traj, f, params);
    rep.serrin = serrin_report(traj, f, params.p, delta);
    rep.min_u = infinity;
    rep.min_v = infinity;
    for (const Field& u : traj.u.nodes) rep.min_u = std::min(rep.min_u, u.min());
    for (const Field& v : traj.v.nodes) rep.min_v = std::min(rep.min_v, v.min());
    rep.exponents = exponent_table(params.p);
    return rep;
}

void write_time_series_csv(std::ostream& out, const DiagnosticsReport& report, TimeGrid time) {
    out << "t,mass,E,R\n";
    char buf[128];
    for (std::size_t n = 0; n < report.mass.series.size(); ++n) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,", time.time(static_cast<int>(n)),
                      report.mass.series[n], report.energy.energy[n]);
        out << buf;
        if (n < report.energy.residual.size()) {
            std::snprintf(buf, sizeof buf, "%.17g", report.energy.residual[n]);
            out << buf;
        }
        out << '\n';
    }
}

}  // namespace chemrep
