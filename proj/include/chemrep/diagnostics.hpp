#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "chemrep/forward.hpp"

namespace chemrep {

struct ExponentTable {
    double gamma;  ///< integrability of grad u
    double alpha;
    double beta;
    double mu;     ///< integrability in time of d/dt u
};

/// Piecewise exponents; gamma jumps at p = 2 (5p/(3+p) up to 2 inclusive,
/// 25p/(18+5p) just above) and is continuous at p = 12/5.
ExponentTable exponent_table(double p);

/// L1 bound of u: int u0 without logistic terms or with r = 0;
/// max{int u0, (r/mu)^{1/(p-1)} |Omega|} for r, mu > 0; +infinity for r > 0 = mu.
double k0_bound(const Field& u0, const ModelParams& params);

struct MassReport {
    std::vector<double> series;    ///< int u^n
    std::vector<double> residual;  ///< per step, scaled by max(1, int u^n)
    double residual_max = 0.0;
    double k0 = 0.0;
    double max_mass = 0.0;
};

/// Discrete mass law of the stepper:
///   int u^{n+1} - int u^n + dt (mu int pos(u^n)^{p-1} u^{n+1} - r int u^n) = 0.
MassReport mass_report(const StateTrajectory& traj, const ModelParams& params);

/// (1/(p(p-1))) ||pos(u)^{p/2}||^2 + (1/(2p)) ||v||_{H1}^2.
double energy(const Field& u, const Field& v, double p);

struct EnergyReport {
    std::vector<double> energy;    ///< E^n at every node
    std::vector<double> residual;  ///< R^n for n < N
    double residual_l1 = 0.0;      ///< sum dt |R^n|
};

/// R^n = (E^{n+1} - E^n)/dt + D^{n+1} - S^{n+1} with the dissipation
///   D = (4/p^2)||grad u^{p/2}||^2 + (1/p)(||L v||^2 + ||grad v||^2 + (int v)^2)
///       + mu/(p-1) int u^{2p-1}
/// and the sources
///   S = r/(p-1) int u^p - (1/p) int f v 1_c L v + (1/p)(int v)(int u^p + int f v 1_c).
/// The chemotactic and production terms cancel exactly in the continuous
/// balance, so R^n measures discretisation error only.
EnergyReport energy_report(const StateTrajectory& traj, const Control& f,
                           const ModelParams& params);

struct EnergyStudy {
    std::vector<double> residual_l1;
    std::vector<double> rates;  ///< log(R_k / R_{k+1}) / log(dt_k / dt_{k+1})
};

EnergyStudy energy_study(const std::function<Setup(int)>& make_level, int levels);

struct SerrinReport {
    double u_5p2 = 0.0;   ///< ||u||_{L^{5p/2}(Q)}
    double u_103 = 0.0;   ///< ||u||_{L^{10/3}(Q)}
    double u_inf_p = 0.0; ///< ||u||_{L^inf(L^p)}
    double u_5p3 = 0.0;   ///< ||u||_{L^{5p/3}(Q)}
    double u_2pm1 = 0.0;  ///< ||u||_{L^{2p-1}(Q)}
    double f_norm = 0.0;  ///< ||f||_{L^{5/2}(L^{5/2+delta})}
};

/// Negative undershoots of u are clamped to 0 before the norms are taken.
SerrinReport serrin_report(const StateTrajectory& traj, const Control& f, double p,
                           double delta = 0.0);

struct DiagnosticsReport {
    MassReport mass;
    EnergyReport energy;
    SerrinReport serrin;
    double min_u = 0.0;
    double min_v = 0.0;
    ExponentTable exponents{};
};

DiagnosticsReport diagnose(const StateTrajectory& traj, const Control& f,
                           const ModelParams& params, double delta = 0.0);

/// Columns t, mass, E, R; the last row has no R.
void write_time_series_csv(std::ostream& out, const DiagnosticsReport& report, TimeGrid time);

}  // namespace chemrep
