#pragma once

// Property checks shared by the verify command and the acceptance suite.

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "chemrep/adjoint.hpp"
#include "chemrep/cost_opt.hpp"
#include "chemrep/forward.hpp"
#include "chemrep/linearized.hpp"

namespace chemrep {

/// Smooth 1D scenario on [0, 1] with control region [0.2, 0.85]: Gaussian
/// bumps for u0 and v0, f = 0.5 cos(2 pi x)(1 + t) on the control region,
/// r = 1 and mu = 0.5 when logistic.
Setup standard_setup(double p, int cells = 16, int steps = 20, bool logistic = true,
                     DriftScheme scheme = DriftScheme::upwind, double horizon = 0.2);

/// Tracking problem whose targets are the uncontrolled run shifted by `shift`.
ControlProblem tracking_problem(const Setup& s, double gamma_v, double gamma_f, double shift);

double relative_gap(double a, double b);

Field random_field(const GridPtr& g, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0);
Control random_control(const GridPtr& g, TimeGrid t, std::mt19937_64& rng);

/// Tangent map F -> (U^n, V^n)_{n < N} and control pullback S -> v^{n+1} eta_bar^n
/// as dense matrices, built column by column from unit inputs. Control
/// coordinates are the masked cells of each slice; state coordinates stack U^n
/// then V^n for n = 0 .. N-1. With the shared dt weights, pullback = tangent^T.
struct DenseMaps {
    Eigen::MatrixXd tangent;
    Eigen::MatrixXd pullback;
};

DenseMaps dense_maps(const Linearization& lin, const StateTrajectory& traj);

/// max |tangent^T - pullback| / max |tangent|.
double transpose_error(const DenseMaps& maps);

/// Worst relative error of <s, T F> = <P s, F> over random pairs.
double dense_pairing_error(const DenseMaps& maps, int pairs, std::mt19937_64& rng);

/// Worst relative error of the duality identity
///   sum_n dt (<su^n, U^n> + <sv^n, V^n>) = sum_n dt <v^{n+1} eta_bar^n, F^n>
/// over random control directions; the sources are random unless given.
double duality_error(const Setup& s, int directions, std::mt19937_64& rng,
                     const AdjointSources* sources = nullptr);

/// Random upwind scenario (1D or 2D, random data, parameters and control)
/// whose time step is halved until every step passes the stability checks.
Setup random_upwind_setup(std::mt19937_64& rng);

struct PositivityResult {
    double min_u = 0.0;
    double min_v = 0.0;
    int scenarios = 0;
};

PositivityResult positivity_trials(int count, std::mt19937_64& rng);

/// Level k of the energy refinement study: central scheme, 32 * 2^k cells and
/// 160 * 4^k steps on the standard scenario.
Setup energy_level(double p, bool logistic, int level);

/// ||v_eps - v_0||_{L^inf(L^2)} for each eps, against the unregularized run.
std::vector<double> eps_deviation(const Setup& s, const std::vector<double>& eps);

struct CheckResult {
    std::string name;
    double value;
    double tolerance;
    bool passed;
    std::string detail;
};

/// Tolerances of the verification battery; a check passes when its value is
/// at most (or, for rates, at least) the tolerance.
struct VerifyOptions {
    std::uint64_t seed = 1;
    double transpose_tol = 1e-10;
    double gradient_tol = 1e-5;
    double duality_tol = 1e-9;
    double mass_tol = 1e-10;
    double k0_slack = 1e-8;
    double energy_rate_min = 0.9;
    int positivity_scenarios = 50;
};

std::vector<CheckResult> run_verification(const VerifyOptions& opts);

}  // namespace chemrep
