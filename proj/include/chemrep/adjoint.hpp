#pragma once

#include <vector>

#include "chemrep/forward.hpp"
#include "chemrep/linearized.hpp"

namespace chemrep {

/// h(w) = |w|^{(5p-4)/2} w + |w|^{4/3} w.
double h_source(double w, double p);
Field h_source(const Field& w, double p);

/// Right-hand sides of the adjoint system at the nodes t_0 .. t_N. The cost
/// quadrature gives node N zero weight, so only nodes 0 .. N-1 are read.
struct AdjointSources {
    Trajectory su;  ///< gamma_u h(u - u_d)
    Trajectory sv;  ///< gamma_v (v - v_d)
};

struct AdjointPair {
    Trajectory sigma;
    Trajectory eta;
    /// Control sensitivity of each step, (dt A_v)^{-1} eta^{n+1}; the reduced
    /// gradient pairs it with v^{n+1} on the control region.
    std::vector<Field> eta_bar;
};

struct AdjointStepResult {
    Field sigma;
    Field eta;
    Field control;  ///< transpose of the control block of the step
    Field eta_hat;
};

/// Exact transpose of tangent_step in the Euclidean inner product, plus
/// dt * (su, sv) when sources are given:
///   eta_hat   = A_v^{-1} eta^{n+1}
///   sigma_hat = A_u^{-1} (sigma^{n+1} + diag(production) eta_hat)
///   sigma^n   = K_uu^T sigma_hat + dt su^n
///   eta^n     = K_uv^T sigma_hat + eta_hat / dt + dt sv^n
///   control   = diag(control_gain) eta_hat
AdjointStepResult adjoint_step(const StepJacobian& jac, const Field& sigma_next,
                               const Field& eta_next, const Field* su = nullptr,
                               const Field* sv = nullptr);

/// Backward sweep n = N-1 .. 0 from sigma^N = eta^N = 0.
AdjointPair solve_adjoint(const Linearization& lin, const AdjointSources& sources);

struct AdjointResidualReport {
    double sigma_residual = 0.0;  ///< sqrt(sum dt ||R_sigma^n||^2) over interior nodes
    double eta_residual = 0.0;
    double sigma_norm = 0.0;      ///< ||sigma||_{L2(Q)}
    double eta_norm = 0.0;
};

/// Residuals of the continuous adjoint equations, discretised with centred
/// differences in time and space, evaluated at the interior nodes 1 .. N-1.
/// A consistency indicator only; the adjoint itself is defined by transposition.
AdjointResidualReport adjoint_residual_check(const AdjointPair& adjoint,
                                             const StateTrajectory& traj, const Control& f,
                                             const ModelParams& params,
                                             const AdjointSources& sources);

}  // namespace chemrep
