#pragma once

#include <optional>
#include <vector>

#include "chemrep/forward.hpp"
#include "chemrep/grid.hpp"
#include "chemrep/linalg.hpp"

namespace chemrep {

/// Coefficients and sources of the coupled linear parabolic system
///
///   U_t - L U + a U + div(U c) + div(d grad V) = g_u0 - div(g_u1)
///   V_t - L V + (beta1 + v_decay) V + beta2 U  = g_v
///
/// with zero total flux through the boundary. Every series holds either no
/// entry (the term is absent), one entry (constant in time) or one entry per
/// time node.
struct LinCoeffs {
    std::vector<Field> a;
    std::vector<FaceField> c;
    std::vector<Field> d;
    std::vector<Field> beta1;
    std::vector<Field> beta2;
    std::vector<Field> g_u0;
    std::vector<FaceField> g_u1;
    std::vector<Field> g_v;
    double v_decay = 0.0;
};

/// Exact derivative of one step_state call, split as
///   A_u U' = K_uu U + K_uv V
///   A_v V' = V / dt + diag(production) U' + diag(control_gain) F.
struct StepJacobian {
    double dt;
    SpdSolver a_u;
    SpdSolver a_v;
    SparseMatrix k_uu;
    SparseMatrix k_uv;
    std::vector<double> production;    ///< p pos(u^{n+1})^{p-1}
    std::vector<double> control_gain;  ///< v^{n+1} on the control region, 0 elsewhere
};

struct Linearization {
    GridPtr grid;
    TimeGrid time;
    LinCoeffs coeffs;
    std::vector<StepJacobian> steps;
};

struct TangentPair {
    Trajectory u;
    Trajectory v;
};

/// Coefficients at the base trajectory (a = -r + mu p pos(u)^{p-1}, c = -grad v,
/// d = -u, beta1 = -f 1_c, beta2 = -p pos(u)^{p-1}, v_decay = 1) together with
/// the per-step Jacobians of the discrete stepper. The control slice of the
/// last step is reused for beta1 at the final node. Rejects eps > 0.
Linearization linearize_at(const StateTrajectory& traj, const Control& f, const ModelParams& params);

/// Advances a perturbation through one step; donors stay frozen at the base.
StepResult tangent_step(const StepJacobian& jac, const Field& du, const Field& dv,
                        const Field& df);

/// Response (U, V) of the state to a control direction, from U^0 = V^0 = 0.
TangentPair solve_tangent(const Linearization& lin, const Control& direction);

/// Semi-implicit solve of the coupled system: implicit diffusion and reactions
/// a, beta1 + v_decay at t_{n+1}; explicit transport and cross diffusion at t_n;
/// beta2 U^{n+1} and the sources at t_{n+1}. Initial data default to zero.
/// Throws stability_violation when the implicit reactions make the operators
/// indefinite or, for upwind transport, when the explicit CFL bound fails.
TangentPair solve_coupled_linear(const LinCoeffs& coeffs, const GridPtr& grid, TimeGrid time,
                                 DriftScheme scheme,
                                 const std::optional<Field>& u0 = std::nullopt,
                                 const std::optional<Field>& v0 = std::nullopt);

}  // namespace chemrep
