#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "chemrep/grid.hpp"
#include "chemrep/linalg.hpp"

namespace chemrep {

struct ModelParams {
    double p = 2.0;
    double r = 0.0;
    double mu = 0.0;
    double eps = 0.0;
    bool logistic = false;  ///< false selects the system without logistic reaction
    DriftScheme drift_scheme = DriftScheme::upwind;
    LinearSolverKind linear_solver = LinearSolverKind::direct;

    double rate() const { return logistic ? r : 0.0; }
    double competition() const { return logistic ? mu : 0.0; }
    void validate() const;
};

/// max(x, 0)^e, with 0 whenever x <= 0.
inline double pos_pow(double x, double e) { return x > 0.0 ? std::pow(x, e) : 0.0; }

/// Control slices at t_0 .. t_{N-1}; entries off the control mask are zero.
struct Control {
    TimeGrid time;
    std::vector<Field> slices;

    static Control zero(const GridPtr& grid, TimeGrid time);
    static Control constant(const GridPtr& grid, TimeGrid time, double value);

    std::size_t steps() const { return slices.size(); }
    const GridPtr& grid() const { return slices.front().grid; }
    Field& operator[](std::size_t n) { return slices[n]; }
    const Field& operator[](std::size_t n) const { return slices[n]; }

    void apply_mask();
    bool off_mask_zero() const;
    double max() const;
    double min() const;
};

/// x + a * y, slice by slice.
Control axpy(const Control& x, double a, const Control& y);
/// Space-time inner product: dt * sum_n integral(a^n b^n).
double control_inner(const Control& a, const Control& b);
double control_norm(const Control& a);

/// Initial data, control, parameters and time grid of one forward run.
struct Setup {
    Field u0;
    Field v0;
    Control f;
    ModelParams params;
    TimeGrid time;
};

struct StateTrajectory {
    Trajectory u;
    Trajectory v;
    std::optional<Trajectory> w;  ///< auxiliary variable of the regularized system
};

/// Additive right-hand sides evaluated at t_{n+1} (used for manufactured solutions).
struct Forcing {
    std::function<Field(double)> u;
    std::function<Field(double)> v;
};

struct StepSources {
    const Field* u = nullptr;
    const Field* v = nullptr;
};

struct StepResult {
    Field u;
    Field v;
};

struct RegularizedStepResult {
    Field u;
    Field w;
    Field v;
};

// Building blocks of the semi-implicit step, shared with the tangent and
// adjoint steppers and with the residual check.

/// (1/dt) I - L_h + diag(mu pos(u^n)^{p-1}).
SparseMatrix u_step_matrix(const Field& u_n, const ModelParams& params, double dt);
/// u^n/dt + D_h(u^n, v^n) + r u^n.
Field u_step_rhs(const Field& u_n, const Field& v_n, const ModelParams& params, double dt);
/// (1/dt + 1) I - L_h - diag(f^n 1_c).
SparseMatrix v_step_matrix(const Field& f_n, double dt);
/// v^n/dt + pos(u^{n+1})^p.
Field v_step_rhs(const Field& v_n, const Field& u_next, const ModelParams& params, double dt);

/// Throws stability_violation if 1/dt + 1 - max f^n <= 0 on the control region
/// or, for the upwind scheme, if some cell's donor outflow dt * sum |dv|/h^2
/// exceeds 1 + r dt.
void check_step_stability(const Field& v_n, const Field& f_n, const ModelParams& params, double dt);

/// One step of the semi-implicit scheme: implicit diffusion, explicit drift,
/// lagged logistic damping, then the v-equation with implicit bilinear term.
StepResult step_state(const Field& u_n, const Field& v_n, const Field& f_n,
                      const ModelParams& params, double dt, StepSources sources = {});

struct SolveOptions {
    const Forcing* forcing = nullptr;
    /// Called with (n, u^n, v^n) for every node, including n = 0.
    std::function<void(int, const Field&, const Field&)> observer;
};

/// Marches step_state over the time grid, or the regularized stepper when eps > 0.
/// Rejects negative initial data.
StateTrajectory solve_state(const Field& u0, const Field& v0, const Control& f,
                            const ModelParams& params, TimeGrid time, const SolveOptions& opts = {});

/// Regularized step: v^n from (I - eps L_h) v^n = w^n, the u-step against v^n,
/// then w^{n+1} with the positive part max(v, 0) in the bilinear term. With
/// eps = 0 this is step_state.
RegularizedStepResult step_state_regularized(const Field& u_n, const Field& w_n, const Field& f_n,
                                             const ModelParams& params, double dt);

/// w_0 = v_0 - eps L_h v_0.
Field regularized_initial_w(const Field& v0, double eps);

/// Admissible control built from the pointwise relation v = u^p + f v: v solves
/// the heat equation, u the u-equation with the same stepper, and
/// f^n = 1 - pos(u^{n+1})^p / v^{n+1}. Requires control on the whole domain.
/// `kappa` defaults to min v0.
std::pair<Control, StateTrajectory> seed_admissible(const Field& u0, const Field& v0,
                                                    const ModelParams& params, TimeGrid time,
                                                    std::optional<double> kappa = std::nullopt);

}  // namespace chemrep
