#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chemrep/adjoint.hpp"
#include "chemrep/errors.hpp"
#include "chemrep/forward.hpp"
#include "chemrep/linearized.hpp"

namespace chemrep {

struct CostParams {
    double gamma_u = 1.0;
    double gamma_v = 0.0;
    double gamma_f = 0.0;
    double delta = 0.0;  ///< the control norm is taken in L^{5/2 + delta}(control region)
    Trajectory u_d;
    Trajectory v_d;

    void validate() const;
};

/// Pointwise bounds f_min <= f <= f_max; infinite bounds are allowed.
struct AdmissibleBox {
    double f_min = -infinity;
    double f_max = infinity;

    bool bounded() const { return std::isfinite(f_min) && std::isfinite(f_max); }
    void validate() const;
};

struct CostBreakdown {
    double term_u_5p2 = 0.0;  ///< (2/(5p)) int ||u - u_d||^{5p/2}_{5p/2} dt
    double term_u_103 = 0.0;  ///< (3/10) int ||u - u_d||^{10/3}_{10/3} dt
    double term_v = 0.0;      ///< (1/2) int ||v - v_d||^2 dt
    double term_f = 0.0;      ///< (2/5) int ||f||^{5/2}_{L^{5/2+delta}(control)} dt
    double total = 0.0;
};

/// L^q norm over the control region only.
double control_region_norm(const Field& f, double q);

/// Left-endpoint time rule over t_0 .. t_{N-1}.
CostBreakdown eval_cost(const StateTrajectory& traj, const Control& f, const CostParams& cost,
                        double p);

/// su = gamma_u (sgn(w)|w|^{(5p-2)/2} + sgn(w)|w|^{7/3}), w = u - u_d; sv = gamma_v (v - v_d).
AdjointSources cost_state_derivative(const StateTrajectory& traj, const CostParams& cost,
                                     double p);

/// gamma_f ||f^n||^{-delta} sgn(f)|f|^{3/2+delta} + v^{n+1} eta_bar^n on the control
/// region, zero elsewhere; the first summand is 0 when delta > 0 and ||f^n|| = 0.
Control reduced_gradient(const Control& f, const StateTrajectory& traj,
                         const AdjointPair& adjoint, const CostParams& cost);

Control project(const Control& f, const AdmissibleBox& box);

/// Everything needed to evaluate the reduced cost f -> J(u(f), v(f), f).
struct ControlProblem {
    Field u0;
    Field v0;
    ModelParams params;
    TimeGrid time;
    CostParams cost;
};

struct GradientEvaluation {
    StateTrajectory traj;
    CostBreakdown cost;
    AdjointPair adjoint;
    Control gradient;
};

CostBreakdown reduced_cost(const ControlProblem& problem, const Control& f);
GradientEvaluation evaluate_gradient(const ControlProblem& problem, const Control& f);

/// ||f - project(f - grad)||_{L2(Q)}.
double optimality_residual(const Control& f, const Control& grad, const AdmissibleBox& box);

struct ViReport {
    double min_pairing = 0.0;  ///< min over samples of <grad, f_sample - f>
    double grad_norm = 0.0;
    int samples = 0;
};

/// Samples admissible controls uniformly in the box (or in [f - 1, f + 1]
/// clipped to the box when it is unbounded) and reports the smallest pairing.
ViReport vi_check(const Control& f, const Control& grad, const AdmissibleBox& box, int samples,
                  std::uint64_t seed);

struct PgdOptions {
    int max_iters = 100;
    double tol_J = 1e-12;
    double tol_opt = 1e-6;
    double s_init = 1.0;
};

struct PgdRecord {
    int iter;
    CostBreakdown cost;
    double residual;
    double step;
};

struct PgdResult {
    Control f;
    std::vector<PgdRecord> history;
    std::string stop_reason;  ///< "stationary", "stalled", "max_iters" or "line_search_failure"
    GradientEvaluation final;
};

/// Thrown after 60 rejected step shrinks; carries the last accepted iterate.
class LineSearchError : public Error {
public:
    LineSearchError(const std::string& message, PgdResult partial)
        : Error(ErrorKind::line_search_failure, message), partial_(std::move(partial)) {}
    const PgdResult& partial() const { return partial_; }

private:
    PgdResult partial_;
};

/// Projected gradient descent with Armijo backtracking (c1 = 1e-4, factor 0.5).
/// Trial controls that violate the step stability conditions count as rejected.
PgdResult pgd(const Control& f0, const ControlProblem& problem, const AdmissibleBox& box,
              const PgdOptions& opts);

struct StateResidual {
    double u = 0.0;
    double v = 0.0;
    double max() const { return std::max(u, v); }
};

/// Max over steps of ||dt (A x^{n+1} - b)||_inf / max(1, ||x^{n+1}||_inf) for both
/// equations of the unregularized scheme.
StateResidual residual_check(const StateTrajectory& traj, const Control& f,
                             const ModelParams& params);

struct GradientCheckRow {
    double adjoint;     ///< <grad, direction>
    double difference;  ///< central difference of the reduced cost
    double rel_error;
};

/// Compares the reduced gradient with central differences of the discrete
/// reduced cost along random directions supported on the control region.
std::vector<GradientCheckRow> gradient_check(const ControlProblem& problem, const Control& f,
                                             int directions, std::uint64_t seed,
                                             double step = 1e-4);

}  // namespace chemrep
