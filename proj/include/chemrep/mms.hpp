#pragma once

#include <string_view>
#include <vector>

#include "chemrep/grid.hpp"

namespace chemrep {

/// Manufactured-solution targets on the unit square/cube.
///  a11:       w_t - L w + w = g, w = e^{-t} prod cos(pi x_i)
///  a1:        w_t - L w + div(w c) + w = g, c_i = sin(pi x_i) / 2
///  a19:       the coupled linear system with constant coefficients,
///             U = e^{-t} prod cos(pi x_i), V = e^{-t} prod cos(2 pi x_i)
///  nonlinear: the full logistic state system with forcing added to both
///             equations, u = 1 + e^{-t} prod cos(pi x_i) / 2,
///             v = 1 + e^{-t} prod cos(2 pi x_i) / 2
enum class MmsProblem { a1, a11, a19, nonlinear };

MmsProblem parse_mms_problem(std::string_view name);
std::string_view to_string(MmsProblem problem);

/// Space-time L2 error sqrt(sum_{n=1..N} dt ||e^n||^2) against the closed form,
/// summed over both unknowns for the coupled problems. All problems use the
/// central transport scheme.
double mms_error(MmsProblem problem, int dim, int cells, int steps, double horizon);

struct ConvergenceRow {
    int level;
    double h;
    double dt;
    double error;
    double rate;  ///< NaN on the first level
};

/// Refines h over `cells` at fixed `steps`.
std::vector<ConvergenceRow> mms_space_study(MmsProblem problem, int dim,
                                            const std::vector<int>& cells, int steps,
                                            double horizon);
/// Refines dt over `steps` at fixed `cells`.
std::vector<ConvergenceRow> mms_time_study(MmsProblem problem, int dim, int cells,
                                           const std::vector<int>& steps, double horizon);

enum class StudyKind { space, time };

struct MmsStudy {
    MmsProblem problem;
    StudyKind kind;
    int dim;
    std::vector<ConvergenceRow> rows;
};

std::string_view to_string(StudyKind kind);

/// Three-level studies with the fine fixed resolution of the other variable:
///   space, 1D: cells 16, 32, 64 at N = 2000, T = 0.02
///   space, 2D: cells 8, 16, 32 at N = 1000, T = 0.02
///   time:      N = 8, 16, 32 at T = 1 on 512 cells (1D) or 128^2 cells (2D)
MmsStudy mms_standard_study(MmsProblem problem, StudyKind kind, int dim);

}  // namespace chemrep
