#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "chemrep/grid.hpp"

namespace chemrep {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class LinearSolverKind {
    direct,  ///< sparse LDL^T; sign-exact on M-matrices
    cg,      ///< Jacobi-preconditioned conjugate gradient
};

/// Assembled form of laplacian().
SparseMatrix laplacian_matrix(const Grid& grid);

/// shift * I + diag(diag_add) - scale * L_h. `diag_add` may be empty.
SparseMatrix shifted_laplacian(const Grid& grid, double shift, std::span<const double> diag_add,
                               double scale = 1.0);

/// U -> drift_divergence(U, v): transport with face gradients of v, donors frozen by v.
SparseMatrix drift_matrix_in_u(const Field& v, DriftScheme scheme);

/// V -> div(u_face grad V) where u_face is the mean or the donor value of u,
/// donors being selected by the face gradients of `v_base`.
SparseMatrix drift_matrix_in_v(const Field& u, const Field& v_base, DriftScheme scheme);

/// U -> div(U c) for a face velocity c. Upwinding follows the sign of c.
SparseMatrix transport_matrix(const FaceField& velocity, DriftScheme scheme);

/// V -> div(d_face grad V) with d_face the arithmetic mean of the adjacent cells.
SparseMatrix diffusion_matrix(const Field& coefficient);

SparseMatrix diagonal_matrix(std::span<const double> diag);

std::vector<double> multiply(const SparseMatrix& a, std::span<const double> x);
std::vector<double> multiply_transpose(const SparseMatrix& a, std::span<const double> x);

/// Solver for a symmetric positive-definite system, factorised (or set up)
/// once and reusable for many right-hand sides. Copies share the factorisation.
class SpdSolver {
public:
    SpdSolver(SparseMatrix a, LinearSolverKind kind, double tolerance = 1e-12);

    /// Throws solver_failure if the factorisation or iteration fails.
    std::vector<double> solve(std::span<const double> rhs,
                              std::span<const double> guess = {}) const;

    const SparseMatrix& matrix() const;
    LinearSolverKind kind() const { return kind_; }

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
    LinearSolverKind kind_;
};

}  // namespace chemrep
