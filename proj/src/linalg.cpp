#include "chemrep/linalg.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "chemrep/errors.hpp"

namespace chemrep {

namespace {

using Triplet = Eigen::Triplet<double>;

SparseMatrix from_triplets(std::size_t n, const std::vector<Triplet>& entries) {
    SparseMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    m.setFromTriplets(entries.begin(), entries.end());
    m.makeCompressed();
    return m;
}

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

}  // namespace

SparseMatrix laplacian_matrix(const Grid& grid) {
    return shifted_laplacian(grid, 0.0, {}, 1.0);
}

SparseMatrix shifted_laplacian(const Grid& grid, double shift, std::span<const double> diag_add,
                               double scale) {
    std::vector<Triplet> entries;
    entries.reserve(grid.size() * (1 + 2 * grid.dim()));
    std::vector<double> diag(grid.size(), shift);
    if (!diag_add.empty()) {
        require(diag_add.size() == grid.size(), ErrorKind::grid_mismatch, "diagonal size mismatch");
        for (std::size_t i = 0; i < grid.size(); ++i) diag[i] += diag_add[i];
    }
    grid.for_each_face([&](int axis, std::size_t, std::size_t lo, std::size_t hi) {
        const double k = scale / (grid.spacing(axis) * grid.spacing(axis));
        diag[lo] += k;
        diag[hi] += k;
        entries.emplace_back(idx(lo), idx(hi), -k);
        entries.emplace_back(idx(hi), idx(lo), -k);
    });
    for (std::size_t i = 0; i < grid.size(); ++i) entries.emplace_back(idx(i), idx(i), diag[i]);
    return from_triplets(grid.size(), entries);
}

SparseMatrix drift_matrix_in_u(const Field& v, DriftScheme scheme) {
    const Grid& g = *v.grid;
    std::vector<Triplet> entries;
    entries.reserve(4 * (g.face_count(0) + g.face_count(1) + g.face_count(2)));
    g.for_each_face([&](int axis, std::size_t, std::size_t lo, std::size_t hi) {
        const double h = g.spacing(axis);
        const double k = (v.values[hi] - v.values[lo]) / (h * h);
        if (scheme == DriftScheme::central) {
            entries.emplace_back(idx(lo), idx(lo), 0.5 * k);
            entries.emplace_back(idx(lo), idx(hi), 0.5 * k);
            entries.emplace_back(idx(hi), idx(lo), -0.5 * k);
            entries.emplace_back(idx(hi), idx(hi), -0.5 * k);
        } else {
            const std::size_t donor = donor_is_upper(k) ? hi : lo;
            entries.emplace_back(idx(lo), idx(donor), k);
            entries.emplace_back(idx(hi), idx(donor), -k);
        }
    });
    return from_triplets(g.size(), entries);
}

SparseMatrix drift_matrix_in_v(const Field& u, const Field& v_base, DriftScheme scheme) {
    require_same_grid(u, v_base, "drift_matrix_in_v");
    const Grid& g = *u.grid;
    std::vector<Triplet> entries;
    g.for_each_face([&](int axis, std::size_t, std::size_t lo, std::size_t hi) {
        const double h = g.spacing(axis);
        const double grad = v_base.values[hi] - v_base.values[lo];
        double u_face;
        if (scheme == DriftScheme::central) {
            u_face = 0.5 * (u.values[lo] + u.values[hi]);
        } else {
            u_face = donor_is_upper(grad) ? u.values[hi] : u.values[lo];
        }
        const double k = u_face / (h * h);
        entries.emplace_back(idx(lo), idx(hi), k);
        entries.emplace_back(idx(lo), idx(lo), -k);
        entries.emplace_back(idx(hi), idx(hi), -k);
        entries.emplace_back(idx(hi), idx(lo), k);
    });
    return from_triplets(g.size(), entries);
}

SparseMatrix transport_matrix(const FaceField& velocity, DriftScheme scheme) {
    const Grid& g = *velocity.grid;
    std::vector<Triplet> entries;
    g.for_each_face([&](int axis, std::size_t face, std::size_t lo, std::size_t hi) {
        const double k = velocity.values[axis][face] / g.spacing(axis);
        if (scheme == DriftScheme::central) {
            entries.emplace_back(idx(lo), idx(lo), 0.5 * k);
            entries.emplace_back(idx(lo), idx(hi), 0.5 * k);
            entries.emplace_back(idx(hi), idx(lo), -0.5 * k);
            entries.emplace_back(idx(hi), idx(hi), -0.5 * k);
        } else {
            const std::size_t donor = k > 0.0 ? lo : hi;
            entries.emplace_back(idx(lo), idx(donor), k);
            entries.emplace_back(idx(hi), idx(donor), -k);
        }
    });
    return from_triplets(g.size(), entries);
}

SparseMatrix diffusion_matrix(const Field& coefficient) {
    const Grid& g = *coefficient.grid;
    std::vector<Triplet> entries;
    g.for_each_face([&](int axis, std::size_t, std::size_t lo, std::size_t hi) {
        const double h = g.spacing(axis);
        const double k = 0.5 * (coefficient.values[lo] + coefficient.values[hi]) / (h * h);
        entries.emplace_back(idx(lo), idx(hi), k);
        entries.emplace_back(idx(lo), idx(lo), -k);
        entries.emplace_back(idx(hi), idx(hi), -k);
        entries.emplace_back(idx(hi), idx(lo), k);
    });
    return from_triplets(g.size(), entries);
}

SparseMatrix diagonal_matrix(std::span<const double> diag) {
    std::vector<Triplet> entries;
    entries.reserve(diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) entries.emplace_back(idx(i), idx(i), diag[i]);
    return from_triplets(diag.size(), entries);
}

std::vector<double> multiply(const SparseMatrix& a, std::span<const double> x) {
    std::vector<double> y(static_cast<std::size_t>(a.rows()));
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), idx(x.size()));
    Eigen::Map<Eigen::VectorXd> yv(y.data(), idx(y.size()));
    yv.noalias() = a * xv;
    return y;
}

std::vector<double> multiply_transpose(const SparseMatrix& a, std::span<const double> x) {
    std::vector<double> y(static_cast<std::size_t>(a.cols()));
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), idx(x.size()));
    Eigen::Map<Eigen::VectorXd> yv(y.data(), idx(y.size()));
    yv.noalias() = a.transpose() * xv;
    return y;
}

// SpdSolver ----------------------------------------------------------------

struct SpdSolver::Impl {
    SparseMatrix a;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt;
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
};

SpdSolver::SpdSolver(SparseMatrix a, LinearSolverKind kind, double tolerance) : kind_(kind) {
    auto impl = std::make_shared<Impl>();
    impl->a = std::move(a);
    if (kind == LinearSolverKind::direct) {
        impl->ldlt.compute(impl->a);
        require(impl->ldlt.info() == Eigen::Success, ErrorKind::solver_failure,
                "LDL^T factorisation failed (matrix not positive definite?)");
        require((impl->ldlt.vectorD().array() > 0.0).all(), ErrorKind::solver_failure,
                "LDL^T factorisation produced a non-positive pivot");
    } else {
        impl->cg.setTolerance(tolerance);
        impl->cg.setMaxIterations(std::max<Eigen::Index>(100, 10 * impl->a.rows()));
        impl->cg.compute(impl->a);
        require(impl->cg.info() == Eigen::Success, ErrorKind::solver_failure,
                "conjugate gradient setup failed");
    }
    impl_ = std::move(impl);
}

const SparseMatrix& SpdSolver::matrix() const { return impl_->a; }

std::vector<double> SpdSolver::solve(std::span<const double> rhs,
                                     std::span<const double> guess) const {
    require(rhs.size() == static_cast<std::size_t>(impl_->a.rows()), ErrorKind::grid_mismatch,
            "right-hand side size mismatch");
    std::vector<double> x(rhs.size());
    Eigen::Map<const Eigen::VectorXd> b(rhs.data(), idx(rhs.size()));
    Eigen::Map<Eigen::VectorXd> xv(x.data(), idx(x.size()));
    if (kind_ == LinearSolverKind::direct) {
        xv = impl_->ldlt.solve(b);
        return x;
    }
    if (b.squaredNorm() == 0.0) return x;
    if (guess.size() == rhs.size()) {
        Eigen::Map<const Eigen::VectorXd> g(guess.data(), idx(guess.size()));
        xv = impl_->cg.solveWithGuess(b, g);
    } else {
        xv = impl_->cg.solve(b);
    }
    require(impl_->cg.info() == Eigen::Success, ErrorKind::solver_failure,
            "conjugate gradient did not reach the requested tolerance");
    return x;
}

}  // namespace chemrep
