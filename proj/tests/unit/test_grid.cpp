#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "chemrep/errors.hpp"
#include "chemrep/field_io.hpp"
#include "chemrep/grid.hpp"
#include "chemrep/linalg.hpp"
#include "support.hpp"

using namespace chemrep;
using namespace chemrep::testing;

TEST(BuildGrid, FullControlLine) {
    auto g = line(4);
    EXPECT_EQ(g->size(), 4u);
    EXPECT_DOUBLE_EQ(g->spacing(0), 0.25);
    EXPECT_TRUE(g->control_is_everywhere());
}

TEST(BuildGrid, BoxMasksCellCentres) {
    Box box;
    box.lo = {0.0, 0.0, 0.0};
    box.hi = {0.5, 1.0, 0.0};
    auto g = square(8, 8, 1.0, 1.0, box);
    // Oracle: enumerate centres with x <= 0.5.
    std::size_t expected = 0;
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) expected += (i + 0.5) / 8.0 <= 0.5 ? 1 : 0;
    }
    EXPECT_EQ(expected, 32u);
    EXPECT_EQ(g->control_count(), expected);
    for (std::size_t c = 0; c < g->size(); ++c) {
        EXPECT_EQ(g->in_control(c), g->center(c, 0) <= 0.5);
    }
}

TEST(BuildGrid, RejectsTooFewCells) {
    try {
        line(2);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::invalid_argument);
    }
}

TEST(BuildGrid, RejectsEmptyBox) {
    Box box;
    box.lo = {0.01, 0, 0};
    box.hi = {0.02, 0, 0};
    EXPECT_THROW(line(4, 1.0, box), Error);
}

TEST(BuildGrid, RowMajorLastAxisFastest) {
    auto g = square(3, 4);
    EXPECT_EQ(g->stride(1), 1u);
    EXPECT_EQ(g->stride(0), 4u);
    EXPECT_EQ(g->coord(5, 0), 1);
    EXPECT_EQ(g->coord(5, 1), 1);
    EXPECT_EQ(g->face_count(0), 8u);
    EXPECT_EQ(g->face_count(1), 9u);
}

TEST(Laplacian, ConstantsAreInKernel) {
    auto g = square(5, 7);
    Field c(g, 3.25);
    for (double x : laplacian(c).values) EXPECT_EQ(x, 0.0);
}

TEST(Laplacian, SecondOrderOnCosine) {
    double prev = 0.0;
    for (int n : {32, 64, 128}) {
        auto g = line(n);
        Field w = Field::sample(g, [](auto x) { return std::cos(pi * x[0]); });
        Field lw = laplacian(w);
        double err = 0.0;
        for (std::size_t i = 0; i < g->size(); ++i) {
            err = std::max(err, std::abs(lw[i] + pi * pi * w[i]));
        }
        if (n > 32) EXPECT_NEAR(prev / err, 4.0, 0.2) << "n=" << n;
        prev = err;
    }
}

TEST(Laplacian, ConservativeForRandomFields) {
    std::mt19937_64 rng(11);
    for (int n : {3, 8, 17}) {
        auto g = square(n, n + 1);
        for (int k = 0; k < 100; ++k) {
            Field w = random_field(g, rng);
            const double scale = lq_norm(w, infinity) / (g->spacing(0) * g->spacing(0));
            EXPECT_LE(std::abs(integrate(laplacian(w))), 1e-12 * scale);
        }
    }
}

TEST(Laplacian, ProbedMatrixIsSymmetricAndMatchesAssembly) {
    auto g = square(4, 5, 1.0, 2.0);
    const std::size_t n = g->size();
    std::vector<std::vector<double>> m(n, std::vector<double>(n));
    for (std::size_t j = 0; j < n; ++j) {
        Field e(g);
        e[j] = 1.0;
        Field col = laplacian(e);
        for (std::size_t i = 0; i < n; ++i) m[i][j] = col[i];
    }
    const SparseMatrix a = laplacian_matrix(*g);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            EXPECT_EQ(m[i][j], m[j][i]);
            EXPECT_DOUBLE_EQ(-a.coeff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                             m[i][j]);
        }
    }
}

TEST(Drift, ConstantChemicalGivesNoDrift) {
    std::mt19937_64 rng(3);
    auto g = square(6, 6);
    Field u = random_field(g, rng, 0.0, 1.0);
    Field v(g, 2.0);
    for (auto s : {DriftScheme::central, DriftScheme::upwind}) {
        for (double x : drift_divergence(u, v, s).values) EXPECT_EQ(x, 0.0);
    }
}

TEST(Drift, CentralWithConstantDensityIsScaledLaplacian) {
    std::mt19937_64 rng(4);
    auto g = line(16);
    Field v = random_field(g, rng);
    Field u(g, 1.5);
    Field d = drift_divergence(u, v, DriftScheme::central);
    Field l = laplacian(v);
    for (std::size_t i = 0; i < g->size(); ++i) EXPECT_NEAR(d[i], 1.5 * l[i], 1e-12 * 256);
}

TEST(Drift, ConservativeForRandomFields) {
    std::mt19937_64 rng(5);
    for (int n : {3, 8, 16}) {
        auto g = square(n, n);
        for (int k = 0; k < 100; ++k) {
            Field u = random_field(g, rng);
            Field v = random_field(g, rng);
            for (auto s : {DriftScheme::central, DriftScheme::upwind}) {
                const double scale = 1.0 / (g->spacing(0) * g->spacing(0));
                EXPECT_LE(std::abs(integrate(drift_divergence(u, v, s))), 1e-12 * scale);
            }
        }
    }
}

TEST(Drift, UpwindMapHasNonpositiveDiagonal) {
    // Dense oracle: probe u -> D(u, v) column by column.
    std::mt19937_64 rng(6);
    for (int n : {3, 5, 8}) {
        auto g = square(n, n);
        Field v = random_field(g, rng);
        const SparseMatrix a = drift_matrix_in_u(v, DriftScheme::upwind);
        for (std::size_t j = 0; j < g->size(); ++j) {
            Field e(g);
            e[j] = 1.0;
            Field col = drift_divergence(e, v, DriftScheme::upwind);
            for (std::size_t i = 0; i < g->size(); ++i) {
                if (i == j) {
                    EXPECT_LE(col[i], 0.0);
                } else {
                    EXPECT_GE(col[i], 0.0);
                }
                EXPECT_NEAR(col[i], a.coeff(static_cast<Eigen::Index>(i),
                                            static_cast<Eigen::Index>(j)),
                            1e-12 * (1 + std::abs(col[i])));
            }
        }
    }
}

TEST(Drift, CentralOrderTwo) {
    // u = 1 + x, v = cos(pi x): div(u v') = v' + (1 + x) v''.
    double prev = 0.0;
    for (int n : {32, 64, 128}) {
        auto g = line(n);
        Field u = Field::sample(g, [](auto x) { return 1.0 + x[0]; });
        Field v = Field::sample(g, [](auto x) { return std::cos(pi * x[0]); });
        Field d = drift_divergence(u, v, DriftScheme::central);
        double err = 0.0;
        for (std::size_t i = 0; i < g->size(); ++i) {
            const double x = g->center(i, 0);
            const double exact = -pi * std::sin(pi * x) - (1 + x) * pi * pi * std::cos(pi * x);
            err = std::max(err, std::abs(d[i] - exact));
        }
        if (n > 32) EXPECT_GT(std::log2(prev / err), 1.9) << "n=" << n;
        prev = err;
    }
}

TEST(Norms, Basics) {
    auto g = square(4, 4);
    Field two(g, 2.0);
    EXPECT_NEAR(lq_norm(two, 2.0), 2.0, 1e-15);
    EXPECT_NEAR(lq_norm(two, infinity), 2.0, 0.0);
    EXPECT_NEAR(integrate(two), 2.0, 1e-15);
    EXPECT_THROW(lq_norm(two, 0.5), Error);

    std::mt19937_64 rng(1);
    Field w = random_field(g, rng);
    Field a = w;
    for (double& x : a.values) x = std::abs(x);
    EXPECT_NEAR(lq_norm(w, 1.0), integrate(a), 1e-14);
}

TEST(Norms, BochnerConvergesToClosedForm) {
    // u(t, x) = (1 + t)(1 + x): ||u||_{L2(0,1;L2)}^2 = (7/3)(7/3).
    const double exact = 7.0 / 3.0;
    double prev = 0.0;
    for (int k = 0; k < 3; ++k) {
        const int n = 16 << k;
        const int steps = 8 << (2 * k);
        auto g = line(n);
        TimeGrid t{1.0, steps};
        Trajectory traj = Trajectory::filled(g, t);
        for (int m = 0; m <= steps; ++m) {
            const double s = 1.0 + t.time(m);
            traj[m] = Field::sample(g, [s](auto x) { return s * (1.0 + x[0]); });
        }
        const double err = std::abs(bochner_norm(traj, 2.0, 2.0) - exact) / exact;
        if (k > 0) EXPECT_NEAR(prev / err, 4.0, 0.5);
        prev = err;
    }
    EXPECT_THROW(bochner_norm(Trajectory::filled(line(4), {1.0, 2}), 0.5, 2.0), Error);
}

TEST(Norms, InfinityInTimeIsMaxOverAllNodes) {
    auto g = line(4);
    Trajectory traj = Trajectory::filled(g, {1.0, 3}, 1.0);
    traj[3] = Field(g, 5.0);
    EXPECT_EQ(bochner_norm(traj, infinity, 2.0), 5.0);
    EXPECT_NEAR(bochner_norm(traj, 2.0, 2.0), 1.0, 1e-15);
}

TEST(Norms, H1Examples) {
    auto g = square(5, 5);
    EXPECT_EQ(h1_norm_sq(Field(g, 0.0)), 0.0);
    EXPECT_NEAR(h1_norm_sq(Field(g, 3.0)), 9.0, 1e-13);
    double prev_err = 0.0;
    for (int n : {32, 64, 128}) {
        auto l = line(n);
        Field w = Field::sample(l, [](auto x) { return std::cos(pi * x[0]); });
        const double err = std::abs(h1_norm_sq(w) - pi * pi / 2.0);
        if (n > 32) EXPECT_LT(err, prev_err);
        prev_err = err;
    }
    EXPECT_LT(prev_err, 1e-3);
}

TEST(FieldIo, RoundTripsExactly) {
    std::mt19937_64 rng(9);
    auto g = square(3, 5, 0.3, 1.7);
    Field w = random_field(g, rng);
    std::stringstream ss;
    write_field(ss, w);
    std::string header;
    std::getline(ss, header);
    EXPECT_EQ(header.substr(0, 6), "2 3 5 ");
    ss.seekg(0);
    Field r = read_field(ss);
    EXPECT_EQ(r.values, w.values);
    EXPECT_EQ(r.grid->cells(1), 5);
    EXPECT_DOUBLE_EQ(r.grid->spacing(1), g->spacing(1));
}

TEST(FieldIo, RejectsShortFile) {
    std::stringstream ss("1 4 0.25\n1\n2\n");
    try {
        read_field(ss);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::io_error);
    }
}
