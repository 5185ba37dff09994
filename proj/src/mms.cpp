#include "chemrep/mms.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "chemrep/errors.hpp"
#include "chemrep/forward.hpp"
#include "chemrep/linearized.hpp"

namespace chemrep {

namespace {

using Point = std::array<double, 3>;
constexpr double pi = std::numbers::pi;

// Constant coefficients of the coupled linear target.
constexpr double kA = 1.0, kD = 0.5, kBeta1 = 0.5, kBeta2 = -1.0;
// Parameters of the nonlinear target.
constexpr double kP = 2.0, kR = 1.0, kMu = 1.0, kControl = 0.5;

double phi(const Point& x, int dim, double k) {
    double v = 1.0;
    for (int i = 0; i < dim; ++i) v *= std::cos(k * pi * x[i]);
    return v;
}

double dphi(const Point& x, int dim, double k, int axis) {
    double v = -k * pi * std::sin(k * pi * x[axis]);
    for (int i = 0; i < dim; ++i) {
        if (i != axis) v *= std::cos(k * pi * x[i]);
    }
    return v;
}

GridPtr unit_grid(int dim, int cells) {
    const std::array<double, 3> lengths{1.0, 1.0, 1.0};
    const std::array<int, 3> n{cells, cells, cells};
    return build_grid(dim, std::span(lengths).first(dim), std::span(n).first(dim));
}

template <class Fn>
std::vector<Field> sample_nodes(const GridPtr& g, TimeGrid time, Fn&& fn) {
    std::vector<Field> out;
    out.reserve(static_cast<std::size_t>(time.steps) + 1);
    for (int n = 0; n <= time.steps; ++n) {
        const double t = time.time(n);
        out.push_back(Field::sample(g, [&](const Point& x) { return fn(t, x); }));
    }
    return out;
}

double squared_error(const Trajectory& traj, const std::vector<Field>& exact) {
    double acc = 0.0;
    for (std::size_t n = 1; n < traj.node_count(); ++n) {
        const Field e = traj[n] - exact[n];
        acc += traj.time.dt() * inner(e, e);
    }
    return acc;
}

double error_a11(int dim, const GridPtr& g, TimeGrid time) {
    auto w = [dim](double t, const Point& x) { return std::exp(-t) * phi(x, dim, 1.0); };
    LinCoeffs k;
    k.a.push_back(Field(g, kA));
    k.g_u0 = sample_nodes(g, time, [&](double t, const Point& x) {
        return (-1.0 + dim * pi * pi + kA) * w(t, x);
    });
    const std::vector<Field> exact = sample_nodes(g, time, w);
    TangentPair s = solve_coupled_linear(k, g, time, DriftScheme::central, exact.front());
    return std::sqrt(squared_error(s.u, exact));
}

double error_a1(int dim, const GridPtr& g, TimeGrid time) {
    auto w = [dim](double t, const Point& x) { return std::exp(-t) * phi(x, dim, 1.0); };
    LinCoeffs k;
    k.a.push_back(Field(g, kA));
    FaceField c(g);
    g->for_each_face([&](int axis, std::size_t face, std::size_t lo, std::size_t) {
        const double x = g->center(lo, axis) + 0.5 * g->spacing(axis);
        c.values[axis][face] = 0.5 * std::sin(pi * x);
    });
    k.c.push_back(std::move(c));
    k.g_u0 = sample_nodes(g, time, [&](double t, const Point& x) {
        double transport = 0.0;
        for (int i = 0; i < dim; ++i) {
            const double ci = 0.5 * std::sin(pi * x[i]);
            const double dci = 0.5 * pi * std::cos(pi * x[i]);
            transport += ci * std::exp(-t) * dphi(x, dim, 1.0, i) + dci * w(t, x);
        }
        return (-1.0 + dim * pi * pi + kA) * w(t, x) + transport;
    });
    const std::vector<Field> exact = sample_nodes(g, time, w);
    TangentPair s = solve_coupled_linear(k, g, time, DriftScheme::central, exact.front());
    return std::sqrt(squared_error(s.u, exact));
}

double error_a19(int dim, const GridPtr& g, TimeGrid time) {
    auto uu = [dim](double t, const Point& x) { return std::exp(-t) * phi(x, dim, 1.0); };
    auto vv = [dim](double t, const Point& x) { return std::exp(-t) * phi(x, dim, 2.0); };
    LinCoeffs k;
    k.a.push_back(Field(g, kA));
    k.d.push_back(Field(g, kD));
    k.beta1.push_back(Field(g, kBeta1));
    k.beta2.push_back(Field(g, kBeta2));
    k.g_u0 = sample_nodes(g, time, [&](double t, const Point& x) {
        return (-1.0 + dim * pi * pi + kA) * uu(t, x) - kD * dim * 4.0 * pi * pi * vv(t, x);
    });
    k.g_v = sample_nodes(g, time, [&](double t, const Point& x) {
        return (-1.0 + dim * 4.0 * pi * pi + kBeta1) * vv(t, x) + kBeta2 * uu(t, x);
    });
    const std::vector<Field> eu = sample_nodes(g, time, uu);
    const std::vector<Field> ev = sample_nodes(g, time, vv);
    TangentPair s = solve_coupled_linear(k, g, time, DriftScheme::central, eu.front(), ev.front());
    return std::sqrt(squared_error(s.u, eu) + squared_error(s.v, ev));
}

double error_nonlinear(int dim, const GridPtr& g, TimeGrid time) {
    auto uu = [dim](double t, const Point& x) { return 1.0 + 0.5 * std::exp(-t) * phi(x, dim, 1.0); };
    auto vv = [dim](double t, const Point& x) { return 1.0 + 0.5 * std::exp(-t) * phi(x, dim, 2.0); };
    auto su = [=](double t, const Point& x) {
        const double e = 0.5 * std::exp(-t);
        const double u = uu(t, x);
        double grad_dot = 0.0;
        for (int i = 0; i < dim; ++i) grad_dot += e * dphi(x, dim, 1.0, i) * e * dphi(x, dim, 2.0, i);
        const double lap_u = -dim * pi * pi * e * phi(x, dim, 1.0);
        const double lap_v = -dim * 4.0 * pi * pi * e * phi(x, dim, 2.0);
        const double u_t = -e * phi(x, dim, 1.0);
        return u_t - lap_u - (grad_dot + u * lap_v) - kR * u + kMu * std::pow(u, kP);
    };
    auto sv = [=](double t, const Point& x) {
        const double e = 0.5 * std::exp(-t);
        const double v = vv(t, x);
        const double lap_v = -dim * 4.0 * pi * pi * e * phi(x, dim, 2.0);
        const double v_t = -e * phi(x, dim, 2.0);
        return v_t - lap_v + v - std::pow(uu(t, x), kP) - kControl * v;
    };
    Forcing forcing;
    forcing.u = [&](double t) { return Field::sample(g, [&](const Point& x) { return su(t, x); }); };
    forcing.v = [&](double t) { return Field::sample(g, [&](const Point& x) { return sv(t, x); }); };
    SolveOptions opts;
    opts.forcing = &forcing;

    ModelParams params;
    params.p = kP;
    params.r = kR;
    params.mu = kMu;
    params.logistic = true;
    params.drift_scheme = DriftScheme::central;
    const std::vector<Field> eu = sample_nodes(g, time, uu);
    const std::vector<Field> ev = sample_nodes(g, time, vv);
    StateTrajectory s = solve_state(eu.front(), ev.front(), Control::constant(g, time, kControl),
                                    params, time, opts);
    return std::sqrt(squared_error(s.u, eu) + squared_error(s.v, ev));
}

std::vector<ConvergenceRow> with_rates(std::vector<ConvergenceRow> rows, bool in_space) {
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (k == 0) {
            rows[k].rate = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        const double ratio = in_space ? rows[k - 1].h / rows[k].h : rows[k - 1].dt / rows[k].dt;
        rows[k].rate = std::log(rows[k - 1].error / rows[k].error) / std::log(ratio);
    }
    return rows;
}

}  // namespace

MmsProblem parse_mms_problem(std::string_view name) {
    if (name == "a1") return MmsProblem::a1;
    if (name == "a11") return MmsProblem::a11;
    if (name == "a19") return MmsProblem::a19;
    if (name == "nonlinear") return MmsProblem::nonlinear;
    fail(ErrorKind::invalid_argument, "unknown manufactured problem '" + std::string(name) + "'");
}

std::string_view to_string(MmsProblem problem) {
    switch (problem) {
        case MmsProblem::a1: return "a1";
        case MmsProblem::a11: return "a11";
        case MmsProblem::a19: return "a19";
        case MmsProblem::nonlinear: return "nonlinear";
    }
    return "unknown";
}

double mms_error(MmsProblem problem, int dim, int cells, int steps, double horizon) {
    const GridPtr g = unit_grid(dim, cells);
    const TimeGrid time{horizon, steps};
    switch (problem) {
        case MmsProblem::a1: return error_a1(dim, g, time);
        case MmsProblem::a11: return error_a11(dim, g, time);
        case MmsProblem::a19: return error_a19(dim, g, time);
        case MmsProblem::nonlinear: return error_nonlinear(dim, g, time);
    }
    return 0.0;
}

std::vector<ConvergenceRow> mms_space_study(MmsProblem problem, int dim,
                                            const std::vector<int>& cells, int steps,
                                            double horizon) {
    std::vector<ConvergenceRow> rows;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        rows.push_back({static_cast<int>(k), 1.0 / cells[k], horizon / steps,
                        mms_error(problem, dim, cells[k], steps, horizon), 0.0});
    }
    return with_rates(std::move(rows), true);
}

std::vector<ConvergenceRow> mms_time_study(MmsProblem problem, int dim, int cells,
                                           const std::vector<int>& steps, double horizon) {
    std::vector<ConvergenceRow> rows;
    for (std::size_t k = 0; k < steps.size(); ++k) {
        rows.push_back({static_cast<int>(k), 1.0 / cells, horizon / steps[k],
                        mms_error(problem, dim, cells, steps[k], horizon), 0.0});
    }
    return with_rates(std::move(rows), false);
}

std::string_view to_string(StudyKind kind) {
    return kind == StudyKind::space ? "space" : "time";
}

MmsStudy mms_standard_study(MmsProblem problem, StudyKind kind, int dim) {
    require(dim == 1 || dim == 2, ErrorKind::invalid_argument,
            "standard studies are defined in 1D and 2D");
    MmsStudy study{problem, kind, dim, {}};
    if (kind == StudyKind::space) {
        const std::vector<int> cells = dim == 1 ? std::vector<int>{16, 32, 64}
                                                : std::vector<int>{8, 16, 32};
        study.rows = mms_space_study(problem, dim, cells, dim == 1 ? 2000 : 1000, 0.02);
    } else {
        study.rows = mms_time_study(problem, dim, dim == 1 ? 512 : 128, {8, 16, 32}, 1.0);
    }
    return study;
}

}  // namespace chemrep
