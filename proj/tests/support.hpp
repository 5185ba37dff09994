#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "chemrep/checks.hpp"
#include "chemrep/forward.hpp"
#include "chemrep/grid.hpp"

namespace chemrep::testing {

inline GridPtr line(int n, double length = 1.0, std::optional<Box> box = std::nullopt) {
    const std::array<double, 1> l{length};
    const std::array<int, 1> c{n};
    return build_grid(1, l, c, box);
}

inline GridPtr square(int nx, int ny, double lx = 1.0, double ly = 1.0,
                      std::optional<Box> box = std::nullopt) {
    const std::array<double, 2> l{lx, ly};
    const std::array<int, 2> c{nx, ny};
    return build_grid(2, l, c, box);
}

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double max_abs_diff(const Field& a, const Field& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

constexpr double pi = std::numbers::pi;

inline Field bump(const GridPtr& g, double centre, double width, double amp, double base = 0.0) {
    return Field::sample(g, [=](auto x) {
        double r2 = 0.0;
        for (int a = 0; a < g->dim(); ++a) r2 += (x[a] - centre) * (x[a] - centre);
        return base + amp * std::exp(-r2 / (width * width));
    });
}

/// Small smooth 1D scenario with a partial control region and no upwind ties.
struct Scenario {
    GridPtr grid;
    TimeGrid time;
    ModelParams params;
    Field u0;
    Field v0;
    Control f;

    Setup setup() const { return {u0, v0, f, params, time}; }
};

inline Scenario standard_scenario(double p, int cells = 16, int steps = 20, bool logistic = true,
                                  DriftScheme scheme = DriftScheme::upwind,
                                  double horizon = 0.2) {
    Scenario s;
    Box box;
    box.lo = {0.2, 0, 0};
    box.hi = {0.85, 0, 0};
    s.grid = line(cells, 1.0, box);
    s.time = TimeGrid{horizon, steps};
    s.params.p = p;
    s.params.logistic = logistic;
    s.params.r = logistic ? 1.0 : 0.0;
    s.params.mu = logistic ? 0.5 : 0.0;
    s.params.drift_scheme = scheme;
    s.u0 = bump(s.grid, 0.35, 0.12, 1.0, 0.2);
    s.v0 = bump(s.grid, 0.62, 0.18, 0.8, 0.1);
    s.f = Control::zero(s.grid, s.time);
    for (int n = 0; n < steps; ++n) {
        const double t = s.time.time(n);
        s.f[n] = Field::sample(s.grid, [t](auto x) { return 0.5 * std::cos(2 * pi * x[0]) * (1 + t); });
    }
    s.f.apply_mask();
    return s;
}

}  // namespace chemrep::testing
