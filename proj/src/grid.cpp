#include "chemrep/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chemrep/errors.hpp"

namespace chemrep {

std::array<double, 3> Grid::center(std::size_t cell) const {
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int a = 0; a < dim_; ++a) x[a] = center(cell, a);
    return x;
}

bool Grid::same_shape(const Grid& other) const {
    if (dim_ != other.dim_) return false;
    for (int a = 0; a < dim_; ++a) {
        if (cells_[a] != other.cells_[a] || spacing_[a] != other.spacing_[a]) return false;
    }
    return true;
}

namespace {

void apply_control_box(std::vector<std::uint8_t>& mask, std::size_t& count, const Grid& g,
                       const std::optional<Box>& box) {
    mask.assign(g.size(), 1);
    count = g.size();
    if (!box) return;
    for (int a = 0; a < g.dim(); ++a) {
        require(box->lo[a] <= box->hi[a], ErrorKind::invalid_argument,
                "control box has lo > hi on axis " + std::to_string(a));
    }
    count = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        bool inside = true;
        for (int a = 0; a < g.dim() && inside; ++a) {
            const double x = g.center(i, a);
            inside = x >= box->lo[a] && x <= box->hi[a];
        }
        mask[i] = inside ? 1 : 0;
        count += inside ? 1 : 0;
    }
    require(count > 0, ErrorKind::invalid_argument, "control box contains no cell centre");
}

}  // namespace

GridPtr build_grid(int dim, std::span<const double> lengths, std::span<const int> cells,
                   const std::optional<Box>& control_box) {
    require(dim >= 1 && dim <= 3, ErrorKind::invalid_argument, "grid dimension must be 1, 2 or 3");
    require(lengths.size() >= static_cast<std::size_t>(dim) &&
                cells.size() >= static_cast<std::size_t>(dim),
            ErrorKind::invalid_argument, "need one length and one cell count per axis");

    auto g = std::shared_ptr<Grid>(new Grid());
    g->dim_ = dim;
    for (int a = 0; a < dim; ++a) {
        require(cells[a] >= 3, ErrorKind::invalid_argument,
                "every axis needs at least 3 cells (axis " + std::to_string(a) + " has " +
                    std::to_string(cells[a]) + ")");
        require(lengths[a] > 0.0 && std::isfinite(lengths[a]), ErrorKind::invalid_argument,
                "axis lengths must be positive");
        g->cells_[a] = cells[a];
        g->lengths_[a] = lengths[a];
        g->spacing_[a] = lengths[a] / cells[a];
    }
    std::size_t stride = 1;
    for (int a = dim - 1; a >= 0; --a) {
        g->strides_[a] = stride;
        stride *= static_cast<std::size_t>(g->cells_[a]);
    }
    g->size_ = stride;
    g->cell_volume_ = 1.0;
    for (int a = 0; a < dim; ++a) {
        g->cell_volume_ *= g->spacing_[a];
        g->face_counts_[a] = g->size_ / static_cast<std::size_t>(g->cells_[a]) *
                             static_cast<std::size_t>(g->cells_[a] - 1);
    }
    apply_control_box(g->mask_, g->control_count_, *g, control_box);
    return g;
}

GridPtr with_control_box(const Grid& grid, const std::optional<Box>& control_box) {
    std::array<double, 3> lengths{};
    std::array<int, 3> cells{};
    for (int a = 0; a < grid.dim(); ++a) {
        lengths[a] = grid.length(a);
        cells[a] = grid.cells(a);
    }
    return build_grid(grid.dim(), std::span(lengths).first(grid.dim()),
                      std::span(cells).first(grid.dim()), control_box);
}

// Field --------------------------------------------------------------------

Field::Field(GridPtr g, double fill) : grid(std::move(g)), values(grid->size(), fill) {}

Field::Field(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
    require(values.size() == grid->size(), ErrorKind::grid_mismatch,
            "field value count does not match the grid");
}

Field& Field::operator+=(const Field& other) {
    require_same_grid(*this, other, "field +=");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += other.values[i];
    return *this;
}

Field& Field::operator-=(const Field& other) {
    require_same_grid(*this, other, "field -=");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= other.values[i];
    return *this;
}

Field& Field::operator*=(double s) {
    for (double& x : values) x *= s;
    return *this;
}

bool Field::all_finite() const {
    return std::all_of(values.begin(), values.end(), [](double x) { return std::isfinite(x); });
}

double Field::min() const { return *std::min_element(values.begin(), values.end()); }
double Field::max() const { return *std::max_element(values.begin(), values.end()); }

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

FaceField::FaceField(GridPtr g, double fill) : grid(std::move(g)) {
    for (int a = 0; a < grid->dim(); ++a) values[a].assign(grid->face_count(a), fill);
}

void TimeGrid::validate() const {
    require(horizon > 0.0 && std::isfinite(horizon), ErrorKind::invalid_argument,
            "time horizon must be positive");
    require(steps >= 1, ErrorKind::invalid_argument, "need at least one time step");
}

Trajectory Trajectory::filled(GridPtr g, TimeGrid t, double value) {
    return Trajectory(t, std::vector<Field>(static_cast<std::size_t>(t.steps) + 1, Field(g, value)));
}

void require_same_grid(const Field& a, const Field& b, const char* what) {
    require(a.grid && b.grid && a.grid->same_shape(*b.grid) && a.size() == b.size(),
            ErrorKind::grid_mismatch, std::string(what) + ": fields live on different grids");
}

// Operators ----------------------------------------------------------------

Field laplacian(const Field& w) {
    const Grid& g = *w.grid;
    Field out(w.grid);
    // Mirrored ghosts make the boundary differences vanish, so only interior
    // neighbours contribute.
    for (std::size_t i = 0; i < g.size(); ++i) {
        double acc = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
            const double inv_h2 = 1.0 / (g.spacing(a) * g.spacing(a));
            const int c = g.coord(i, a);
            const std::size_t s = g.stride(a);
            if (c > 0) acc += (w.values[i - s] - w.values[i]) * inv_h2;
            if (c + 1 < g.cells(a)) acc += (w.values[i + s] - w.values[i]) * inv_h2;
        }
        out.values[i] = acc;
    }
    return out;
}

Field drift_divergence(const Field& u, const Field& v, DriftScheme scheme) {
    require_same_grid(u, v, "drift_divergence");
    const Grid& g = *u.grid;
    Field out(u.grid);
    g.for_each_face([&](int axis, std::size_t, std::size_t lo, std::size_t hi) {
        const double h = g.spacing(axis);
        const double grad = (v.values[hi] - v.values[lo]) / h;
        double u_face;
        if (scheme == DriftScheme::central) {
            u_face = 0.5 * (u.values[lo] + u.values[hi]);
        } else {
            u_face = donor_is_upper(grad) ? u.values[hi] : u.values[lo];
        }
        const double flux = u_face * grad / h;
        out.values[lo] += flux;
        out.values[hi] -= flux;
    });
    return out;
}

FaceField face_gradient(const Field& w) {
    const Grid& g = *w.grid;
    FaceField out(w.grid);
    g.for_each_face([&](int axis, std::size_t face, std::size_t lo, std::size_t hi) {
        out.values[axis][face] = (w.values[hi] - w.values[lo]) / g.spacing(axis);
    });
    return out;
}

Field face_divergence(const FaceField& flux) {
    const Grid& g = *flux.grid;
    Field out(flux.grid);
    g.for_each_face([&](int axis, std::size_t face, std::size_t lo, std::size_t hi) {
        const double q = flux.values[axis][face] / g.spacing(axis);
        out.values[lo] += q;
        out.values[hi] -= q;
    });
    return out;
}

// Quadrature ---------------------------------------------------------------

double integrate(const Field& w) {
    double acc = 0.0;
    for (double x : w.values) acc += x;
    return acc * w.grid->cell_volume();
}

double inner(const Field& a, const Field& b) {
    require_same_grid(a, b, "inner");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a.values[i] * b.values[i];
    return acc * a.grid->cell_volume();
}

double lq_norm(const Field& w, double q) {
    require(q >= 1.0, ErrorKind::invalid_argument, "lq_norm needs q >= 1");
    if (std::isinf(q)) {
        double m = 0.0;
        for (double x : w.values) m = std::max(m, std::abs(x));
        return m;
    }
    double acc = 0.0;
    for (double x : w.values) acc += std::pow(std::abs(x), q);
    return std::pow(acc * w.grid->cell_volume(), 1.0 / q);
}

double bochner_norm(const Trajectory& traj, double s, double q) {
    require(s >= 1.0 && q >= 1.0, ErrorKind::invalid_argument, "bochner_norm needs s, q >= 1");
    if (std::isinf(s)) {
        double m = 0.0;
        for (const Field& f : traj.nodes) m = std::max(m, lq_norm(f, q));
        return m;
    }
    const double dt = traj.time.dt();
    double acc = 0.0;
    for (int n = 0; n < traj.time.steps; ++n) acc += dt * std::pow(lq_norm(traj.nodes[n], q), s);
    return std::pow(acc, 1.0 / s);
}

double gradient_norm_sq(const Field& w) {
    const Grid& g = *w.grid;
    double acc = 0.0;
    g.for_each_face([&](int axis, std::size_t, std::size_t lo, std::size_t hi) {
        const double d = (w.values[hi] - w.values[lo]) / g.spacing(axis);
        acc += d * d;
    });
    return acc * g.cell_volume();
}

double h1_norm_sq(const Field& w) {
    const double mean_part = integrate(w);
    return gradient_norm_sq(w) + mean_part * mean_part;
}

double h2_norm_sq(const Field& w) {
    const Field lap = laplacian(w);
    const double mean_part = integrate(w);
    return inner(lap, lap) + mean_part * mean_part;
}

}  // namespace chemrep
