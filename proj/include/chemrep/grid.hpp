#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace chemrep {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

/// Axis-aligned box [lo, hi] used to select the control region.
struct Box {
    std::array<double, 3> lo{0.0, 0.0, 0.0};
    std::array<double, 3> hi{0.0, 0.0, 0.0};
};

enum class DriftScheme { central, upwind };

/// Uniform cell-centred tensor grid on [0, L_1] x ... x [0, L_dim] with
/// homogeneous Neumann boundaries. Cells are stored row-major: the last axis
/// runs fastest.
class Grid {
public:
    int dim() const { return dim_; }
    int cells(int axis) const { return cells_[axis]; }
    double spacing(int axis) const { return spacing_[axis]; }
    double length(int axis) const { return lengths_[axis]; }
    std::size_t size() const { return size_; }
    std::size_t stride(int axis) const { return strides_[axis]; }
    double cell_volume() const { return cell_volume_; }
    double domain_volume() const { return cell_volume_ * static_cast<double>(size_); }

    int coord(std::size_t cell, int axis) const {
        return static_cast<int>((cell / strides_[axis]) % static_cast<std::size_t>(cells_[axis]));
    }
    double center(std::size_t cell, int axis) const {
        return (coord(cell, axis) + 0.5) * spacing_[axis];
    }
    std::array<double, 3> center(std::size_t cell) const;

    bool in_control(std::size_t cell) const { return mask_[cell] != 0; }
    const std::vector<std::uint8_t>& control_mask() const { return mask_; }
    std::size_t control_count() const { return control_count_; }
    bool control_is_everywhere() const { return control_count_ == size_; }

    /// Same dimension, cell counts and spacings (masks may differ).
    bool same_shape(const Grid& other) const;

    /// Number of interior faces normal to `axis`.
    std::size_t face_count(int axis) const { return face_counts_[axis]; }

    /// Visits every interior face once, axis by axis and in row-major order of
    /// the lower cell: fn(axis, face_index, lower_cell, upper_cell).
    template <class Fn>
    void for_each_face(Fn&& fn) const {
        for (int axis = 0; axis < dim_; ++axis) {
            const std::size_t step = strides_[axis];
            std::size_t face = 0;
            for (std::size_t cell = 0; cell < size_; ++cell) {
                if (coord(cell, axis) + 1 < cells_[axis]) {
                    fn(axis, face, cell, cell + step);
                    ++face;
                }
            }
        }
    }

private:
    friend std::shared_ptr<const Grid> build_grid(int, std::span<const double>, std::span<const int>,
                                                  const std::optional<Box>&);
    Grid() = default;

    int dim_ = 0;
    std::array<int, 3> cells_{1, 1, 1};
    std::array<double, 3> lengths_{1.0, 1.0, 1.0};
    std::array<double, 3> spacing_{1.0, 1.0, 1.0};
    std::array<std::size_t, 3> strides_{1, 1, 1};
    std::array<std::size_t, 3> face_counts_{0, 0, 0};
    std::size_t size_ = 0;
    double cell_volume_ = 1.0;
    std::vector<std::uint8_t> mask_;
    std::size_t control_count_ = 0;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Builds a grid with h_i = L_i / n_i. `control_box == nullopt` puts the whole
/// domain under control; otherwise exactly the cells whose centres lie in the
/// closed box are masked. Throws invalid_argument for n_i < 3, non-positive
/// lengths, or a box that selects no cell.
GridPtr build_grid(int dim, std::span<const double> lengths, std::span<const int> cells,
                   const std::optional<Box>& control_box = std::nullopt);

/// The same grid with a different control region.
GridPtr with_control_box(const Grid& grid, const std::optional<Box>& control_box);

/// Cell-centred scalar values on a grid.
struct Field {
    GridPtr grid;
    std::vector<double> values;

    Field() = default;
    explicit Field(GridPtr g, double fill = 0.0);
    Field(GridPtr g, std::vector<double> v);

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }

    template <class Fn>
    static Field sample(GridPtr g, Fn&& fn) {
        Field out(g);
        for (std::size_t i = 0; i < g->size(); ++i) out.values[i] = fn(g->center(i));
        return out;
    }

    Field& operator+=(const Field& other);
    Field& operator-=(const Field& other);
    Field& operator*=(double s);

    bool all_finite() const;
    double min() const;
    double max() const;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

/// Values on interior faces, one array per axis (see Grid::for_each_face).
struct FaceField {
    GridPtr grid;
    std::array<std::vector<double>, 3> values;

    FaceField() = default;
    explicit FaceField(GridPtr g, double fill = 0.0);
};

/// Uniform time grid: dt = T / N, nodes t_0 .. t_N.
struct TimeGrid {
    double horizon = 1.0;
    int steps = 1;

    double dt() const { return horizon / steps; }
    double time(int n) const { return n * dt(); }
    void validate() const;
};

/// One field per time node.
struct Trajectory {
    TimeGrid time;
    std::vector<Field> nodes;

    Trajectory() = default;
    Trajectory(TimeGrid t, std::vector<Field> n) : time(t), nodes(std::move(n)) {}
    static Trajectory filled(GridPtr g, TimeGrid t, double value = 0.0);

    const GridPtr& grid() const { return nodes.front().grid; }
    std::size_t node_count() const { return nodes.size(); }
    Field& operator[](std::size_t n) { return nodes[n]; }
    const Field& operator[](std::size_t n) const { return nodes[n]; }
};

/// Throws grid_mismatch unless both fields live on grids of the same shape.
void require_same_grid(const Field& a, const Field& b, const char* what);

// Discrete operators -------------------------------------------------------

/// Second-order Laplacian; mirrored ghost cells realise the Neumann condition.
Field laplacian(const Field& w);

/// Cell-centred divergence of the drift flux u grad v in conservative face form.
/// Boundary faces carry no flux.
Field drift_divergence(const Field& u, const Field& v, DriftScheme scheme);

/// Face differences (w_hi - w_lo) / h on interior faces.
FaceField face_gradient(const Field& w);

/// Divergence of a face flux; boundary faces carry zero flux.
Field face_divergence(const FaceField& flux);

/// Upwind donor convention shared by the forward and tangent steppers: the
/// drift velocity is -grad v, so a positive face gradient draws from the
/// upper cell. Ties (gradient exactly zero) use the lower cell.
inline bool donor_is_upper(double face_gradient) { return face_gradient > 0.0; }

// Quadrature and norms -----------------------------------------------------

double integrate(const Field& w);
double inner(const Field& a, const Field& b);  // integral of a*b
/// (sum |w|^q vol)^(1/q); the maximum of |w| for q = infinity. Rejects q < 1.
double lq_norm(const Field& w, double q);
/// Left-endpoint rectangle rule in time composed with lq_norm; max over all
/// nodes for s = infinity.
double bochner_norm(const Trajectory& traj, double s, double q);
/// Face-gradient energy plus squared mean: the equivalent H1 norm squared.
double h1_norm_sq(const Field& w);
/// ||L_h w||^2 + (int w)^2, the equivalent H2 norm squared on Neumann fields.
double h2_norm_sq(const Field& w);
/// Sum over interior faces of (face difference / h)^2 times the cell volume.
double gradient_norm_sq(const Field& w);

}  // namespace chemrep
