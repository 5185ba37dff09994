#include "chemrep/field_io.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "chemrep/errors.hpp"

namespace chemrep {

namespace {

std::string format17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

void write_field(std::ostream& out, const Field& field) {
    const Grid& g = *field.grid;
    out << g.dim();
    for (int a = 0; a < g.dim(); ++a) out << ' ' << g.cells(a);
    for (int a = 0; a < g.dim(); ++a) out << ' ' << format17(g.spacing(a));
    out << '\n';
    for (double x : field.values) out << format17(x) << '\n';
}

void write_field(const std::filesystem::path& path, const Field& field) {
    std::ofstream out(path);
    require(static_cast<bool>(out), ErrorKind::io_error, "cannot open " + path.string());
    write_field(out, field);
    require(static_cast<bool>(out), ErrorKind::io_error, "write failed for " + path.string());
}

Field read_field(std::istream& in) {
    std::string header;
    require(static_cast<bool>(std::getline(in, header)), ErrorKind::io_error,
            "snapshot is empty");
    std::istringstream hs(header);
    int dim = 0;
    require(static_cast<bool>(hs >> dim) && dim >= 1 && dim <= 3, ErrorKind::io_error,
            "snapshot header has a bad dimension");
    std::array<int, 3> cells{};
    std::array<double, 3> lengths{};
    for (int a = 0; a < dim; ++a) {
        require(static_cast<bool>(hs >> cells[a]), ErrorKind::io_error,
                "snapshot header is missing cell counts");
    }
    for (int a = 0; a < dim; ++a) {
        double h = 0.0;
        require(static_cast<bool>(hs >> h) && h > 0.0, ErrorKind::io_error,
                "snapshot header is missing spacings");
        lengths[a] = h * cells[a];
    }
    GridPtr grid = build_grid(dim, std::span(lengths).first(dim), std::span(cells).first(dim));
    std::vector<double> values;
    values.reserve(grid->size());
    double x = 0.0;
    while (in >> x) values.push_back(x);
    require(in.eof(), ErrorKind::io_error, "snapshot contains a non-numeric value");
    require(values.size() == grid->size(), ErrorKind::io_error,
            "snapshot has " + std::to_string(values.size()) + " values, expected " +
                std::to_string(grid->size()));
    return Field(grid, std::move(values));
}

Field read_field(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorKind::io_error, "cannot open " + path.string());
    return read_field(in);
}

Field read_field_on(const std::filesystem::path& path, const GridPtr& grid) {
    Field f = read_field(path);
    const Grid& g = *f.grid;
    bool same = g.dim() == grid->dim();
    for (int a = 0; same && a < g.dim(); ++a) {
        same = g.cells(a) == grid->cells(a) &&
               std::abs(g.spacing(a) - grid->spacing(a)) <= 1e-12 * grid->spacing(a);
    }
    require(same, ErrorKind::grid_mismatch, path.string() + " does not match the scenario grid");
    return Field(grid, std::move(f.values));
}

}  // namespace chemrep
