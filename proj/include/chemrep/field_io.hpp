#pragma once

#include <filesystem>
#include <iosfwd>

#include "chemrep/grid.hpp"

namespace chemrep {

/// Text snapshot: a header "dim n1 [n2 [n3]] h1 [h2 [h3]]" followed by the
/// row-major cell values, one per line, with 17 significant digits.
void write_field(std::ostream& out, const Field& field);
void write_field(const std::filesystem::path& path, const Field& field);

/// Reads a snapshot; the grid is rebuilt with lengths n_i * h_i and full control.
Field read_field(std::istream& in);
Field read_field(const std::filesystem::path& path);

/// Reads a snapshot that must match `grid` in shape; the result lives on `grid`.
Field read_field_on(const std::filesystem::path& path, const GridPtr& grid);

}  // namespace chemrep
