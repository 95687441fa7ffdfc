#pragma once

// Field snapshot format:
//
//   conflow-field v1 n=<n> dims=<d> shape=<N1,...> period=<L1,...>\n
//   <N1*...*Nd little-endian IEEE-754 doubles, row-major>
//
// Periods are printed with 17 significant digits so the grid round-trips.

#include <iosfwd>
#include <string>

#include "conflow/grid.hpp"

namespace conflow {

std::string field_header(const Grid& grid);

void write_field(std::ostream& os, const ScalarField& field);
void write_field(const std::string& path, const ScalarField& field);

ScalarField read_field(std::istream& is);
ScalarField read_field(const std::string& path);

}  // namespace conflow
