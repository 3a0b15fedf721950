#pragma once

#include <string>

#include "defectgeom/grid.hpp"

namespace defectgeom {

enum class FieldFormat { csv, vtk };

// 17 significant digits, bare exponent: 1.2500000000000000e-3, 0.0000000000000000e0.
std::string format_value(double v);

// Component labels: "c" for scalars, otherwise c followed by 1-based indices.
std::string component_label(int rank, int comp);

std::string field_csv(const TensorField& f);
std::string field_vtk(const TensorField& f, const std::string& title);

// Throws std::runtime_error naming the path on I/O failure.
void write_field(const TensorField& f, const std::string& path, FieldFormat format);
void write_text(const std::string& path, const std::string& text);

// Reads a CSV written by write_field; node coordinates must match g.
TensorField read_field_csv(const std::string& path, const Grid2D& g);

}  // namespace defectgeom
