#include "defectgeom/field_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace defectgeom {

std::string format_value(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  std::string s(buf);
  const auto e = s.find('e');
  std::string mant = s.substr(0, e);
  const int ex = std::atoi(s.c_str() + e + 1);
  return mant + "e" + std::to_string(ex);
}

std::string component_label(int rank, int comp) {
  if (rank == 0) return "c";
  std::string idx;
  for (int r = rank - 1; r >= 0; --r) {
    idx.insert(idx.begin(), static_cast<char>('1' + comp % 3));
    comp /= 3;
  }
  return "c" + idx;
}

std::string field_csv(const TensorField& f) {
  const Grid2D& g = f.grid();
  std::string out = "x,y";
  for (int c = 0; c < f.ncomp(); ++c) out += "," + component_label(f.rank(), c);
  out += '\n';
  for (int n = 0; n < g.nodes(); ++n) {
    const Point2 p = g.position(n);
    out += format_value(p.x) + "," + format_value(p.y);
    for (int c = 0; c < f.ncomp(); ++c) out += "," + format_value(f(n, c));
    out += '\n';
  }
  return out;
}

std::string field_vtk(const TensorField& f, const std::string& title) {
  const Grid2D& g = f.grid();
  std::string out = "# vtk DataFile Version 3.0\n" + title + "\nASCII\nDATASET STRUCTURED_POINTS\n";
  out += "DIMENSIONS " + std::to_string(g.nx) + " " + std::to_string(g.ny) + " 1\n";
  out += "ORIGIN " + format_value(g.x0) + " " + format_value(g.y0) + " 0\n";
  out += "SPACING " + format_value(g.h) + " " + format_value(g.h) + " 1\n";
  out += "POINT_DATA " + std::to_string(g.nodes()) + "\n";
  for (int c = 0; c < f.ncomp(); ++c) {
    out += "SCALARS " + component_label(f.rank(), c) + " double 1\nLOOKUP_TABLE default\n";
    for (int n = 0; n < g.nodes(); ++n) out += format_value(f(n, c)) + "\n";
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << text;
  if (!os) throw std::runtime_error("write failed: " + path);
}

void write_field(const TensorField& f, const std::string& path, FieldFormat format) {
  write_text(path, format == FieldFormat::csv ? field_csv(f) : field_vtk(f, "defectgeom field"));
}

TensorField read_field_csv(const std::string& path, const Grid2D& g) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error(path + ": empty file");
  int cols = 0;
  for (char ch : line) cols += ch == ',';
  const int ncomp = cols - 1;
  int rank = -1;
  for (int r = 0; r <= 4; ++r)
    if (pow3(r) == ncomp) rank = r;
  if (rank < 0) throw std::runtime_error(path + ": unexpected column count");
  TensorField f(g, rank);
  std::string expect = "x,y";
  for (int c = 0; c < ncomp; ++c) expect += "," + component_label(rank, c);
  if (line != expect) throw std::runtime_error(path + ": unexpected header");
  for (int n = 0; n < g.nodes(); ++n) {
    if (!std::getline(is, line)) throw std::runtime_error(path + ": missing rows");
    const char* p = line.c_str();
    char* end = nullptr;
    double vals[83];
    for (int c = 0; c < ncomp + 2; ++c) {
      vals[c] = std::strtod(p, &end);
      if (end == p) throw std::runtime_error(path + ": bad number on row " + std::to_string(n + 2));
      p = (*end == ',') ? end + 1 : end;
    }
    const Point2 q = g.position(n);
    if (std::abs(vals[0] - q.x) > 1e-9 * g.h || std::abs(vals[1] - q.y) > 1e-9 * g.h)
      throw std::runtime_error(path + ": node coordinates do not match the grid on row " + std::to_string(n + 2));
    for (int c = 0; c < ncomp; ++c) f(n, c) = vals[c + 2];
  }
  return f;
}

}  // namespace defectgeom
