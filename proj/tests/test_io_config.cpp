#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "doctest.h"
#include "defectgeom/config.hpp"
#include "defectgeom/field_io.hpp"

using namespace defectgeom;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "defectgeom_unit" / name;
  fs::create_directories(p.parent_path());
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string error_of(const std::string& text) {
  try {
    load_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("value formatting") {
  CHECK(format_value(0.0) == "0.0000000000000000e0");
  CHECK(format_value(-0.0) == "0.0000000000000000e0");
  CHECK(format_value(1.25e-3) == "1.2500000000000000e-3");
  CHECK(format_value(-42.0) == "-4.2000000000000000e1");
  CHECK(format_value(1e300) == "1.0000000000000001e300");
}

TEST_CASE("component labels") {
  CHECK(component_label(0, 0) == "c");
  CHECK(component_label(1, 2) == "c3");
  CHECK(component_label(2, 0) == "c11");
  CHECK(component_label(2, 5) == "c23");
  CHECK(component_label(2, 8) == "c33");
  CHECK(component_label(4, at4(2, 0, 1, 2)) == "c3123");
}

TEST_CASE("CSV layout") {
  const Grid2D g = Grid2D::square(0.0, 1.0, 3);
  const std::string csv = field_csv(TensorField(g, 0));
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  CHECK(line == "x,y,c");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    CHECK(line.substr(line.rfind(',') + 1) == "0.0000000000000000e0");
  }
  CHECK(rows == 9);
  CHECK(csv.find('\r') == std::string::npos);
  CHECK(csv.back() == '\n');

  const std::string rank2 = field_csv(TensorField(g, 2));
  CHECK(rank2.substr(0, rank2.find('\n')) == "x,y,c11,c12,c13,c21,c22,c23,c31,c32,c33");
  // rows run over x first, then y
  std::istringstream r2(rank2);
  std::getline(r2, line);
  std::getline(r2, line);
  CHECK(line.rfind("0.0000000000000000e0,0.0000000000000000e0,", 0) == 0);
  std::getline(r2, line);
  CHECK(line.rfind("5.0000000000000000e-1,0.0000000000000000e0,", 0) == 0);
}

TEST_CASE("CSV round trip is bit exact") {
  const Grid2D g = Grid2D(-0.3, 0.7, 0.1, 7, 5);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TensorField f(g, 2);
  for (double& v : f.data()) v = u(rng) * std::pow(10.0, 40.0 * u(rng));
  f(0, 0) = std::numeric_limits<double>::denorm_min();
  f(1, 0) = std::numeric_limits<double>::max();
  const fs::path p = scratch("roundtrip.csv");
  write_field(f, p.string(), FieldFormat::csv);
  const TensorField back = read_field_csv(p.string(), g);
  for (std::size_t i = 0; i < f.data().size(); ++i) CHECK(back.data()[i] == f.data()[i]);
  CHECK_THROWS(read_field_csv(p.string(), Grid2D(-0.3, 0.7, 0.1, 7, 6)));
}

TEST_CASE("VTK output") {
  const Grid2D g = Grid2D(0.0, 0.0, 0.5, 4, 3);
  const std::string vtk = field_vtk(TensorField(g, 1), "probe");
  CHECK(vtk.rfind("# vtk DataFile Version 3.0\nprobe\nASCII\nDATASET STRUCTURED_POINTS\n", 0) == 0);
  CHECK(vtk.find("DIMENSIONS 4 3 1") != std::string::npos);
  CHECK(vtk.find("POINT_DATA 12") != std::string::npos);
  CHECK(vtk.find("SCALARS c1 double") != std::string::npos);
  CHECK(vtk.find("SCALARS c3 double") != std::string::npos);
  CHECK_THROWS_AS(write_field(TensorField(g, 0), "/nonexistent_dir/x.csv", FieldFormat::csv), std::runtime_error);
}

TEST_CASE("minimal config gets defaults") {
  const RunConfig c = load_config_text(
      "# a screw\n"
      "grid { lo = -1 hi = 1 n = 33 }\n"
      "scene { screw { burgers = 0.1 center = [0, 0] core_radius = 0.2 } }\n");
  CHECK(c.grid.nx == 33);
  CHECK(c.grid.h == doctest::Approx(2.0 / 32));
  CHECK(c.grid.stencil_order == 6);
  REQUIRE(c.scene.screws.size() == 1);
  CHECK(c.scene.screws[0].burgers == 0.1);
  CHECK(c.output.dir == "out");
  CHECK(c.output.csv);
  CHECK_FALSE(c.output.vtk);
  CHECK(c.verify.corrupt_contortion == 1.0);
  CHECK(c.refine == 0);
}

TEST_CASE("unknown keys are rejected with their location") {
  const std::string msg = error_of(
      "grid { lo = -1 hi = 1 n = 33 }\n"
      "scene {\n"
      "  screw { burgers = 0.1 corelessness = 1 }\n"
      "}\n");
  CHECK(msg.find("corelessness") != std::string::npos);
  CHECK(msg.find("line 3, column 25") != std::string::npos);
  CHECK(error_of("grid { lo = -1 hi = 1 n = 33 }\nbogus { }\n").find("line 2, column 1") != std::string::npos);
}

TEST_CASE("syntax errors carry line and column") {
  CHECK(error_of("grid { lo = -1 hi = 1 n = 33\n").find("line 2") != std::string::npos);
  CHECK(error_of("grid { lo = = 1 }").find("line 1, column 13") != std::string::npos);
  CHECK(error_of("grid { lo = -1 hi = 1 n = 33 }\nscene { reference = [0, 0 }\n").find("line 2") !=
        std::string::npos);
  CHECK(error_of("output { dir = \"abc }").find("unterminated") != std::string::npos);
  CHECK(error_of("grid { lo = -1 hi = 1 n = 33 order = 3 }").find("order") != std::string::npos);
  CHECK(error_of("grid { lo = -1 hi = 1 }").find("grid") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/file.cfg"), ConfigError);
}

TEST_CASE("parse tree") {
  const auto entries = parse_config_text("a = 1\nb { c = word d = \"text\" e = [1, 2.5, -3e-2] }\n");
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].value.number == 1.0);
  CHECK(entries[1].section);
  REQUIRE(entries[1].children.size() == 3);
  CHECK(entries[1].children[0].value.kind == ConfigValue::Kind::word);
  CHECK(entries[1].children[1].value.text == "text");
  CHECK(entries[1].children[2].value.list == std::vector<double>{1.0, 2.5, -3e-2});
  CHECK(entries[1].children[2].line == 2);
}

TEST_CASE("tolerance overrides") {
  RunConfig c = load_config_text("grid { lo = -1 hi = 1 n = 17 }\nverify { tolerances { kroener = 1e-6 } }\n");
  CHECK(c.verify.tolerances.at("kroener") == 1e-6);
  apply_tolerance_override(c, "holonomy=0.01");
  CHECK(c.verify.tolerances.at("holonomy") == 0.01);
  CHECK_THROWS_AS(apply_tolerance_override(c, "holonomy"), ConfigError);
  CHECK_THROWS_AS(apply_tolerance_override(c, "nonsense=1"), ConfigError);
  CHECK_THROWS_AS(apply_tolerance_override(c, "kroener=-1"), ConfigError);
  CHECK_THROWS_AS(apply_tolerance_override(c, "kroener=1x"), ConfigError);
  CHECK(error_of("grid { lo = -1 hi = 1 n = 17 }\nverify { tolerances { frobnicate = 1 } }\n")
            .find("frobnicate") != std::string::npos);
  for (const auto& [name, v] : default_tolerances()) CHECK(v > 0.0);
}
