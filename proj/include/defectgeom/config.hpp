#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "defectgeom/defect_fields.hpp"
#include "defectgeom/grid.hpp"

namespace defectgeom {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Syntax tree of the `section { key = value }` grammar.
struct ConfigValue {
  enum class Kind { number, word, string, list } kind = Kind::number;
  double number = 0.0;
  std::string text;
  std::vector<double> list;
};

struct ConfigEntry {
  std::string key;
  int line = 0;
  int column = 0;
  bool section = false;
  ConfigValue value;
  std::vector<ConfigEntry> children;
};

// Throws ConfigError with "line L, column C" on malformed input.
std::vector<ConfigEntry> parse_config_text(const std::string& text);

enum class ConnectionKind { bravais, full };

struct LoopSpec {
  std::string name;
  Polyline path{{{0.0, 0.0}, {0.0, 0.0}}, false};
};

struct TransportSpec {
  Vec3 vector{1.0, 0.0, 0.0};
  ConnectionKind connection = ConnectionKind::full;
  double substep = 0.5;
  std::vector<LoopSpec> paths;
};

struct GeodesicSpec {
  Point2 start;
  Vec3 tangent{1.0, 0.0, 0.0};
  double length = 1.0;
  double step = 0.5;
  ConnectionKind connection = ConnectionKind::full;
};

struct EvolveSpec {
  double dt = 0.0;  // 0 picks the largest stable step
  int steps = 100;
  SmallTensor vacancy_diffusivity{2};
  SmallTensor interstitial_diffusivity{2};
  SmallTensor vacancy_thermodiffusivity{2};
  SmallTensor interstitial_thermodiffusivity{2};
  double recombination = 0.0;
  double kappa_diffusivity = 0.0;       // times the identity map
  double kappa_thermodiffusivity = 0.0;  // times the identity map
  std::array<double, 2> velocity{0.0, 0.0};
  bool project = false;
  int record_every = 1;
};

struct VerifySpec {
  double corrupt_contortion = 1.0;
  std::optional<std::array<double, 4>> stokes_region;  // x0, y0, x1, y1
  std::optional<Point2> holonomy_center;
  double holonomy_side = 0.0;  // 0: eight grid spacings
  std::map<std::string, double> tolerances;
};

struct OutputSpec {
  std::string dir = "out";
  bool csv = true;
  bool vtk = false;
};

struct RunConfig {
  Grid2D grid;
  DefectScene scene;
  TransportSpec transport;
  GeodesicSpec geodesic;
  EvolveSpec evolve;
  VerifySpec verify;
  OutputSpec output;
  int refine = 0;
};

// Verification thresholds by name; unknown names are rejected.
const std::map<std::string, double>& default_tolerances();

RunConfig config_from_entries(const std::vector<ConfigEntry>& entries);
RunConfig load_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

// Applies "name=value"; throws ConfigError for malformed text or a non-positive value.
void apply_tolerance_override(RunConfig& cfg, const std::string& assignment);

}  // namespace defectgeom
