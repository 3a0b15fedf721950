#include "defectgeom/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace defectgeom {

namespace {

std::string where(int line, int col) { return "line " + std::to_string(line) + ", column " + std::to_string(col); }

struct Token {
  enum class Kind { word, number, string, symbol, end } kind = Kind::end;
  std::string text;
  double number = 0.0;
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& s) : s_(s) {}

  Token next() {
    skip();
    Token t;
    t.line = line_;
    t.column = col_;
    if (pos_ >= s_.size()) return t;
    const char c = s_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      t.kind = Token::Kind::word;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        t.text += advance();
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      t.number = std::strtod(begin, &end);
      if (end == begin) throw ConfigError("malformed number at " + where(line_, col_));
      t.kind = Token::Kind::number;
      const std::size_t n = static_cast<std::size_t>(end - begin);
      for (std::size_t i = 0; i < n; ++i) t.text += advance();
      if (pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        throw ConfigError("malformed number at " + where(t.line, t.column));
      return t;
    }
    if (c == '"') {
      advance();
      t.kind = Token::Kind::string;
      while (pos_ < s_.size() && s_[pos_] != '"') {
        if (s_[pos_] == '\n') throw ConfigError("unterminated string at " + where(t.line, t.column));
        t.text += advance();
      }
      if (pos_ >= s_.size()) throw ConfigError("unterminated string at " + where(t.line, t.column));
      advance();
      return t;
    }
    if (c == '{' || c == '}' || c == '=' || c == '[' || c == ']' || c == ',') {
      t.kind = Token::Kind::symbol;
      t.text = advance();
      return t;
    }
    throw ConfigError(std::string("unexpected character '") + c + "' at " + where(line_, col_));
  }

 private:
  char advance() {
    const char c = s_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) {
      ++col_;
    }
    return c;
  }
  void skip() {
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c)) || c == ';') {
        advance();
      } else {
        break;
      }
    }
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(const std::string& s) : lex_(s) { tok_ = lex_.next(); }

  std::vector<ConfigEntry> parse() {
    auto items = body();
    if (tok_.kind != Token::Kind::end)
      throw ConfigError("unexpected '" + tok_.text + "' at " + where(tok_.line, tok_.column));
    return items;
  }

 private:
  bool is(const char* sym) const { return tok_.kind == Token::Kind::symbol && tok_.text == sym; }
  void take() { tok_ = lex_.next(); }
  [[noreturn]] void fail(const std::string& what) const {
    const std::string got = tok_.kind == Token::Kind::end ? "end of file" : "'" + tok_.text + "'";
    throw ConfigError("expected " + what + " but found " + got + " at " + where(tok_.line, tok_.column));
  }

  std::vector<ConfigEntry> body() {
    std::vector<ConfigEntry> items;
    while (tok_.kind == Token::Kind::word) {
      ConfigEntry e;
      e.key = tok_.text;
      e.line = tok_.line;
      e.column = tok_.column;
      take();
      if (is("{")) {
        take();
        e.section = true;
        e.children = body();
        if (!is("}")) fail("'}'");
        take();
      } else if (is("=")) {
        take();
        e.value = value();
      } else {
        fail("'=' or '{'");
      }
      items.push_back(std::move(e));
    }
    return items;
  }

  ConfigValue value() {
    ConfigValue v;
    if (tok_.kind == Token::Kind::number) {
      v.number = tok_.number;
      v.text = tok_.text;
    } else if (tok_.kind == Token::Kind::word) {
      v.kind = ConfigValue::Kind::word;
      v.text = tok_.text;
    } else if (tok_.kind == Token::Kind::string) {
      v.kind = ConfigValue::Kind::string;
      v.text = tok_.text;
    } else if (is("[")) {
      v.kind = ConfigValue::Kind::list;
      take();
      while (!is("]")) {
        if (tok_.kind != Token::Kind::number) fail("a number");
        v.list.push_back(tok_.number);
        take();
        if (is(",")) take();
        else if (!is("]")) fail("',' or ']'");
      }
    } else {
      fail("a value");
    }
    take();
    return v;
  }

  Lexer lex_;
  Token tok_;
};

[[noreturn]] void bad(const ConfigEntry& e, const std::string& what) {
  throw ConfigError("'" + e.key + "' at " + where(e.line, e.column) + ": " + what);
}

[[noreturn]] void unknown(const ConfigEntry& e, const std::string& section) {
  throw ConfigError("unknown key '" + e.key + "' in " + section + " at " + where(e.line, e.column));
}

void expect_value(const ConfigEntry& e) {
  if (e.section) bad(e, "expected a value, found a section");
}
void expect_section(const ConfigEntry& e) {
  if (!e.section) bad(e, "expected a section");
}

double number(const ConfigEntry& e) {
  expect_value(e);
  if (e.value.kind != ConfigValue::Kind::number || !std::isfinite(e.value.number)) bad(e, "expected a number");
  return e.value.number;
}

double positive(const ConfigEntry& e) {
  const double v = number(e);
  if (!(v > 0.0)) bad(e, "must be positive");
  return v;
}

int integer(const ConfigEntry& e) {
  const double v = number(e);
  if (v != std::floor(v) || std::abs(v) > 1e9) bad(e, "expected an integer");
  return static_cast<int>(v);
}

std::vector<double> list(const ConfigEntry& e, std::size_t n) {
  expect_value(e);
  if (e.value.kind != ConfigValue::Kind::list || e.value.list.size() != n)
    bad(e, "expected a list of " + std::to_string(n) + " numbers");
  return e.value.list;
}

Point2 point(const ConfigEntry& e) {
  const auto v = list(e, 2);
  return {v[0], v[1]};
}

Vec3 vec3(const ConfigEntry& e) {
  const auto v = list(e, 3);
  return {v[0], v[1], v[2]};
}

std::string word(const ConfigEntry& e) {
  expect_value(e);
  if (e.value.kind != ConfigValue::Kind::word && e.value.kind != ConfigValue::Kind::string) bad(e, "expected a word");
  return e.value.text;
}

bool boolean(const ConfigEntry& e) {
  const std::string w = word(e);
  if (w == "true") return true;
  if (w == "false") return false;
  bad(e, "expected true or false");
}

// Scalar s or [xx, xy, yx, yy].
SmallTensor plane_tensor(const ConfigEntry& e) {
  expect_value(e);
  SmallTensor t(2);
  if (e.value.kind == ConfigValue::Kind::number) {
    t[at2(X, X)] = t[at2(Y, Y)] = t[at2(Z, Z)] = number(e);
  } else {
    const auto v = list(e, 4);
    t[at2(X, X)] = v[0];
    t[at2(X, Y)] = v[1];
    t[at2(Y, X)] = v[2];
    t[at2(Y, Y)] = v[3];
  }
  return t;
}

ConnectionKind connection(const ConfigEntry& e) {
  const std::string w = word(e);
  if (w == "bravais") return ConnectionKind::bravais;
  if (w == "full") return ConnectionKind::full;
  bad(e, "expected bravais or full");
}

Grid2D read_grid(const ConfigEntry& s) {
  expect_section(s);
  std::optional<double> lo, hi, x0, y0, h;
  std::optional<int> n, nx, ny;
  int order = 6;
  for (const auto& e : s.children) {
    if (e.key == "lo") lo = number(e);
    else if (e.key == "hi") hi = number(e);
    else if (e.key == "n") n = integer(e);
    else if (e.key == "x0") x0 = number(e);
    else if (e.key == "y0") y0 = number(e);
    else if (e.key == "h") h = positive(e);
    else if (e.key == "nx") nx = integer(e);
    else if (e.key == "ny") ny = integer(e);
    else if (e.key == "order") {
      order = integer(e);
      if (order != 2 && order != 4 && order != 6) bad(e, "expected 2, 4 or 6");
    } else unknown(e, "grid");
  }
  try {
    if (lo || hi || n) {
      if (!(lo && hi && n)) throw ConfigError("grid: lo, hi and n must be given together");
      if (x0 || y0 || h || nx || ny) throw ConfigError("grid: use either lo/hi/n or x0/y0/h/nx/ny");
      return Grid2D::square(*lo, *hi, *n, order);
    }
    if (!(x0 && y0 && h && nx && ny)) throw ConfigError("grid: missing lo/hi/n or x0/y0/h/nx/ny");
    return Grid2D(*x0, *y0, *h, *nx, *ny, order);
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(std::string("grid at ") + where(s.line, s.column) + ": " + ex.what());
  }
}

template <class T>
void read_bump(const ConfigEntry& s, T& b, const char* name) {
  expect_section(s);
  for (const auto& e : s.children) {
    if (e.key == "amplitude") b.amplitude = number(e);
    else if (e.key == "center") b.center = point(e);
    else if (e.key == "width") b.width = positive(e);
    else unknown(e, name);
  }
}

ConcentrationSpec read_concentration(const ConfigEntry& s) {
  expect_section(s);
  ConcentrationSpec c;
  for (const auto& e : s.children) {
    if (e.key == "background") {
      c.background = number(e);
      if (c.background < 0.0) bad(e, "must be non-negative");
    } else if (e.key == "bump") {
      ConcentrationBump b;
      read_bump(e, b, "bump");
      c.bumps.push_back(b);
    } else {
      unknown(e, s.key);
    }
  }
  return c;
}

DefectScene read_scene(const ConfigEntry& s) {
  expect_section(s);
  DefectScene sc;
  for (const auto& e : s.children) {
    if (e.key == "reference") {
      sc.reference = point(e);
    } else if (e.key == "screw") {
      expect_section(e);
      ScrewSource src;
      for (const auto& f : e.children) {
        if (f.key == "burgers") src.burgers = number(f);
        else if (f.key == "center") src.center = point(f);
        else if (f.key == "core_radius") src.core_radius = positive(f);
        else unknown(f, "screw");
      }
      sc.screws.push_back(src);
    } else if (e.key == "blob") {
      expect_section(e);
      DensityBlob b;
      for (const auto& f : e.children) {
        if (f.key == "kind") {
          const std::string w = word(f);
          if (w == "dislocation") b.kind = BlobKind::dislocation;
          else if (w == "disclination") b.kind = BlobKind::disclination;
          else bad(f, "expected dislocation or disclination");
        } else if (f.key == "charge") b.charge = vec3(f);
        else if (f.key == "center") b.center = point(f);
        else if (f.key == "width") b.width = positive(f);
        else unknown(f, "blob");
      }
      sc.blobs.push_back(b);
    } else if (e.key == "mollified_screw") {
      expect_section(e);
      MollifiedScrew m;
      for (const auto& f : e.children) {
        if (f.key == "burgers") m.burgers = number(f);
        else if (f.key == "center") m.center = point(f);
        else if (f.key == "width") m.width = positive(f);
        else unknown(f, "mollified_screw");
      }
      sc.mollified_screws.push_back(m);
    } else if (e.key == "axial_bump") {
      AxialBump b;
      read_bump(e, b, "axial_bump");
      sc.axial_bumps.push_back(b);
    } else if (e.key == "airy_bump") {
      AiryBump b;
      read_bump(e, b, "airy_bump");
      sc.airy_bumps.push_back(b);
    } else if (e.key == "displacement_wave") {
      expect_section(e);
      DisplacementWave w;
      for (const auto& f : e.children) {
        if (f.key == "amplitude") w.amplitude = vec3(f);
        else if (f.key == "wavevector") {
          const auto v = list(f, 2);
          w.wavevector = {v[0], v[1]};
        } else if (f.key == "phase") w.phase = number(f);
        else unknown(f, "displacement_wave");
      }
      sc.displacement_waves.push_back(w);
    } else if (e.key == "vacancies") {
      sc.vacancies = read_concentration(e);
    } else if (e.key == "interstitials") {
      sc.interstitials = read_concentration(e);
    } else if (e.key == "temperature") {
      expect_section(e);
      TemperatureSpec t;
      for (const auto& f : e.children) {
        if (f.key == "base") t.base = number(f);
        else if (f.key == "gradient") {
          const auto v = list(f, 2);
          t.gradient = {v[0], v[1]};
        } else unknown(f, "temperature");
      }
      sc.temperature = t;
    } else {
      unknown(e, "scene");
    }
  }
  return sc;
}

LoopSpec read_path(const ConfigEntry& s, bool loop, int index) {
  expect_section(s);
  LoopSpec out;
  out.name = (loop ? "loop" : "path") + std::to_string(index);
  std::optional<Point2> center;
  std::optional<double> side;
  std::vector<double> pts;
  bool reverse = false;
  for (const auto& e : s.children) {
    if (e.key == "name") out.name = word(e);
    else if (loop && e.key == "center") center = point(e);
    else if (loop && e.key == "side") side = positive(e);
    else if (e.key == "reverse") reverse = boolean(e);
    else if (e.key == "points") {
      expect_value(e);
      if (e.value.kind != ConfigValue::Kind::list || e.value.list.size() < 4 || e.value.list.size() % 2)
        bad(e, "expected an even list of at least 4 coordinates");
      pts = e.value.list;
    } else {
      unknown(e, s.key);
    }
  }
  try {
    if (loop && (center || side)) {
      if (!(center && side) || !pts.empty()) bad(s, "give center and side, or points");
      out.path = Polyline::square(*center, *side);
    } else {
      if (pts.empty()) bad(s, "missing points");
      std::vector<Point2> v;
      for (std::size_t i = 0; i < pts.size(); i += 2) v.push_back({pts[i], pts[i + 1]});
      out.path = Polyline(v, loop);
    }
  } catch (const std::invalid_argument& ex) {
    bad(s, ex.what());
  }
  if (reverse) out.path = out.path.reversed();
  return out;
}

TransportSpec read_transport(const ConfigEntry& s) {
  expect_section(s);
  TransportSpec t;
  for (const auto& e : s.children) {
    if (e.key == "vector") t.vector = vec3(e);
    else if (e.key == "connection") t.connection = connection(e);
    else if (e.key == "substep") t.substep = positive(e);
    else if (e.key == "loop") t.paths.push_back(read_path(e, true, static_cast<int>(t.paths.size())));
    else if (e.key == "path") t.paths.push_back(read_path(e, false, static_cast<int>(t.paths.size())));
    else unknown(e, "transport");
  }
  return t;
}

GeodesicSpec read_geodesic(const ConfigEntry& s) {
  expect_section(s);
  GeodesicSpec g;
  for (const auto& e : s.children) {
    if (e.key == "start") g.start = point(e);
    else if (e.key == "tangent") {
      const auto v = list(e, 2);
      g.tangent = {v[0], v[1], 0.0};
    } else if (e.key == "length") g.length = positive(e);
    else if (e.key == "step") g.step = positive(e);
    else if (e.key == "connection") g.connection = connection(e);
    else unknown(e, "geodesic");
  }
  return g;
}

EvolveSpec read_evolve(const ConfigEntry& s) {
  expect_section(s);
  EvolveSpec v;
  for (const auto& e : s.children) {
    if (e.key == "dt") v.dt = positive(e);
    else if (e.key == "steps") {
      v.steps = integer(e);
      if (v.steps < 0) bad(e, "must be non-negative");
    } else if (e.key == "vacancy_diffusivity") v.vacancy_diffusivity = plane_tensor(e);
    else if (e.key == "interstitial_diffusivity") v.interstitial_diffusivity = plane_tensor(e);
    else if (e.key == "vacancy_thermodiffusivity") v.vacancy_thermodiffusivity = plane_tensor(e);
    else if (e.key == "interstitial_thermodiffusivity") v.interstitial_thermodiffusivity = plane_tensor(e);
    else if (e.key == "recombination") {
      v.recombination = number(e);
      if (v.recombination < 0.0) bad(e, "must be non-negative");
    } else if (e.key == "kappa_diffusivity") v.kappa_diffusivity = number(e);
    else if (e.key == "kappa_thermodiffusivity") v.kappa_thermodiffusivity = number(e);
    else if (e.key == "velocity") {
      const auto w = list(e, 2);
      v.velocity = {w[0], w[1]};
    } else if (e.key == "project") v.project = boolean(e);
    else if (e.key == "record_every") {
      v.record_every = integer(e);
      if (v.record_every < 1) bad(e, "must be at least 1");
    } else unknown(e, "evolve");
  }
  return v;
}

VerifySpec read_verify(const ConfigEntry& s, int& refine) {
  expect_section(s);
  VerifySpec v;
  for (const auto& e : s.children) {
    if (e.key == "corrupt_contortion") v.corrupt_contortion = number(e);
    else if (e.key == "stokes_region") {
      const auto r = list(e, 4);
      if (!(r[2] > r[0] && r[3] > r[1])) bad(e, "expected [x0, y0, x1, y1] with x1 > x0 and y1 > y0");
      v.stokes_region = std::array<double, 4>{r[0], r[1], r[2], r[3]};
    } else if (e.key == "holonomy_center") v.holonomy_center = point(e);
    else if (e.key == "holonomy_side") v.holonomy_side = positive(e);
    else if (e.key == "refine") {
      refine = integer(e);
      if (refine < 0 || refine > 4) bad(e, "expected 0..4");
    } else if (e.key == "tolerances") {
      expect_section(e);
      for (const auto& f : e.children) {
        if (!default_tolerances().count(f.key)) unknown(f, "tolerances");
        v.tolerances[f.key] = positive(f);
      }
    } else {
      unknown(e, "verify");
    }
  }
  return v;
}

OutputSpec read_output(const ConfigEntry& s) {
  expect_section(s);
  OutputSpec o;
  for (const auto& e : s.children) {
    if (e.key == "dir") o.dir = word(e);
    else if (e.key == "format") {
      const std::string w = word(e);
      if (w == "csv") o = {o.dir, true, false};
      else if (w == "vtk") o = {o.dir, false, true};
      else if (w == "both") o = {o.dir, true, true};
      else bad(e, "expected csv, vtk or both");
    } else unknown(e, "output");
  }
  return o;
}

}  // namespace

const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> t{
      {"kroener", 1e-3},      {"torsion", 1e-12},          {"contortion_identity", 1e-12},
      {"metric", 1.0},        {"einstein", 1e-3},          {"gauss", 1e-3},
      {"stokes", 1e-3},       {"holonomy", 0.05},          {"conservation", 1e-3},
      {"hat_fixed_point", 1e-10}, {"curvature_identity", 1e-8},
  };
  return t;
}

std::vector<ConfigEntry> parse_config_text(const std::string& text) { return Parser(text).parse(); }

RunConfig config_from_entries(const std::vector<ConfigEntry>& entries) {
  RunConfig cfg;
  bool have_grid = false;
  for (const auto& e : entries) {
    if (e.key == "grid") {
      cfg.grid = read_grid(e);
      have_grid = true;
    } else if (e.key == "scene") cfg.scene = read_scene(e);
    else if (e.key == "transport") cfg.transport = read_transport(e);
    else if (e.key == "geodesic") cfg.geodesic = read_geodesic(e);
    else if (e.key == "evolve") cfg.evolve = read_evolve(e);
    else if (e.key == "verify") cfg.verify = read_verify(e, cfg.refine);
    else if (e.key == "output") cfg.output = read_output(e);
    else unknown(e, "the top level");
  }
  if (!have_grid) throw ConfigError("missing section 'grid'");
  return cfg;
}

RunConfig load_config_text(const std::string& text) { return config_from_entries(parse_config_text(text)); }

RunConfig load_config(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read config " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  try {
    return load_config_text(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void apply_tolerance_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("tolerance override '" + assignment + "' is not name=value");
  const std::string name = assignment.substr(0, eq);
  if (!default_tolerances().count(name)) throw ConfigError("unknown tolerance '" + name + "'");
  const std::string text = assignment.substr(eq + 1);
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0' || !(v > 0.0) || !std::isfinite(v))
    throw ConfigError("tolerance '" + name + "' needs a positive number");
  cfg.verify.tolerances[name] = v;
}

}  // namespace defectgeom
