#pragma once

// Study configuration and pipelines behind the command-line workbench. Every
// pipeline validates and computes in memory first; files are only written by
// write_outputs once everything succeeded.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cmaw/cma_core.hpp"
#include "cmaw/conformal_array.hpp"
#include "cmaw/csv.hpp"
#include "cmaw/em_kernel.hpp"
#include "cmaw/error.hpp"
#include "cmaw/geometry.hpp"
#include "cmaw/radiation.hpp"
#include "cmaw/touchstone.hpp"

namespace cmaw {

inline constexpr const char* kVersion = "0.1.0";

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Quantities with unit suffixes

enum class Dimension { Length, Frequency, Angle };

namespace detail {

inline double unit_scale(Dimension dim, const std::string& unit) {
  const std::string u = lower(unit);
  switch (dim) {
    case Dimension::Length:
      if (u.empty() || u == "m") return 1.0;
      if (u == "cm") return 1e-2;
      if (u == "mm") return 1e-3;
      if (u == "um") return 1e-6;
      break;
    case Dimension::Frequency:
      if (u.empty() || u == "hz") return 1.0;
      if (u == "khz") return 1e3;
      if (u == "mhz") return 1e6;
      if (u == "ghz") return 1e9;
      break;
    case Dimension::Angle:
      if (u.empty() || u == "deg") return 1.0;
      break;
  }
  return 0.0;
}

}  // namespace detail

/// Number in SI (or degrees for angles), or a string such as "5 GHz", "29.98 mm".
inline double parse_quantity(const json& v, Dimension dim, const std::string& field) {
  if (v.is_number()) {
    const double x = v.get<double>();
    detail::require(std::isfinite(x), field + ": value must be finite");
    return x;
  }
  detail::require(v.is_string(), field + ": expected a number or a string with a unit");
  const std::string s = v.get<std::string>();
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  if (first < last && *first == '+') ++first;
  double x = 0.0;
  const auto res = std::from_chars(first, last, x);
  detail::require(res.ec == std::errc{} && std::isfinite(x), field + ": cannot read a number from '" + s + "'");
  std::string unit(res.ptr, last);
  unit.erase(0, unit.find_first_not_of(' '));
  unit.erase(unit.find_last_not_of(' ') + 1);
  const double scale = detail::unit_scale(dim, unit);
  detail::require(scale > 0.0, field + ": unknown unit '" + unit + "'");
  return x * scale;
}

inline BendSpec parse_curvature(const json& v, const std::string& field) {
  if (v.is_string() && detail::lower(v.get<std::string>()) == "planar") return BendSpec::planar();
  const double rc = parse_quantity(v, Dimension::Length, field);
  detail::require(rc > 0.0, field + ": curvature radius must be positive");
  return BendSpec::radius(rc);
}

// ---------------------------------------------------------------------------
// Configuration

struct GeometryConfig {
  std::vector<int> sections;
  double section_length = 0.0;
  double width = 2e-3;
  int segments_per_section = 20;
};

struct FrequencyConfig {
  double start = 0.0;
  double stop = 0.0;
  std::size_t points = 0;

  FrequencyGrid grid() const { return FrequencyGrid::linspace(start, stop, points); }
};

struct PatternConfig {
  double frequency = 0.0;
  std::size_t modes = 3;
  double theta_step_deg = 5.0;
  double phi_step_deg = 5.0;
  BendSpec curvature;
};

struct ArrayConfig {
  int nx = 8;
  int ny = 8;
  double dx = 0.0;
  double dy = 0.0;
  std::vector<BendSpec> curvatures{BendSpec::planar()};
  Polarization polarization = Polarization::X;
  int passive_border = 0;
  double frequency = 0.0;
  std::string element = "cosine";  // isotropic | cosine | file
  std::string element_file;
  ScanPlane plane = ScanPlane::E;
  std::vector<double> scan_angles_deg{0.0};
  std::string touchstone;
  double cut_step_deg = 0.1;
};

struct StudyConfig {
  std::optional<GeometryConfig> geometry;
  std::optional<FrequencyConfig> frequency;
  std::vector<BendSpec> curvatures{BendSpec::planar()};
  std::size_t modes = 16;
  double tracking_threshold = 0.7;
  double pairing_threshold = 0.7;
  std::optional<std::pair<double, double>> band;
  std::size_t report_modes = 11;
  std::string output_dir = "out";
  std::optional<PatternConfig> pattern;
  std::optional<ArrayConfig> array;

  json source;           // parsed document, for the digest
  std::string base_dir;  // relative input paths resolve against this
};

namespace detail {

inline void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  require(obj.is_object(), (where.empty() ? std::string("config") : where) + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    require(ok, (where.empty() ? "" : where + ".") + key + ": unknown field");
  }
}

inline double get_number(const json& obj, const char* key, const std::string& field) {
  require(obj.at(key).is_number(), field + ": expected a number");
  const double v = obj.at(key).get<double>();
  require(std::isfinite(v), field + ": value must be finite");
  return v;
}

inline long get_int(const json& obj, const char* key, const std::string& field) {
  require(obj.at(key).is_number_integer(), field + ": expected an integer");
  return obj.at(key).get<long>();
}

inline std::string get_string(const json& obj, const char* key, const std::string& field) {
  require(obj.at(key).is_string(), field + ": expected a string");
  return obj.at(key).get<std::string>();
}

inline std::vector<BendSpec> parse_curvature_list(const json& v, const std::string& field) {
  require(v.is_array(), field + ": expected a list");
  std::vector<BendSpec> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(parse_curvature(v[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace detail

inline StudyConfig parse_config(const json& doc, const std::string& base_dir = ".") {
  using namespace detail;
  check_keys(doc, "", {"geometry", "frequency", "curvatures", "modes", "tracking_threshold", "pairing_threshold",
                       "band", "report_modes", "output_dir", "pattern", "array", "seed", "description"});
  StudyConfig c;
  c.source = doc;
  c.base_dir = base_dir;

  if (doc.contains("geometry")) {
    const auto& g = doc.at("geometry");
    check_keys(g, "geometry", {"sections", "section_length", "width", "segments_per_section"});
    GeometryConfig gc;
    require(g.contains("sections"), "geometry.sections: required");
    if (g.at("sections").is_array()) {
      for (std::size_t i = 0; i < g.at("sections").size(); ++i) {
        const auto& s = g.at("sections")[i];
        require(s.is_number_integer(), "geometry.sections[" + std::to_string(i) + "]: expected an integer");
        gc.sections.push_back(s.get<int>());
      }
    } else {
      gc.sections.push_back(static_cast<int>(get_int(g, "sections", "geometry.sections")));
    }
    require(!gc.sections.empty(), "geometry.sections: list is empty");
    for (int n : gc.sections) require(n >= 1, "geometry.sections: section count must be >= 1");
    require(g.contains("section_length"), "geometry.section_length: required");
    gc.section_length = parse_quantity(g.at("section_length"), Dimension::Length, "geometry.section_length");
    require(gc.section_length > 0.0, "geometry.section_length: must be positive");
    if (g.contains("width")) gc.width = parse_quantity(g.at("width"), Dimension::Length, "geometry.width");
    require(gc.width > 0.0, "geometry.width: must be positive");
    if (g.contains("segments_per_section"))
      gc.segments_per_section = static_cast<int>(get_int(g, "segments_per_section", "geometry.segments_per_section"));
    require(gc.segments_per_section >= 4, "geometry.segments_per_section: must be >= 4");
    c.geometry = gc;
  }

  if (doc.contains("frequency")) {
    const auto& f = doc.at("frequency");
    check_keys(f, "frequency", {"start", "stop", "points"});
    require(f.contains("start") && f.contains("stop") && f.contains("points"),
            "frequency: start, stop and points are required");
    FrequencyConfig fc;
    fc.start = parse_quantity(f.at("start"), Dimension::Frequency, "frequency.start");
    fc.stop = parse_quantity(f.at("stop"), Dimension::Frequency, "frequency.stop");
    const long pts = get_int(f, "points", "frequency.points");
    require(pts >= 2, "frequency.points: grid needs at least two points");
    fc.points = static_cast<std::size_t>(pts);
    require(fc.start > 0.0, "frequency.start: must be positive");
    require(fc.stop > fc.start, "frequency.stop: must exceed frequency.start");
    c.frequency = fc;
  }

  if (doc.contains("curvatures")) {
    c.curvatures = parse_curvature_list(doc.at("curvatures"), "curvatures");
    require(!c.curvatures.empty(), "curvatures: list is empty");
  }
  if (doc.contains("modes")) {
    const long m = get_int(doc, "modes", "modes");
    require(m >= 1, "modes: must be >= 1");
    c.modes = static_cast<std::size_t>(m);
  }
  if (doc.contains("tracking_threshold")) {
    c.tracking_threshold = get_number(doc, "tracking_threshold", "tracking_threshold");
    require(c.tracking_threshold > 0.0 && c.tracking_threshold <= 1.0, "tracking_threshold: must lie in (0, 1]");
  }
  if (doc.contains("pairing_threshold")) {
    c.pairing_threshold = get_number(doc, "pairing_threshold", "pairing_threshold");
    require(c.pairing_threshold > 0.0 && c.pairing_threshold <= 1.0, "pairing_threshold: must lie in (0, 1]");
  }
  if (doc.contains("band")) {
    const auto& b = doc.at("band");
    check_keys(b, "band", {"min", "max"});
    require(b.contains("min") && b.contains("max"), "band: min and max are required");
    const double lo = parse_quantity(b.at("min"), Dimension::Frequency, "band.min");
    const double hi = parse_quantity(b.at("max"), Dimension::Frequency, "band.max");
    require(hi > lo, "band.max: must exceed band.min");
    c.band = {lo, hi};
  }
  if (doc.contains("report_modes")) {
    const long r = get_int(doc, "report_modes", "report_modes");
    require(r >= 1, "report_modes: must be >= 1");
    c.report_modes = static_cast<std::size_t>(r);
  }
  if (doc.contains("output_dir")) {
    c.output_dir = get_string(doc, "output_dir", "output_dir");
    require(!c.output_dir.empty(), "output_dir: must not be empty");
  }
  if (doc.contains("seed")) require(doc.at("seed").is_number_integer(), "seed: expected an integer");

  if (doc.contains("pattern")) {
    const auto& p = doc.at("pattern");
    check_keys(p, "pattern", {"frequency", "modes", "theta_step_deg", "phi_step_deg", "curvature"});
    PatternConfig pc;
    require(p.contains("frequency"), "pattern.frequency: required");
    pc.frequency = parse_quantity(p.at("frequency"), Dimension::Frequency, "pattern.frequency");
    require(pc.frequency > 0.0, "pattern.frequency: must be positive");
    if (p.contains("modes")) {
      const long m = get_int(p, "modes", "pattern.modes");
      require(m >= 1, "pattern.modes: must be >= 1");
      pc.modes = static_cast<std::size_t>(m);
    }
    if (p.contains("theta_step_deg")) pc.theta_step_deg = get_number(p, "theta_step_deg", "pattern.theta_step_deg");
    if (p.contains("phi_step_deg")) pc.phi_step_deg = get_number(p, "phi_step_deg", "pattern.phi_step_deg");
    require(pc.theta_step_deg > 0.0 && pc.theta_step_deg <= 5.0, "pattern.theta_step_deg: must lie in (0, 5]");
    require(pc.phi_step_deg > 0.0 && pc.phi_step_deg <= 5.0, "pattern.phi_step_deg: must lie in (0, 5]");
    if (p.contains("curvature")) pc.curvature = parse_curvature(p.at("curvature"), "pattern.curvature");
    c.pattern = pc;
  }

  if (doc.contains("array")) {
    const auto& a = doc.at("array");
    check_keys(a, "array", {"nx", "ny", "dx", "dy", "curvatures", "polarization", "passive_border", "frequency",
                            "element", "element_file", "plane", "scan_angles_deg", "touchstone", "cut_step_deg"});
    ArrayConfig ac;
    if (a.contains("nx")) ac.nx = static_cast<int>(get_int(a, "nx", "array.nx"));
    if (a.contains("ny")) ac.ny = static_cast<int>(get_int(a, "ny", "array.ny"));
    require(ac.nx >= 1 && ac.ny >= 1, "array.nx, array.ny: must be >= 1");
    require(a.contains("dx") && a.contains("dy"), "array.dx, array.dy: required");
    ac.dx = parse_quantity(a.at("dx"), Dimension::Length, "array.dx");
    ac.dy = parse_quantity(a.at("dy"), Dimension::Length, "array.dy");
    require(ac.dx > 0.0 && ac.dy > 0.0, "array.dx, array.dy: must be positive");
    if (a.contains("curvatures")) {
      ac.curvatures = parse_curvature_list(a.at("curvatures"), "array.curvatures");
      require(!ac.curvatures.empty(), "array.curvatures: list is empty");
    }
    if (a.contains("polarization")) {
      const std::string p = get_string(a, "polarization", "array.polarization");
      require(p == "X" || p == "Y", "array.polarization: expected X or Y");
      ac.polarization = p == "X" ? Polarization::X : Polarization::Y;
    }
    if (a.contains("passive_border")) {
      ac.passive_border = static_cast<int>(get_int(a, "passive_border", "array.passive_border"));
      require(ac.passive_border >= 0 && 2 * ac.passive_border < std::min(ac.nx, ac.ny),
              "array.passive_border: must leave at least one active element");
    }
    require(a.contains("frequency"), "array.frequency: required");
    ac.frequency = parse_quantity(a.at("frequency"), Dimension::Frequency, "array.frequency");
    require(ac.frequency > 0.0, "array.frequency: must be positive");
    if (a.contains("element")) ac.element = get_string(a, "element", "array.element");
    require(ac.element == "isotropic" || ac.element == "cosine" || ac.element == "file",
            "array.element: expected isotropic, cosine or file");
    if (a.contains("element_file")) ac.element_file = get_string(a, "element_file", "array.element_file");
    require(ac.element != "file" || !ac.element_file.empty(), "array.element_file: required when element is file");
    if (a.contains("plane")) {
      const std::string p = get_string(a, "plane", "array.plane");
      require(p == "E" || p == "H", "array.plane: expected E or H");
      ac.plane = p == "E" ? ScanPlane::E : ScanPlane::H;
    }
    if (a.contains("scan_angles_deg")) {
      const auto& s = a.at("scan_angles_deg");
      require(s.is_array() && !s.empty(), "array.scan_angles_deg: expected a non-empty list");
      ac.scan_angles_deg.clear();
      for (std::size_t i = 0; i < s.size(); ++i) {
        const std::string f = "array.scan_angles_deg[" + std::to_string(i) + "]";
        const double v = parse_quantity(s[i], Dimension::Angle, f);
        require(std::abs(v) < 90.0, f + ": must lie in (-90, 90)");
        ac.scan_angles_deg.push_back(v);
      }
    }
    if (a.contains("touchstone")) ac.touchstone = get_string(a, "touchstone", "array.touchstone");
    if (a.contains("cut_step_deg")) ac.cut_step_deg = get_number(a, "cut_step_deg", "array.cut_step_deg");
    require(ac.cut_step_deg > 0.0 && ac.cut_step_deg <= 1.0, "array.cut_step_deg: must lie in (0, 1]");
    c.array = ac;
  }
  return c;
}

inline StudyConfig load_config(const std::string& path) {
  const std::string text = csv::read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": invalid JSON: " + e.what());
  }
  const auto parent = std::filesystem::path(path).parent_path();
  return parse_config(doc, parent.empty() ? "." : parent.string());
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Digest of the canonical (key-sorted, compact) config document.
inline std::string config_digest(const StudyConfig& c) { return "fnv1a64:" + hex64(fnv1a(c.source.dump())); }

// ---------------------------------------------------------------------------
// Outputs

struct OutputFile {
  std::string name;
  std::string content;
};

struct StudyOutput {
  std::string command;
  std::vector<OutputFile> files;

  void add(std::string name, std::string content) { files.push_back({std::move(name), std::move(content)}); }
};

namespace detail {

inline std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

/// Writes every file plus manifest.json into `dir`.
inline std::vector<std::string> write_outputs(const std::string& dir, const StudyOutput& out, const StudyConfig& cfg,
                                              const std::string& started_utc) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  std::vector<std::string> written;
  json files = json::array();
  for (const auto& f : out.files) {
    const auto path = (std::filesystem::path(dir) / f.name).string();
    csv::write_file(path, f.content);
    written.push_back(path);
    files.push_back({{"path", f.name}, {"bytes", f.content.size()}, {"fnv1a64", hex64(fnv1a(f.content))}});
  }
  json manifest = {{"artifact", "cmaw"},
                   {"version", kVersion},
                   {"command", out.command},
                   {"config_digest", config_digest(cfg)},
                   {"started_utc", started_utc},
                   {"finished_utc", detail::utc_now()},
                   {"files", files}};
  const auto mpath = (std::filesystem::path(dir) / "manifest.json").string();
  csv::write_file(mpath, manifest.dump(2) + "\n");
  written.push_back(mpath);
  return written;
}

// ---------------------------------------------------------------------------
// Characteristic-mode studies

struct CurvatureRun {
  int sections = 0;
  BendSpec bend;
  WireMesh mesh;
  std::vector<ModalSolution> sweep;
  std::vector<ModeTrack> tracks;
  std::vector<ResonantMode> resonances;  // in band, ascending
};

namespace detail {

inline const GeometryConfig& need_geometry(const StudyConfig& c) {
  require(c.geometry.has_value(), "geometry: section required");
  return *c.geometry;
}

inline const FrequencyConfig& need_frequency(const StudyConfig& c) {
  require(c.frequency.has_value(), "frequency: section required");
  return *c.frequency;
}

inline std::pair<double, double> band_of(const StudyConfig& c) {
  const auto& f = need_frequency(c);
  return c.band.value_or(std::pair{f.start, f.stop});
}

}  // namespace detail

/// Mesh for N sections at one curvature, checked against the top frequency.
inline WireMesh study_mesh(const GeometryConfig& g, int sections, const BendSpec& bend, double f_max) {
  WireMesh m = build_strip_chain(sections, g.section_length, g.width, g.segments_per_section, f_max);
  return bend.is_planar() ? m : bend_to_cylinder(m, bend);
}

inline CurvatureRun run_curvature(const StudyConfig& c, int sections, const BendSpec& bend) {
  const auto& g = detail::need_geometry(c);
  const auto& f = detail::need_frequency(c);
  const auto grid = f.grid();
  CurvatureRun run;
  run.sections = sections;
  run.bend = bend;
  run.mesh = study_mesh(g, sections, bend, grid.max());
  const auto mats = sweep_impedance(run.mesh, grid);
  ModeSolverOptions opt;
  opt.clamp_to_retained = true;
  run.sweep = solve_sweep(mats, c.modes, opt);
  run.tracks = track_modes(run.sweep, TrackingOptions{c.tracking_threshold});
  const auto [lo, hi] = detail::band_of(c);
  run.resonances = resonant_modes(run.tracks, lo, hi);
  return run;
}

inline std::string resonances_to_csv(const std::vector<ResonantMode>& res) {
  std::string out = "rank,track_id,frequency_hz\n";
  for (std::size_t i = 0; i < res.size(); ++i)
    out += csv::row({std::to_string(i + 1), std::to_string(res[i].track_id), csv::num(res[i].frequency)});
  return out;
}

/// Validates the mesh and frequency plan for every requested curvature without
/// solving anything.
inline void validate_mode_study(const StudyConfig& c, const std::vector<BendSpec>& bends) {
  const auto& g = detail::need_geometry(c);
  const auto& f = detail::need_frequency(c);
  for (int n : g.sections)
    for (const auto& b : bends) (void)study_mesh(g, n, b, f.stop);
}

struct ModesResult {
  std::vector<CurvatureRun> runs;  // one per section count
};

inline ModesResult run_modes(const StudyConfig& c, StudyOutput& out) {
  validate_mode_study(c, {BendSpec::planar()});
  out.command = "modes";
  ModesResult r;
  for (int n : c.geometry->sections) {
    r.runs.push_back(run_curvature(c, n, BendSpec::planar()));
    const std::string stem = "modes_N" + std::to_string(n);
    out.add(stem + "_ms.csv", tracks_to_csv(r.runs.back().tracks));
    out.add(stem + "_resonances.csv", resonances_to_csv(r.runs.back().resonances));
  }
  return r;
}

struct BendStudyResult {
  std::vector<CurvatureRun> runs;
  std::vector<FluctuationReport> fv;  // each non-reference state against the planar reference
};

namespace detail {

inline std::vector<ResonantMode> first_n(const std::vector<ResonantMode>& v, std::size_t n) {
  return {v.begin(), v.begin() + static_cast<std::ptrdiff_t>(std::min(n, v.size()))};
}

inline int single_section_count(const StudyConfig& c) {
  const auto& g = need_geometry(c);
  require(g.sections.size() == 1, "geometry.sections: this study needs exactly one section count");
  return g.sections.front();
}

inline std::vector<CurvatureRun> run_all_curvatures(const StudyConfig& c, int sections) {
  std::vector<CurvatureRun> runs;
  for (const auto& b : c.curvatures) runs.push_back(run_curvature(c, sections, b));
  return runs;
}

}  // namespace detail

inline BendStudyResult run_bend_study(const StudyConfig& c, StudyOutput& out) {
  const int n = detail::single_section_count(c);
  detail::require(c.curvatures.size() >= 2, "curvatures: a bend study needs at least two curvature states");
  const auto ref = std::find_if(c.curvatures.begin(), c.curvatures.end(), [](const BendSpec& b) { return b.is_planar(); });
  detail::require(ref != c.curvatures.end(), "curvatures: a bend study needs the planar reference");
  validate_mode_study(c, c.curvatures);
  out.command = "bend-study";

  BendStudyResult r;
  r.runs = detail::run_all_curvatures(c, n);
  const std::size_t ref_idx = static_cast<std::size_t>(ref - c.curvatures.begin());
  const auto ref_modes = detail::first_n(r.runs[ref_idx].resonances, c.report_modes);
  std::string table = "state,label,n,fv_ghz\n";
  for (std::size_t i = 0; i < r.runs.size(); ++i) {
    const auto label = r.runs[i].bend.label();
    const std::string stem = "bend_" + std::to_string(i) + "_" + label;
    out.add(stem + "_ms.csv", tracks_to_csv(r.runs[i].tracks));
    out.add(stem + "_resonances.csv", resonances_to_csv(r.runs[i].resonances));
    if (i == ref_idx) continue;
    auto rep = paired_fluctuation(ref_modes, detail::first_n(r.runs[i].resonances, c.report_modes),
                                  c.pairing_threshold);
    rep.label_a = "planar";
    rep.label_b = label;
    out.add("fv_" + std::to_string(i) + "_" + label + ".csv", fluctuation_to_csv(rep));
    table += csv::row({std::to_string(i), label, std::to_string(rep.n), csv::num(rep.fv_ghz)});
    r.fv.push_back(std::move(rep));
  }
  out.add("fv_summary.csv", table);
  return r;
}

struct NullRecord {
  std::string label;
  std::size_t rank = 0;
  int track_id = 0;
  double frequency = 0.0;
  int nulls = 0;
  int near_field_maxima = 0;
};

struct NullsResult {
  std::vector<CurvatureRun> runs;
  std::vector<NullRecord> records;
};

inline NullsResult run_nulls(const StudyConfig& c, StudyOutput& out) {
  const int n = detail::single_section_count(c);
  validate_mode_study(c, c.curvatures);
  out.command = "nulls";
  NullsResult r;
  r.runs = detail::run_all_curvatures(c, n);
  std::string table = "state,label,rank,track_id,frequency_hz,nulls,near_field_maxima\n";
  for (std::size_t i = 0; i < r.runs.size(); ++i) {
    const auto& run = r.runs[i];
    const auto modes = detail::first_n(run.resonances, c.report_modes);
    for (std::size_t k = 0; k < modes.size(); ++k) {
      const Eigen::VectorXcd j = modes[k].current.cast<cplx>();
      const auto samples = current_samples(run.mesh, j);
      NullRecord rec{run.bend.label(), k + 1, modes[k].track_id, modes[k].frequency, count_current_nulls(samples),
                     near_field_maxima(run.mesh, j, modes[k].frequency)};
      table += csv::row({std::to_string(i), rec.label, std::to_string(rec.rank), std::to_string(rec.track_id),
                         csv::num(rec.frequency), std::to_string(rec.nulls), std::to_string(rec.near_field_maxima)});
      out.add("current_" + std::to_string(i) + "_" + rec.label + "_cm" + std::to_string(rec.rank) + ".csv",
              line_samples_to_csv(samples));
      r.records.push_back(std::move(rec));
    }
  }
  out.add("nulls.csv", table);
  return r;
}

struct PatternRecord {
  std::size_t index = 0;
  double lambda = 0.0;
  double ms = 0.0;
  double power_w = 0.0;
  double directivity = 0.0;
};

inline std::vector<PatternRecord> run_pattern(const StudyConfig& c, StudyOutput& out) {
  const int n = detail::single_section_count(c);
  detail::require(c.pattern.has_value(), "pattern: section required");
  const auto& p = *c.pattern;
  const auto& g = *c.geometry;
  const auto grid = SphereGrid::regular(p.theta_step_deg, p.phi_step_deg);
  const WireMesh mesh = study_mesh(g, n, p.curvature, p.frequency);
  out.command = "pattern";

  ModeSolverOptions opt;
  opt.clamp_to_retained = true;
  const auto sol = solve_modes(assemble_impedance(mesh, p.frequency), p.modes, opt);
  std::vector<PatternRecord> recs;
  std::string table = "mode,lambda,ms,power_w,directivity\n";
  for (std::size_t i = 0; i < sol.modes.size(); ++i) {
    const auto ff = far_field(mesh, sol.modes[i].current.cast<cplx>(), p.frequency, grid);
    PatternRecord rec{i + 1, sol.modes[i].lambda, sol.modes[i].ms, radiated_power(ff), directivity(ff)};
    table += csv::row({std::to_string(rec.index), csv::num(rec.lambda), csv::num(rec.ms), csv::num(rec.power_w),
                       csv::num(rec.directivity)});
    out.add("pattern_mode" + std::to_string(i + 1) + ".csv", pattern_to_csv(ff));
    recs.push_back(rec);
  }
  out.add("pattern_summary.csv", table);
  return recs;
}

// ---------------------------------------------------------------------------
// Array studies

namespace detail {

inline std::string resolve(const StudyConfig& c, const std::string& path) {
  const std::filesystem::path p(path);
  return p.is_absolute() ? path : (std::filesystem::path(c.base_dir) / p).string();
}

inline std::string angle_tag(double deg) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+06.1f", deg);
  return buf;
}

}  // namespace detail

struct ArrayInputs {
  std::vector<ArrayLayout> layouts;  // one per array curvature
  std::shared_ptr<const ElementPattern> element;
  std::optional<PortNetwork> network;
};

/// Loads and checks every array input (element pattern file, Touchstone data).
inline ArrayInputs prepare_array(const StudyConfig& c) {
  detail::require(c.array.has_value(), "array: section required");
  const auto& a = *c.array;
  ArrayInputs in;
  for (const auto& b : a.curvatures) in.layouts.push_back(place_on_cylinder(a.nx, a.ny, a.dx, a.dy, b, a.polarization));
  if (a.element == "isotropic") {
    in.element = std::make_shared<IsotropicElement>();
  } else if (a.element == "cosine") {
    in.element = std::make_shared<CosineElement>();
  } else {
    in.element = std::make_shared<GriddedElement>(
        pattern_from_csv(csv::read_file(detail::resolve(c, a.element_file)), a.frequency));
  }
  if (!a.touchstone.empty()) {
    PortNetwork net = load_touchstone(detail::resolve(c, a.touchstone));
    detail::require(net.port_count() == in.layouts.front().size(),
                    "array.touchstone: port count " + std::to_string(net.port_count()) + " differs from element count " +
                        std::to_string(in.layouts.front().size()));
    net.validate();
    (void)interpolate_s(net, a.frequency);
    in.network = std::move(net);
  }
  return in;
}

inline ExcitationSet array_excitation(const ArrayConfig& a, const ArrayLayout& layout, double theta0) {
  auto w = plane_projection_phases(layout, theta0, a.plane, a.frequency);
  zero_border(layout, w, a.passive_border);
  return w;
}

inline std::vector<std::vector<ScanReport>> run_array_scan(const StudyConfig& c, StudyOutput& out) {
  const ArrayInputs in = prepare_array(c);
  const auto& a = *c.array;
  out.command = "array-scan";
  std::vector<std::vector<ScanReport>> all;
  for (std::size_t li = 0; li < in.layouts.size(); ++li) {
    const auto& layout = in.layouts[li];
    const std::string stem = "array_" + std::to_string(li) + "_" + layout.geometry.label();
    const ArraySynthesizer syn(layout, in.element);
    auto reports = scan_sweep(syn, a.frequency, a.plane, a.scan_angles_deg, a.passive_border, a.cut_step_deg);
    for (auto& r : reports) {
      const auto w = array_excitation(a, layout, r.theta0_deg);
      const std::string tag = detail::angle_tag(r.theta0_deg);
      out.add(stem + "_cut_" + tag + ".csv", cut_to_csv(principal_cut(syn, w, a.frequency, a.plane, a.cut_step_deg)));
      out.add(stem + "_excitation_" + tag + ".csv", excitation_to_csv(w));
      if (in.network) {
        r.ports = active_port_report(*in.network, w, a.frequency);
        out.add(stem + "_vswr_" + tag + ".csv", port_reflections_to_csv(r.theta0_deg, r.ports));
      }
    }
    out.add(stem + "_layout.csv", layout_to_csv(layout));
    out.add(stem + "_scan.csv", scan_reports_to_csv(reports));
    all.push_back(std::move(reports));
  }
  return all;
}

inline std::vector<std::vector<PortReflection>> run_active_vswr(const StudyConfig& c, StudyOutput& out) {
  const ArrayInputs in = prepare_array(c);
  detail::require(in.network.has_value(), "array.touchstone: required for active VSWR");
  const auto& a = *c.array;
  out.command = "active-vswr";
  std::vector<std::vector<PortReflection>> all;
  const auto& layout = in.layouts.front();
  std::string summary = "theta0_deg,max_vswr,ports_over_3,saturated\n";
  for (double th : a.scan_angles_deg) {
    const auto w = array_excitation(a, layout, th);
    auto ports = active_port_report(*in.network, w, a.frequency);
    double worst = 1.0;
    int over = 0, sat = 0;
    for (const auto& p : ports) {
      worst = std::max(worst, p.vswr.value);
      over += p.vswr.value >= 3.0 ? 1 : 0;
      sat += p.vswr.saturated ? 1 : 0;
    }
    out.add("vswr_" + detail::angle_tag(th) + ".csv", port_reflections_to_csv(th, ports));
    summary += csv::row({csv::num(th), sat > 0 ? std::string("inf") : csv::num(worst), std::to_string(over),
                         std::to_string(sat)});
    all.push_back(std::move(ports));
  }
  out.add("vswr_summary.csv", summary);
  return all;
}

}  // namespace cmaw
