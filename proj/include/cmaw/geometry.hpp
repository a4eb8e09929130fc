#pragma once

// Thin-wire models of continuous strip chains and their cylindrical bending.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "cmaw/constants.hpp"
#include "cmaw/csv.hpp"
#include "cmaw/error.hpp"

namespace cmaw {

using Point3 = Eigen::Vector3d;

/// Segmented wire: consecutive nodes form segments. `arc` holds the arc-length
/// coordinate of each node along the unbent strip and survives bending, so
/// node i of a bent mesh is identified with node i of its planar parent.
struct WireMesh {
  std::vector<Point3> nodes;
  std::vector<double> arc;
  double wire_radius = 0.0;
  int section_count = 1;
  double section_length = 0.0;
  bool closed = false;

  std::size_t segment_count() const {
    if (nodes.size() < 2) return 0;
    return closed ? nodes.size() : nodes.size() - 1;
  }
  const Point3& segment_start(std::size_t s) const { return nodes[s]; }
  const Point3& segment_end(std::size_t s) const { return nodes[(s + 1) % nodes.size()]; }
  double segment_length(std::size_t s) const { return (segment_end(s) - segment_start(s)).norm(); }

  double total_arc_length() const { return static_cast<double>(section_count) * section_length; }

  double max_segment_length() const {
    double m = 0.0;
    for (std::size_t s = 0; s < segment_count(); ++s) m = std::max(m, segment_length(s));
    return m;
  }
  double mean_segment_length() const {
    double sum = 0.0;
    for (std::size_t s = 0; s < segment_count(); ++s) sum += segment_length(s);
    return sum / static_cast<double>(segment_count());
  }
};

/// Curvature radius of the cylinder a strip is wrapped onto; empty = planar.
/// The cylinder axis is parallel to z and the strip wraps in the xy-plane.
class BendSpec {
 public:
  static BendSpec planar() { return BendSpec{}; }
  static BendSpec radius(double rc_m) {
    detail::require(std::isfinite(rc_m) && rc_m > 0.0, "curvature radius must be positive and finite");
    BendSpec b;
    b.radius_ = rc_m;
    return b;
  }

  bool is_planar() const { return !radius_.has_value(); }
  double radius_m() const { return radius_.value(); }

  std::string label() const {
    if (is_planar()) return "planar";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6gmm", *radius_ * 1e3);
    return buf;
  }

  friend bool operator==(const BendSpec&, const BendSpec&) = default;

 private:
  std::optional<double> radius_;
};

/// Segment-length rule: every segment at most lambda/20 at `frequency_hz`.
inline bool satisfies_density(const WireMesh& mesh, double frequency_hz) {
  const double limit = wavelength(frequency_hz) / 20.0;
  return mesh.max_segment_length() <= limit * (1.0 + 1e-9);
}

inline void check_density(const WireMesh& mesh, double frequency_hz) {
  if (!satisfies_density(mesh, frequency_hz)) {
    throw ValidationError("mesh too coarse at " + std::to_string(frequency_hz) + " Hz: segment " +
                          std::to_string(mesh.max_segment_length()) + " m exceeds lambda/20 = " +
                          std::to_string(wavelength(frequency_hz) / 20.0) + " m");
  }
}

/// Straight chain of `n_sections` strips along x, centred on the origin.
/// The flat strip of width w is modelled as a wire of radius w/4.
inline WireMesh build_strip_chain(int n_sections, double section_length, double strip_width,
                                  int segments_per_section,
                                  std::optional<double> max_frequency_hz = std::nullopt) {
  detail::require(n_sections >= 1, "n_sections must be >= 1");
  detail::require(section_length > 0.0 && std::isfinite(section_length), "section_length must be positive");
  detail::require(strip_width > 0.0 && std::isfinite(strip_width), "strip_width must be positive");
  detail::require(segments_per_section >= 4, "segments_per_section must be >= 4");

  WireMesh mesh;
  mesh.section_count = n_sections;
  mesh.section_length = section_length;
  mesh.wire_radius = strip_width / 4.0;

  const int n_seg = n_sections * segments_per_section;
  const double total = n_sections * section_length;
  const double step = total / n_seg;
  mesh.nodes.reserve(static_cast<std::size_t>(n_seg) + 1);
  mesh.arc.reserve(static_cast<std::size_t>(n_seg) + 1);
  for (int i = 0; i <= n_seg; ++i) {
    const double s = (i == n_seg) ? total : i * step;
    mesh.arc.push_back(s);
    mesh.nodes.emplace_back(s - 0.5 * total, 0.0, 0.0);
  }
  if (max_frequency_hz) check_density(mesh, *max_frequency_hz);
  return mesh;
}

/// Wraps a straight x-directed chain onto a cylinder of radius Rc whose axis
/// is parallel to z and passes through (0, -Rc). Node x maps to the angle
/// x/Rc, so arc length is preserved exactly and the origin stays fixed.
inline WireMesh bend_to_cylinder(const WireMesh& mesh, const BendSpec& bend) {
  if (bend.is_planar()) return mesh;
  for (const auto& p : mesh.nodes) {
    detail::require(std::abs(p.y()) <= 1e-12, "bend_to_cylinder expects a straight chain along x");
  }
  const double rc = bend.radius_m();
  const double total = mesh.arc.empty() ? 0.0 : mesh.arc.back() - mesh.arc.front();
  const double seg = mesh.max_segment_length();
  if (total > 2.0 * kPi * rc + seg) {
    throw ValidationError("curvature radius " + std::to_string(rc) + " m over-wraps a strip of length " +
                          std::to_string(total) + " m");
  }
  WireMesh out = mesh;
  for (auto& p : out.nodes) {
    const double angle = p.x() / rc;
    p = Point3(rc * std::sin(angle), rc * std::cos(angle) - rc, p.z());
  }
  return out;
}

/// Inverse of bend_to_cylinder: recovers each node's straight coordinate from
/// its angle about the cylinder axis (unwrapped along the chain).
inline WireMesh unroll_from_cylinder(const WireMesh& mesh, const BendSpec& bend) {
  if (bend.is_planar()) return mesh;
  const double rc = bend.radius_m();
  WireMesh out = mesh;
  double prev = 0.0;
  for (std::size_t i = 0; i < out.nodes.size(); ++i) {
    auto& p = out.nodes[i];
    double angle = std::atan2(p.x(), p.y() + rc);
    if (i > 0) {
      while (angle - prev > kPi) angle -= 2.0 * kPi;
      while (angle - prev < -kPi) angle += 2.0 * kPi;
    }
    prev = angle;
    p = Point3(rc * angle, 0.0, p.z());
  }
  return out;
}

inline bool is_loop(const WireMesh& mesh, double tol) {
  detail::require(tol > 0.0, "loop tolerance must be positive");
  if (mesh.closed) return true;
  if (mesh.nodes.size() < 2) return false;
  return (mesh.nodes.front() - mesh.nodes.back()).norm() <= tol;
}

/// Unit vector in the plane of the wire and normal to it at segment s
/// (z x t, falling back to x x t for z-directed segments).
inline Point3 in_plane_normal(const WireMesh& mesh, std::size_t s) {
  const Point3 t = (mesh.segment_end(s) - mesh.segment_start(s)).normalized();
  Point3 n = Point3::UnitZ().cross(t);
  if (n.norm() < 1e-9) n = Point3::UnitX().cross(t);
  return n.normalized();
}

// Node CSV: `index,x,y,z` in meters with a header row.
inline std::string mesh_to_csv(const WireMesh& mesh) {
  std::string out = "index,x,y,z\n";
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    const auto& p = mesh.nodes[i];
    out += csv::row({std::to_string(i), csv::num(p.x()), csv::num(p.y()), csv::num(p.z())});
  }
  return out;
}

/// Reads a node CSV written by mesh_to_csv. Arc coordinates are rebuilt from
/// chord lengths; the caller supplies the wire radius and section count.
inline WireMesh mesh_from_csv(const std::string& text, double wire_radius, int section_count) {
  detail::require(wire_radius > 0.0, "wire_radius must be positive");
  detail::require(section_count >= 1, "section_count must be >= 1");
  WireMesh mesh;
  mesh.wire_radius = wire_radius;
  mesh.section_count = section_count;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line.rfind("index,x,y,z", 0) != 0) throw IoError("mesh csv: missing header 'index,x,y,z'");
      header = true;
      continue;
    }
    const auto f = csv::split(line);
    const std::string ctx = "mesh csv line " + std::to_string(line_no);
    if (f.size() != 4) throw IoError(ctx + ": expected 4 fields");
    const auto idx = static_cast<std::size_t>(csv::parse_double(f[0], ctx));
    if (idx != mesh.nodes.size()) throw IoError(ctx + ": node indices must be consecutive from 0");
    mesh.nodes.emplace_back(csv::parse_double(f[1], ctx), csv::parse_double(f[2], ctx),
                            csv::parse_double(f[3], ctx));
  }
  if (!header) throw IoError("mesh csv: missing header 'index,x,y,z'");
  if (mesh.nodes.size() < 2) throw IoError("mesh csv: need at least two nodes");
  mesh.arc.push_back(0.0);
  for (std::size_t i = 1; i < mesh.nodes.size(); ++i) {
    const double d = (mesh.nodes[i] - mesh.nodes[i - 1]).norm();
    if (d <= 0.0) throw ValidationError("mesh csv: degenerate segment at node " + std::to_string(i));
    mesh.arc.push_back(mesh.arc.back() + d);
  }
  mesh.section_length = mesh.arc.back() / section_count;
  return mesh;
}

}  // namespace cmaw
