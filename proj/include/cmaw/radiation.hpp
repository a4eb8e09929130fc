#pragma once

// Fields radiated by basis-expanded wire currents: far-zone patterns, sphere
// power integration, and near fields sampled on a line offset from the wire.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cmaw/constants.hpp"
#include "cmaw/csv.hpp"
#include "cmaw/em_kernel.hpp"
#include "cmaw/error.hpp"
#include "cmaw/geometry.hpp"
#include "cmaw/quadrature.hpp"

namespace cmaw {

/// Direction samples, theta-major: index = it * phi.size() + ip. Angles in degrees.
struct SphereGrid {
  std::vector<double> theta_deg;
  std::vector<double> phi_deg;

  std::size_t size() const { return theta_deg.size() * phi_deg.size(); }

  /// theta in [0, 180] inclusive, phi in [0, 360) exclusive.
  static SphereGrid regular(double theta_step_deg, double phi_step_deg) {
    detail::require(theta_step_deg > 0.0 && phi_step_deg > 0.0, "grid steps must be positive");
    const auto nt = static_cast<std::size_t>(std::llround(180.0 / theta_step_deg));
    const auto np = static_cast<std::size_t>(std::llround(360.0 / phi_step_deg));
    detail::require(std::abs(nt * theta_step_deg - 180.0) < 1e-9 && std::abs(np * phi_step_deg - 360.0) < 1e-9,
                    "grid steps must divide 180 and 360 degrees");
    SphereGrid g;
    for (std::size_t i = 0; i <= nt; ++i) g.theta_deg.push_back(180.0 * static_cast<double>(i) / nt);
    for (std::size_t j = 0; j < np; ++j) g.phi_deg.push_back(360.0 * static_cast<double>(j) / np);
    return g;
  }

  static SphereGrid cut(std::vector<double> theta_deg, std::vector<double> phi_deg) {
    detail::require(!theta_deg.empty() && !phi_deg.empty(), "empty grid");
    return SphereGrid{std::move(theta_deg), std::move(phi_deg)};
  }

  /// Uniform theta from 0 to 180 and uniform phi from 0 spanning the full turn.
  bool is_full_sphere() const {
    if (theta_deg.size() < 3 || phi_deg.size() < 3) return false;
    const double dt = 180.0 / static_cast<double>(theta_deg.size() - 1);
    const double dp = 360.0 / static_cast<double>(phi_deg.size());
    for (std::size_t i = 0; i < theta_deg.size(); ++i)
      if (std::abs(theta_deg[i] - dt * static_cast<double>(i)) > 1e-9) return false;
    for (std::size_t j = 0; j < phi_deg.size(); ++j)
      if (std::abs(phi_deg[j] - dp * static_cast<double>(j)) > 1e-9) return false;
    return true;
  }

  bool operator==(const SphereGrid&) const = default;
};

/// Local spherical unit vectors at (theta, phi) in radians.
struct SphericalFrame {
  Point3 r;
  Point3 theta;
  Point3 phi;

  static SphericalFrame at(double th, double ph) {
    const double st = std::sin(th), ct = std::cos(th), sp = std::sin(ph), cp = std::cos(ph);
    return {Point3(st * cp, st * sp, ct), Point3(ct * cp, ct * sp, -st), Point3(-sp, cp, 0.0)};
  }
};

inline constexpr double deg2rad(double d) { return d * kPi / 180.0; }
inline constexpr double rad2deg(double r) { return r * 180.0 / kPi; }

/// Complex E_theta / E_phi at the 1 m reference distance, propagation phase
/// exp(-jkr) removed.
struct FarFieldPattern {
  SphereGrid grid;
  double frequency = 0.0;
  std::vector<cplx> e_theta;
  std::vector<cplx> e_phi;

  double intensity(std::size_t i) const { return std::norm(e_theta[i]) + std::norm(e_phi[i]); }

  FarFieldPattern& operator+=(const FarFieldPattern& o) {
    detail::require(grid == o.grid, "pattern grids differ");
    for (std::size_t i = 0; i < e_theta.size(); ++i) {
      e_theta[i] += o.e_theta[i];
      e_phi[i] += o.e_phi[i];
    }
    return *this;
  }
};

/// Node currents (zero at the free ends of an open wire) from basis coefficients.
inline Eigen::VectorXcd node_currents(const WireMesh& mesh, const Eigen::VectorXcd& coeffs) {
  const auto basis = node_basis_map(mesh);
  detail::require(coeffs.size() == basis_count(mesh), "current dimension does not match the basis");
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(mesh.nodes.size()));
  for (std::size_t i = 0; i < basis.size(); ++i)
    if (basis[i]) out(static_cast<Eigen::Index>(i)) = coeffs(*basis[i]);
  return out;
}

inline FarFieldPattern far_field(const WireMesh& mesh, const Eigen::VectorXcd& current, double frequency_hz,
                                 const SphereGrid& grid) {
  detail::require(grid.size() > 0, "empty direction grid");
  detail::require(frequency_hz > 0.0, "frequency must be positive");
  const Eigen::VectorXcd node_i = node_currents(mesh, current);
  const auto segs = detail::segment_data(mesh);
  const std::size_t nn = mesh.nodes.size();
  const double k = wavenumber(frequency_hz);
  const cplx pre(0.0, -2.0 * kPi * frequency_hz * kMu0 / (4.0 * kPi));
  const GaussRule rule = gauss_legendre(8);

  FarFieldPattern out;
  out.grid = grid;
  out.frequency = frequency_hz;
  out.e_theta.resize(grid.size());
  out.e_phi.resize(grid.size());
  for (std::size_t it = 0; it < grid.theta_deg.size(); ++it) {
    for (std::size_t ip = 0; ip < grid.phi_deg.size(); ++ip) {
      const auto fr = SphericalFrame::at(deg2rad(grid.theta_deg[it]), deg2rad(grid.phi_deg[ip]));
      Eigen::Vector3cd radiation_vector = Eigen::Vector3cd::Zero();
      for (std::size_t p = 0; p < segs.size(); ++p) {
        const cplx i0 = node_i(static_cast<Eigen::Index>(p));
        const cplx i1 = node_i(static_cast<Eigen::Index>((p + 1) % nn));
        if (i0 == 0.0 && i1 == 0.0) continue;
        cplx acc{0.0, 0.0};
        for (std::size_t q = 0; q < rule.size(); ++q) {
          const double t = rule.nodes[q];
          const Point3 rp = segs[p].start + (t * segs[p].length) * segs[p].dir;
          acc += rule.weights[q] * ((1.0 - t) * i0 + t * i1) * std::exp(cplx(0.0, k * fr.r.dot(rp)));
        }
        radiation_vector += (acc * segs[p].length) * segs[p].dir.cast<cplx>();
      }
      const std::size_t idx = it * grid.phi_deg.size() + ip;
      out.e_theta[idx] = pre * fr.theta.cast<cplx>().dot(radiation_vector);
      out.e_phi[idx] = pre * fr.phi.cast<cplx>().dot(radiation_vector);
    }
  }
  return out;
}

namespace detail {

// Trapezoidal sphere quadrature of f(i) * sin(theta) dtheta dphi.
template <typename F>
auto sphere_integral(const SphereGrid& grid, F&& f) {
  require(grid.is_full_sphere(), "power integration needs a full-sphere grid");
  const double dt = deg2rad(180.0 / static_cast<double>(grid.theta_deg.size() - 1));
  const double dp = deg2rad(360.0 / static_cast<double>(grid.phi_deg.size()));
  decltype(f(std::size_t{0})) acc{};
  for (std::size_t it = 0; it < grid.theta_deg.size(); ++it) {
    const double edge = (it == 0 || it + 1 == grid.theta_deg.size()) ? 0.5 : 1.0;
    const double w = edge * std::sin(deg2rad(grid.theta_deg[it])) * dt * dp;
    for (std::size_t ip = 0; ip < grid.phi_deg.size(); ++ip) acc += w * f(it * grid.phi_deg.size() + ip);
  }
  return acc;
}

}  // namespace detail

/// P = (1 / 2 eta0) * integral of |E|^2 over the unit sphere (peak phasors).
inline double radiated_power(const FarFieldPattern& p) {
  detail::require(p.grid.theta_deg.size() >= 37 && p.grid.phi_deg.size() >= 72,
                  "power integration needs at least 36x72 angular cells");
  return detail::sphere_integral(p.grid, [&](std::size_t i) { return p.intensity(i); }) / (2.0 * kEta0);
}

inline double directivity(const FarFieldPattern& p) {
  const double total = detail::sphere_integral(p.grid, [&](std::size_t i) { return p.intensity(i); });
  detail::require(total > 0.0, "pattern radiates no power");
  double peak = 0.0;
  for (std::size_t i = 0; i < p.grid.size(); ++i) peak = std::max(peak, p.intensity(i));
  return 4.0 * kPi * peak / total;
}

/// Sphere integral of E_a . conj(E_b); used for far-field orthogonality.
inline cplx pattern_inner_product(const FarFieldPattern& a, const FarFieldPattern& b) {
  detail::require(a.grid == b.grid, "pattern grids differ");
  return detail::sphere_integral(a.grid, [&](std::size_t i) {
    return a.e_theta[i] * std::conj(b.e_theta[i]) + a.e_phi[i] * std::conj(b.e_phi[i]);
  });
}

// ---------------------------------------------------------------------------
// Line samples

struct LineFieldSamples {
  std::vector<double> s;          // arc-length position, m
  std::vector<double> magnitude;  // |I| in A or |E| in V/m
};

/// |I(s)| of the piecewise-linear current, `per_segment` samples per segment
/// plus the final node.
inline LineFieldSamples current_samples(const WireMesh& mesh, const Eigen::VectorXcd& current,
                                        std::size_t per_segment = 8) {
  detail::require(per_segment >= 1, "need at least one sample per segment");
  const Eigen::VectorXcd node_i = node_currents(mesh, current);
  const std::size_t nn = mesh.nodes.size();
  const std::size_t ns = mesh.segment_count();
  const double total = mesh.closed ? mesh.arc.back() + mesh.segment_length(ns - 1) : mesh.arc.back();
  LineFieldSamples out;
  for (std::size_t p = 0; p < ns; ++p) {
    const double s0 = mesh.arc[p];
    const double s1 = (p + 1 < nn) ? mesh.arc[p + 1] : total;
    for (std::size_t k = 0; k < per_segment; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(per_segment);
      out.s.push_back(s0 + t * (s1 - s0));
      out.magnitude.push_back(std::abs((1.0 - t) * node_i(static_cast<Eigen::Index>(p)) +
                                       t * node_i(static_cast<Eigen::Index>((p + 1) % nn))));
    }
  }
  out.s.push_back(total);
  out.magnitude.push_back(std::abs(node_i(static_cast<Eigen::Index>(mesh.closed ? 0 : nn - 1))));
  return out;
}

enum class Extremum { Minimum, Maximum };

/// Indices (run centres) of strict interior local extrema. Flat runs count once;
/// runs touching either end are ignored. Minima must lie below and maxima
/// above rel_threshold * max(values). With min_prominence > 0 an extremum must
/// also stand out from the deeper of its two flanking bases (topographic
/// prominence) by min_prominence * max(values), which rejects discretization
/// ripple on broad crests.
inline std::vector<std::size_t> interior_extrema(const std::vector<double>& v, Extremum kind, double rel_threshold,
                                                 double min_prominence = 0.0) {
  std::vector<std::size_t> out;
  if (v.size() < 3) return out;
  const double vmax = *std::max_element(v.begin(), v.end());
  const double tol = 1e-12 * vmax;
  const double level = rel_threshold * vmax;
  const double sign = kind == Extremum::Maximum ? 1.0 : -1.0;
  auto prominence = [&](std::size_t i) {
    const double peak = sign * v[i];
    double left = peak;
    for (std::size_t k = i; k-- > 0;) {
      if (sign * v[k] > peak + tol) break;
      left = std::min(left, sign * v[k]);
    }
    double right = peak;
    // Ties stop the rightward walk so equal twin crests count once.
    for (std::size_t k = i + 1; k < v.size(); ++k) {
      if (sign * v[k] >= peak - tol) break;
      right = std::min(right, sign * v[k]);
    }
    return peak - std::max(left, right);
  };
  std::size_t i = 1;
  while (i + 1 < v.size()) {
    std::size_t j = i;
    while (j + 1 < v.size() && std::abs(v[j + 1] - v[i]) <= tol) ++j;
    if (j + 1 >= v.size()) break;
    const double left = v[i - 1];
    const double right = v[j + 1];
    const double here = v[i];
    const bool is_min = left > here + tol && right > here + tol && here < level;
    const bool is_max = left < here - tol && right < here - tol && here > level;
    if ((kind == Extremum::Minimum && is_min) || (kind == Extremum::Maximum && is_max)) {
      const std::size_t c = (i + j) / 2;
      if (min_prominence <= 0.0 || prominence(c) >= min_prominence * vmax) out.push_back(c);
    }
    i = j + 1;
  }
  return out;
}

inline int count_current_nulls(const LineFieldSamples& samples, double rel_threshold = 0.1) {
  detail::require(samples.magnitude.size() >= 50, "null counting needs at least 50 samples");
  detail::require(rel_threshold > 0.0 && rel_threshold < 0.5, "rel_threshold must lie in (0, 0.5)");
  const double vmax = *std::max_element(samples.magnitude.begin(), samples.magnitude.end());
  detail::require(vmax > 0.0, "current is identically zero");
  return static_cast<int>(interior_extrema(samples.magnitude, Extremum::Minimum, rel_threshold).size());
}

/// Full (non-far-zone) electric field of the wire current at point r,
/// E = -jw mu A - grad(phi) with line charge -(1/jw) dI/ds.
inline Eigen::Vector3cd electric_field(const std::vector<detail::SegmentData>& segs, const Eigen::VectorXcd& node_i,
                                       double frequency_hz, const Point3& r, const GaussRule& rule) {
  const auto nn = static_cast<std::size_t>(node_i.size());
  const double omega = 2.0 * kPi * frequency_hz;
  const double k = wavenumber(frequency_hz);
  const cplx vec_coef(0.0, -omega * kMu0);
  const cplx sca_coef = 1.0 / cplx(0.0, omega * kEps0);
  Eigen::Vector3cd e = Eigen::Vector3cd::Zero();
  for (std::size_t p = 0; p < segs.size(); ++p) {
    const cplx i0 = node_i(static_cast<Eigen::Index>(p));
    const cplx i1 = node_i(static_cast<Eigen::Index>((p + 1) % nn));
    const cplx dids = (i1 - i0) / segs[p].length;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double t = rule.nodes[q];
      const Point3 rp = segs[p].start + (t * segs[p].length) * segs[p].dir;
      const Point3 d = r - rp;
      const double R = d.norm();
      const cplx g = std::exp(cplx(0.0, -k * R)) / (4.0 * kPi * R);
      const cplx dg = -g * cplx(1.0, k * R) / (R * R);  // grad G = dg * d
      const double w = rule.weights[q] * segs[p].length;
      const cplx cur = (1.0 - t) * i0 + t * i1;
      e += (w * vec_coef * cur * g) * segs[p].dir.cast<cplx>();
      e += (w * sca_coef * dids * dg) * d.cast<cplx>();
    }
  }
  return e;
}

/// |E| on the line running parallel to the wire at `offset` along its in-plane
/// normal, sampled at `per_segment` points per segment.
inline LineFieldSamples near_field_line(const WireMesh& mesh, const Eigen::VectorXcd& current, double frequency_hz,
                                        double offset, std::size_t per_segment = 4) {
  detail::require(offset > mesh.wire_radius, "near-field offset lies inside the wire");
  detail::require(frequency_hz > 0.0, "frequency must be positive");
  const Eigen::VectorXcd node_i = node_currents(mesh, current);
  const GaussRule rule = gauss_legendre(16);
  const auto segs = detail::segment_data(mesh);
  const std::size_t ns = mesh.segment_count();
  // Node normals average the adjacent segment normals so the offset line has
  // no jumps at the kinks of a bent mesh.
  const std::size_t nn = mesh.nodes.size();
  std::vector<Point3> normals(nn, Point3::Zero());
  for (std::size_t p = 0; p < ns; ++p) {
    const Point3 n = in_plane_normal(mesh, p);
    normals[p] += n;
    normals[(p + 1) % nn] += n;
  }
  for (auto& n : normals) n.normalize();
  LineFieldSamples out;
  for (std::size_t p = 0; p < ns; ++p) {
    const double s0 = mesh.arc[p];
    const double s1 = (p + 1 < mesh.arc.size()) ? mesh.arc[p + 1] : s0 + mesh.segment_length(p);
    const std::size_t count = (p + 1 == ns && !mesh.closed) ? per_segment + 1 : per_segment;
    for (std::size_t k = 0; k < count; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(per_segment);
      const Point3 on_wire = mesh.segment_start(p) + t * (mesh.segment_end(p) - mesh.segment_start(p));
      const Point3 n = ((1.0 - t) * normals[p] + t * normals[(p + 1) % nn]).normalized();
      out.s.push_back(s0 + t * (s1 - s0));
      out.magnitude.push_back(electric_field(segs, node_i, frequency_hz, on_wire + offset * n, rule).norm());
    }
  }
  return out;
}

/// Interior maxima of |E| on the offset line. On an open wire the charge
/// piled up at each free end produces one maximum next to that end; those are
/// the counterpart of the end current zeros and are excluded, so the count
/// matches count_current_nulls for standing-wave currents. Maxima must have a
/// prominence of at least 5% of the line maximum.
inline int near_field_maxima(const WireMesh& mesh, const Eigen::VectorXcd& current, double frequency_hz,
                             double offset = 2e-3, double rel_threshold = 0.1) {
  detail::require(offset > mesh.wire_radius, "near-field offset lies inside the wire");
  if (current.cwiseAbs().maxCoeff() == 0.0) return 0;
  const auto line = near_field_line(mesh, current, frequency_hz, offset);
  auto peaks = interior_extrema(line.magnitude, Extremum::Maximum, rel_threshold, 0.05);
  if (!mesh.closed) {
    const double end_zone = 3.0 * offset;
    const double s_end = line.s.back();
    std::erase_if(peaks, [&](std::size_t i) { return line.s[i] < end_zone || line.s[i] > s_end - end_zone; });
  }
  return static_cast<int>(peaks.size());
}

// ---------------------------------------------------------------------------
// CSV

inline std::string pattern_to_csv(const FarFieldPattern& p) {
  std::string out = "theta_deg,phi_deg,re_etheta,im_etheta,re_ephi,im_ephi\n";
  for (std::size_t it = 0; it < p.grid.theta_deg.size(); ++it) {
    for (std::size_t ip = 0; ip < p.grid.phi_deg.size(); ++ip) {
      const std::size_t i = it * p.grid.phi_deg.size() + ip;
      out += csv::row({csv::num(p.grid.theta_deg[it]), csv::num(p.grid.phi_deg[ip]), csv::num(p.e_theta[i].real()),
                       csv::num(p.e_theta[i].imag()), csv::num(p.e_phi[i].real()), csv::num(p.e_phi[i].imag())});
    }
  }
  return out;
}

/// Parses a pattern CSV whose rows form a theta-major rectangular grid.
inline FarFieldPattern pattern_from_csv(const std::string& text, double frequency_hz) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  std::vector<std::array<double, 6>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line.rfind("theta_deg,phi_deg", 0) != 0) throw IoError("pattern csv: missing header");
      header = true;
      continue;
    }
    const auto f = csv::split(line);
    const std::string ctx = "pattern csv line " + std::to_string(line_no);
    if (f.size() != 6) throw IoError(ctx + ": expected 6 fields");
    std::array<double, 6> r{};
    for (std::size_t i = 0; i < 6; ++i) r[i] = csv::parse_double(f[i], ctx);
    rows.push_back(r);
  }
  if (rows.empty()) throw IoError("pattern csv: no data rows");
  FarFieldPattern p;
  p.frequency = frequency_hz;
  for (const auto& r : rows) {
    if (r[0] != rows.front()[0]) break;
    p.grid.phi_deg.push_back(r[1]);
  }
  const std::size_t np = p.grid.phi_deg.size();
  if (rows.size() % np != 0) throw IoError("pattern csv: rows do not form a rectangular theta-major grid");
  for (std::size_t it = 0; it < rows.size() / np; ++it) {
    p.grid.theta_deg.push_back(rows[it * np][0]);
    for (std::size_t ip = 0; ip < np; ++ip) {
      const auto& r = rows[it * np + ip];
      if (r[0] != p.grid.theta_deg.back() || r[1] != p.grid.phi_deg[ip])
        throw IoError("pattern csv: rows do not form a rectangular theta-major grid");
      p.e_theta.emplace_back(r[2], r[3]);
      p.e_phi.emplace_back(r[4], r[5]);
    }
  }
  return p;
}

inline std::string line_samples_to_csv(const LineFieldSamples& l) {
  std::string out = "s_m,magnitude\n";
  for (std::size_t i = 0; i < l.s.size(); ++i) out += csv::row({csv::num(l.s[i]), csv::num(l.magnitude[i])});
  return out;
}

}  // namespace cmaw
