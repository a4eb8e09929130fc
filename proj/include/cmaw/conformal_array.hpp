#pragma once

// Planar and cylindrical arrays: element placement, plane-projection phasing,
// active-element-pattern synthesis, scan sweeps and active reflection.
//
// Frame: broadside is +z. A cylindrical aperture wraps around an axis parallel
// to y through (0, 0, -Rc), so columns (x) follow the circumference and rows
// (y) run along the axis. The E-plane cut is phi = 0 (xz), the H-plane cut is
// phi = 90 deg (yz).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "cmaw/constants.hpp"
#include "cmaw/csv.hpp"
#include "cmaw/error.hpp"
#include "cmaw/geometry.hpp"
#include "cmaw/parallel.hpp"
#include "cmaw/radiation.hpp"
#include "cmaw/touchstone.hpp"

namespace cmaw {

enum class Polarization { X, Y };
enum class ScanPlane { E, H };

inline const char* to_string(Polarization p) { return p == Polarization::X ? "X" : "Y"; }
inline const char* to_string(ScanPlane p) { return p == ScanPlane::E ? "E" : "H"; }

struct ArrayElement {
  Point3 position;
  Point3 boresight;
  Polarization polarization = Polarization::X;
};

struct ArrayLayout {
  std::vector<ArrayElement> elements;
  BendSpec geometry;  // planar or cylinder radius
  int nx = 0;
  int ny = 0;
  double dx = 0.0;
  double dy = 0.0;

  std::size_t size() const { return elements.size(); }
  std::size_t index(int column, int row) const { return static_cast<std::size_t>(row * nx + column); }
};

/// nx columns along the circumference (arc spacing dx), ny rows along the axis
/// (spacing dy), centered on the origin. Planar bend gives a rectangular grid.
inline ArrayLayout place_on_cylinder(int nx, int ny, double dx, double dy, const BendSpec& bend,
                                     Polarization pol = Polarization::X) {
  detail::require(nx >= 1 && ny >= 1, "array needs at least one element");
  detail::require(std::isfinite(dx) && dx > 0.0 && std::isfinite(dy) && dy > 0.0, "element spacings must be positive");
  if (!bend.is_planar()) {
    detail::require(nx * dx <= 2.0 * kPi * bend.radius_m(), "array arc nx*dx exceeds the cylinder circumference");
  }
  ArrayLayout layout;
  layout.geometry = bend;
  layout.nx = nx;
  layout.ny = ny;
  layout.dx = dx;
  layout.dy = dy;
  layout.elements.reserve(static_cast<std::size_t>(nx * ny));
  for (int j = 0; j < ny; ++j) {
    const double y = (j - 0.5 * (ny - 1)) * dy;
    for (int i = 0; i < nx; ++i) {
      const double u = (i - 0.5 * (nx - 1)) * dx;
      ArrayElement e;
      e.polarization = pol;
      if (bend.is_planar()) {
        e.position = Point3(u, y, 0.0);
        e.boresight = Point3::UnitZ();
      } else {
        const double rc = bend.radius_m();
        const double a = u / rc;
        const double s = std::sin(0.5 * a);
        e.position = Point3(rc * std::sin(a), y, -2.0 * rc * s * s);
        e.boresight = Point3(std::sin(a), 0.0, std::cos(a));
      }
      layout.elements.push_back(e);
    }
  }
  return layout;
}

struct ExcitationSet {
  std::vector<cplx> weights;
  std::size_t size() const { return weights.size(); }
};

inline ExcitationSet uniform_excitation(const ArrayLayout& layout) {
  return ExcitationSet{std::vector<cplx>(layout.size(), cplx(1.0, 0.0))};
}

/// Zeroes the outer `ring` rows and columns, leaving them as passive elements.
inline void zero_border(const ArrayLayout& layout, ExcitationSet& w, int ring) {
  detail::require(w.size() == layout.size(), "excitation size differs from element count");
  detail::require(ring >= 0, "border width must be non-negative");
  for (int j = 0; j < layout.ny; ++j)
    for (int i = 0; i < layout.nx; ++i)
      if (i < ring || j < ring || i >= layout.nx - ring || j >= layout.ny - ring) w.weights[layout.index(i, j)] = 0.0;
}

/// Unit vector of a scan angle in the chosen principal plane (signed theta).
inline Point3 scan_direction(double theta0_deg, ScanPlane plane) {
  const double t = deg2rad(theta0_deg);
  return plane == ScanPlane::E ? Point3(std::sin(t), 0.0, std::cos(t)) : Point3(0.0, std::sin(t), std::cos(t));
}

/// Unit amplitudes with phase -k r_i . u(theta0): projects every element onto
/// the plane normal to the scan direction and applies the progressive phase.
inline ExcitationSet plane_projection_phases(const ArrayLayout& layout, double theta0_deg, ScanPlane plane,
                                             double frequency_hz) {
  detail::require(std::isfinite(theta0_deg) && std::abs(theta0_deg) < 90.0, "scan angle must lie in (-90, 90) deg");
  detail::require(std::isfinite(frequency_hz) && frequency_hz > 0.0, "frequency must be positive");
  const double k = wavenumber(frequency_hz);
  const Point3 u = scan_direction(theta0_deg, plane);
  ExcitationSet w;
  w.weights.reserve(layout.size());
  for (const auto& e : layout.elements) w.weights.push_back(std::polar(1.0, -k * e.position.dot(u)));
  return w;
}

// Element patterns

/// Embedded element pattern in its own frame (boresight +z). Returns the
/// Cartesian far-field vector for a local unit direction.
class ElementPattern {
 public:
  virtual ~ElementPattern() = default;
  virtual Eigen::Vector3cd field(const Point3& dir_local, Polarization pol) const = 0;
};

namespace detail {

inline std::pair<double, double> direction_angles(const Point3& d) {
  const double th = std::acos(std::clamp(d.z(), -1.0, 1.0));
  double ph = std::atan2(d.y(), d.x());
  if (ph < 0.0) ph += 2.0 * kPi;
  return {th, ph};
}

// Ludwig-3 co-polar unit vector for an x- or y-directed source.
inline Point3 ludwig3(const Point3& dir, Polarization pol) {
  const auto [th, ph] = direction_angles(dir);
  const auto fr = SphericalFrame::at(th, ph);
  const double c = std::cos(ph), s = std::sin(ph);
  return pol == Polarization::X ? Point3(c * fr.theta - s * fr.phi) : Point3(s * fr.theta + c * fr.phi);
}

}  // namespace detail

/// Unit amplitude in every direction with Ludwig-3 polarization.
class IsotropicElement final : public ElementPattern {
 public:
  Eigen::Vector3cd field(const Point3& d, Polarization pol) const override {
    return detail::ludwig3(d, pol).cast<cplx>();
  }
};

/// Power pattern cos(theta) over the front hemisphere, zero behind.
class CosineElement final : public ElementPattern {
 public:
  Eigen::Vector3cd field(const Point3& d, Polarization pol) const override {
    const double c = d.z();
    if (c <= 0.0) return Eigen::Vector3cd::Zero();
    return (std::sqrt(c) * detail::ludwig3(d, pol)).cast<cplx>();
  }
};

/// Tabulated pattern, bilinear in (theta, phi) on the pattern grid. The phi axis
/// wraps when it spans a full turn. Polarization tags are ignored.
class GriddedElement final : public ElementPattern {
 public:
  explicit GriddedElement(FarFieldPattern p) : p_(std::move(p)) {
    const auto& g = p_.grid;
    detail::require(g.theta_deg.size() >= 2 && g.phi_deg.size() >= 1, "tabulated pattern grid is too small");
    detail::require(p_.e_theta.size() == g.size() && p_.e_phi.size() == g.size(), "pattern size differs from grid");
    for (std::size_t i = 1; i < g.theta_deg.size(); ++i)
      detail::require(g.theta_deg[i] > g.theta_deg[i - 1], "pattern theta must increase");
    for (std::size_t i = 1; i < g.phi_deg.size(); ++i)
      detail::require(g.phi_deg[i] > g.phi_deg[i - 1], "pattern phi must increase");
    if (g.phi_deg.size() >= 2) {
      const double step = g.phi_deg[1] - g.phi_deg[0];
      wraps_ = std::abs(g.phi_deg.back() + step - g.phi_deg.front() - 360.0) < 1e-9;
    }
  }

  const FarFieldPattern& pattern() const { return p_; }

  Eigen::Vector3cd field(const Point3& d, Polarization) const override {
    const auto [th, ph] = detail::direction_angles(d);
    const auto& g = p_.grid;
    const double t = rad2deg(th);
    double p = rad2deg(ph);

    if (t < g.theta_deg.front() - 1e-9 || t > g.theta_deg.back() + 1e-9) return Eigen::Vector3cd::Zero();
    const auto [i0, i1, ft] = bracket(g.theta_deg, t);

    std::size_t j0 = 0, j1 = 0;
    double fp = 0.0;
    const std::size_t np = g.phi_deg.size();
    if (np >= 2) {
      if (wraps_) {
        while (p < g.phi_deg.front()) p += 360.0;
        while (p >= g.phi_deg.front() + 360.0) p -= 360.0;
        if (p >= g.phi_deg.back()) {
          j0 = np - 1;
          j1 = 0;
          fp = (p - g.phi_deg.back()) / (g.phi_deg.front() + 360.0 - g.phi_deg.back());
        } else {
          std::tie(j0, j1, fp) = bracket(g.phi_deg, p);
        }
      } else {
        if (p < g.phi_deg.front() - 1e-9 || p > g.phi_deg.back() + 1e-9) return Eigen::Vector3cd::Zero();
        std::tie(j0, j1, fp) = bracket(g.phi_deg, p);
      }
    }
    auto at = [&](const std::vector<cplx>& v, std::size_t i, std::size_t j) { return v[i * np + j]; };
    auto lerp2 = [&](const std::vector<cplx>& v) {
      return (1.0 - ft) * ((1.0 - fp) * at(v, i0, j0) + fp * at(v, i0, j1)) +
             ft * ((1.0 - fp) * at(v, i1, j0) + fp * at(v, i1, j1));
    };
    const auto fr = SphericalFrame::at(th, ph);
    return lerp2(p_.e_theta) * fr.theta.cast<cplx>() + lerp2(p_.e_phi) * fr.phi.cast<cplx>();
  }

 private:
  static std::tuple<std::size_t, std::size_t, double> bracket(const std::vector<double>& axis, double v) {
    if (axis.size() == 1) return {0, 0, 0.0};
    auto it = std::upper_bound(axis.begin(), axis.end(), v);
    std::size_t hi = static_cast<std::size_t>(it - axis.begin());
    hi = std::clamp<std::size_t>(hi, 1, axis.size() - 1);
    const std::size_t lo = hi - 1;
    const double f = std::clamp((v - axis[lo]) / (axis[hi] - axis[lo]), 0.0, 1.0);
    return {lo, hi, f};
  }

  FarFieldPattern p_;
  bool wraps_ = false;
};

/// Rotation taking +z onto the unit vector b along the shortest arc.
inline Eigen::Matrix3d boresight_rotation(const Point3& b) {
  const Point3 z = Point3::UnitZ();
  const Point3 n = b.normalized();
  if (n.dot(z) < -1.0 + 1e-15) return Eigen::AngleAxisd(kPi, Point3::UnitX()).toRotationMatrix();
  return Eigen::Quaterniond::FromTwoVectors(z, n).toRotationMatrix();
}

/// Element field sources for synthesis: one shared pattern rotated per element,
/// or one tabulated pattern per element already expressed in the global frame.
class ArraySynthesizer {
 public:
  ArraySynthesizer(const ArrayLayout& layout, std::shared_ptr<const ElementPattern> shared)
      : layout_(layout), shared_(std::move(shared)) {
    detail::require(shared_ != nullptr, "missing element pattern");
    rot_.reserve(layout.size());
    for (const auto& e : layout.elements) rot_.push_back(boresight_rotation(e.boresight));
  }

  ArraySynthesizer(const ArrayLayout& layout, std::vector<FarFieldPattern> per_element) : layout_(layout) {
    detail::require(per_element.size() == layout.size(), "need one pattern per element");
    for (const auto& p : per_element)
      detail::require(p.grid == per_element.front().grid, "element pattern grids differ");
    grid_ = per_element.front().grid;
    for (auto& p : per_element) per_element_.emplace_back(std::move(p));
  }

  const ArrayLayout& layout() const { return layout_; }
  std::optional<SphereGrid> native_grid() const { return grid_; }

  /// Global field vector of element i toward the global unit direction r.
  Eigen::Vector3cd element_field(std::size_t i, const Point3& r) const {
    if (shared_) {
      const Point3 local = rot_[i].transpose() * r;
      return rot_[i].cast<cplx>() * shared_->field(local, layout_.elements[i].polarization);
    }
    return per_element_[i].field(r, layout_.elements[i].polarization);
  }

  /// Total field sum_i w_i E_i(r) exp(+jk r_i . r).
  Eigen::Vector3cd total_field(const ExcitationSet& w, double frequency_hz, const Point3& r) const {
    const double k = wavenumber(frequency_hz);
    Eigen::Vector3cd acc = Eigen::Vector3cd::Zero();
    for (std::size_t i = 0; i < layout_.size(); ++i) {
      if (w.weights[i] == 0.0) continue;
      acc += (w.weights[i] * std::exp(cplx(0.0, k * layout_.elements[i].position.dot(r)))) * element_field(i, r);
    }
    return acc;
  }

  double intensity(const ExcitationSet& w, double frequency_hz, const Point3& r) const {
    return total_field(w, frequency_hz, r).squaredNorm();
  }

 private:
  ArrayLayout layout_;
  std::shared_ptr<const ElementPattern> shared_;
  std::vector<Eigen::Matrix3d> rot_;
  std::vector<GriddedElement> per_element_;
  std::optional<SphereGrid> grid_;
};

inline FarFieldPattern synthesize_pattern(const ArraySynthesizer& syn, const ExcitationSet& w, const SphereGrid& grid,
                                          double frequency_hz) {
  detail::require(w.size() == syn.layout().size(), "weight count differs from element count");
  detail::require(std::isfinite(frequency_hz) && frequency_hz > 0.0, "frequency must be positive");
  if (const auto native = syn.native_grid()) detail::require(*native == grid, "output grid differs from element grid");
  FarFieldPattern out;
  out.grid = grid;
  out.frequency = frequency_hz;
  out.e_theta.resize(grid.size());
  out.e_phi.resize(grid.size());
  const std::size_t np = grid.phi_deg.size();
  parallel_for(grid.theta_deg.size(), [&](std::size_t it) {
    for (std::size_t ip = 0; ip < np; ++ip) {
      const auto fr = SphericalFrame::at(deg2rad(grid.theta_deg[it]), deg2rad(grid.phi_deg[ip]));
      const Eigen::Vector3cd e = syn.total_field(w, frequency_hz, fr.r);
      out.e_theta[it * np + ip] = fr.theta.cast<cplx>().dot(e);
      out.e_phi[it * np + ip] = fr.phi.cast<cplx>().dot(e);
    }
  });
  return out;
}

/// Synthesis from tabulated per-element patterns on their shared grid.
inline FarFieldPattern synthesize_pattern(const ArrayLayout& layout, std::vector<FarFieldPattern> per_element,
                                          const ExcitationSet& w) {
  detail::require(!per_element.empty(), "need one pattern per element");
  const SphereGrid grid = per_element.front().grid;
  const double f = per_element.front().frequency;
  return synthesize_pattern(ArraySynthesizer(layout, std::move(per_element)), w, grid, f);
}

// Scanning

struct PrincipalCut {
  std::vector<double> angle_deg;  // signed angle from broadside within the plane
  std::vector<double> intensity;
};

inline PrincipalCut principal_cut(const ArraySynthesizer& syn, const ExcitationSet& w, double frequency_hz,
                                  ScanPlane plane, double step_deg = 0.05) {
  detail::require(step_deg > 0.0, "cut step must be positive");
  const auto n = static_cast<std::size_t>(std::llround(180.0 / step_deg));
  PrincipalCut cut;
  cut.angle_deg.resize(n + 1);
  cut.intensity.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) cut.angle_deg[i] = -90.0 + 180.0 * static_cast<double>(i) / static_cast<double>(n);
  parallel_for(n + 1, [&](std::size_t i) {
    cut.intensity[i] = syn.intensity(w, frequency_hz, scan_direction(cut.angle_deg[i], plane));
  });
  return cut;
}

struct CutPeak {
  double angle_deg = 0.0;
  double intensity = 0.0;
};

/// Global maximum of a principal cut, refined by golden-section search between
/// the neighbouring samples.
inline CutPeak cut_peak(const ArraySynthesizer& syn, const ExcitationSet& w, double frequency_hz, ScanPlane plane,
                        double step_deg = 0.05) {
  const auto cut = principal_cut(syn, w, frequency_hz, plane, step_deg);
  const auto best = static_cast<std::size_t>(
      std::max_element(cut.intensity.begin(), cut.intensity.end()) - cut.intensity.begin());
  double lo = cut.angle_deg[best == 0 ? 0 : best - 1];
  double hi = cut.angle_deg[std::min(best + 1, cut.angle_deg.size() - 1)];
  auto f = [&](double a) { return syn.intensity(w, frequency_hz, scan_direction(a, plane)); };
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 60 && hi - lo > 1e-9; ++it) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - g * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + g * (hi - lo);
      fd = f(d);
    }
  }
  CutPeak peak{0.5 * (lo + hi), 0.0};
  peak.intensity = f(peak.angle_deg);
  if (cut.intensity[best] > peak.intensity) peak = {cut.angle_deg[best], cut.intensity[best]};
  return peak;
}

struct VswrValue {
  double value = 1.0;
  bool saturated = false;
};

struct PortReflection {
  std::size_t port = 0;
  cplx gamma;
  VswrValue vswr;
};

struct ScanReport {
  double theta0_deg = 0.0;
  ScanPlane plane = ScanPlane::E;
  double peak_deg = 0.0;
  double level_db = 0.0;  // realized peak relative to the broadside peak
  std::vector<PortReflection> ports;
};

/// Steers to each angle with plane-projection phases (outer `passive_border`
/// rings unexcited) and reports the realized peak against broadside.
inline std::vector<ScanReport> scan_sweep(const ArraySynthesizer& syn, double frequency_hz, ScanPlane plane,
                                          const std::vector<double>& angles_deg, int passive_border = 0,
                                          double cut_step_deg = 0.05) {
  for (double a : angles_deg)
    detail::require(std::isfinite(a) && std::abs(a) < 90.0, "scan angles must lie in (-90, 90) deg");
  auto excite = [&](double a) {
    auto w = plane_projection_phases(syn.layout(), a, plane, frequency_hz);
    zero_border(syn.layout(), w, passive_border);
    return w;
  };
  const auto ref = cut_peak(syn, excite(0.0), frequency_hz, plane, cut_step_deg);
  if (!(ref.intensity > 0.0)) throw NumericalError("broadside reference pattern is zero");
  std::vector<ScanReport> out;
  for (double a : angles_deg) {
    const auto pk = cut_peak(syn, excite(a), frequency_hz, plane, cut_step_deg);
    ScanReport r;
    r.theta0_deg = a;
    r.plane = plane;
    r.peak_deg = pk.angle_deg;
    r.level_db = 10.0 * std::log10(pk.intensity / ref.intensity);
    out.push_back(std::move(r));
  }
  return out;
}

// Active reflection

/// S-matrix at f, linear in Re/Im between tabulated points. No extrapolation.
inline Eigen::MatrixXcd interpolate_s(const PortNetwork& net, double frequency_hz) {
  detail::require(!net.frequencies.empty(), "network has no frequency points");
  const auto& f = net.frequencies;
  const double tol = 1e-9 * std::max(1.0, std::abs(f.back()));
  detail::require(frequency_hz >= f.front() - tol && frequency_hz <= f.back() + tol,
                  "frequency " + csv::num(frequency_hz) + " Hz lies outside the network data range");
  auto it = std::lower_bound(f.begin(), f.end(), frequency_hz);
  if (it != f.end() && std::abs(*it - frequency_hz) <= tol) return net.s[static_cast<std::size_t>(it - f.begin())];
  if (it == f.end()) return net.s.back();
  if (it == f.begin()) return net.s.front();
  const auto hi = static_cast<std::size_t>(it - f.begin());
  const auto lo = hi - 1;
  const double t = (frequency_hz - f[lo]) / (f[hi] - f[lo]);
  return (1.0 - t) * net.s[lo] + t * net.s[hi];
}

/// Incident-wave vector over ports from element weights.
inline Eigen::VectorXcd port_excitation(const PortNetwork& net, const ExcitationSet& w) {
  Eigen::VectorXcd a(static_cast<Eigen::Index>(net.port_count()));
  for (std::size_t p = 0; p < net.port_count(); ++p) {
    const std::size_t e = net.port_element.at(p);
    detail::require(e < w.size(), "port maps to a missing element");
    a(static_cast<Eigen::Index>(p)) = w.weights[e];
  }
  return a;
}

/// Gamma_m = sum_n S_mn a_n / a_m with a indexed by port.
inline cplx active_reflection(const PortNetwork& net, const Eigen::VectorXcd& a, std::size_t port, double frequency_hz) {
  detail::require(a.size() == static_cast<Eigen::Index>(net.port_count()), "excitation size differs from port count");
  detail::require(port < net.port_count(), "port index out of range");
  const cplx am = a(static_cast<Eigen::Index>(port));
  detail::require(am != 0.0, "port " + std::to_string(port) + " has zero excitation");
  const Eigen::MatrixXcd s = interpolate_s(net, frequency_hz);
  return (s.row(static_cast<Eigen::Index>(port)) * a)(0) / am;
}

inline VswrValue active_vswr(cplx gamma) {
  const double m = std::abs(gamma);
  if (!(m < 1.0)) return {std::numeric_limits<double>::infinity(), true};
  return {(1.0 + m) / (1.0 - m), false};
}

/// Active reflection and VSWR for every excited port.
inline std::vector<PortReflection> active_port_report(const PortNetwork& net, const ExcitationSet& w,
                                                      double frequency_hz) {
  net.validate();
  const Eigen::VectorXcd a = port_excitation(net, w);
  const Eigen::MatrixXcd s = interpolate_s(net, frequency_hz);
  const Eigen::VectorXcd b = s * a;
  std::vector<PortReflection> out;
  for (std::size_t p = 0; p < net.port_count(); ++p) {
    const cplx am = a(static_cast<Eigen::Index>(p));
    if (am == 0.0) continue;
    PortReflection r;
    r.port = p;
    r.gamma = b(static_cast<Eigen::Index>(p)) / am;
    r.vswr = active_vswr(r.gamma);
    out.push_back(r);
  }
  return out;
}

// CSV

inline std::string layout_to_csv(const ArrayLayout& layout) {
  std::string out = "index,x_m,y_m,z_m,bx,by,bz,pol\n";
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto& e = layout.elements[i];
    out += csv::row({std::to_string(i), csv::num(e.position.x()), csv::num(e.position.y()), csv::num(e.position.z()),
                     csv::num(e.boresight.x()), csv::num(e.boresight.y()), csv::num(e.boresight.z()),
                     to_string(e.polarization)});
  }
  return out;
}

inline std::string excitation_to_csv(const ExcitationSet& w) {
  std::string out = "index,re,im,amplitude,phase_deg\n";
  for (std::size_t i = 0; i < w.size(); ++i) {
    const cplx v = w.weights[i];
    out += csv::row({std::to_string(i), csv::num(v.real()), csv::num(v.imag()), csv::num(std::abs(v)),
                     csv::num(rad2deg(std::arg(v)))});
  }
  return out;
}

inline std::string scan_reports_to_csv(const std::vector<ScanReport>& reports) {
  std::string out = "theta0_deg,peak_deg,level_db\n";
  for (const auto& r : reports) out += csv::row({csv::num(r.theta0_deg), csv::num(r.peak_deg), csv::num(r.level_db)});
  return out;
}

inline std::string port_reflections_to_csv(double theta0_deg, const std::vector<PortReflection>& ports) {
  std::string out = "theta0_deg,port,re_gamma,im_gamma,vswr,saturated\n";
  for (const auto& p : ports) {
    out += csv::row({csv::num(theta0_deg), std::to_string(p.port), csv::num(p.gamma.real()), csv::num(p.gamma.imag()),
                     p.vswr.saturated ? std::string("inf") : csv::num(p.vswr.value), p.vswr.saturated ? "1" : "0"});
  }
  return out;
}

/// Normalized principal-cut CSV: `angle_deg,level_db` relative to the cut maximum.
inline std::string cut_to_csv(const PrincipalCut& cut) {
  const double peak = *std::max_element(cut.intensity.begin(), cut.intensity.end());
  std::string out = "angle_deg,level_db\n";
  for (std::size_t i = 0; i < cut.angle_deg.size(); ++i) {
    const double v = peak > 0.0 ? cut.intensity[i] / peak : 0.0;
    out += csv::row({csv::num(cut.angle_deg[i]), csv::num(v > 0.0 ? 10.0 * std::log10(v) : -400.0)});
  }
  return out;
}

}  // namespace cmaw
