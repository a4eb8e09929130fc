#pragma once

// Galerkin thin-wire EFIE on piecewise-linear (triangle) basis functions.
//
//   Z_mn = jw mu <f_m, G f_n> + 1/(jw eps) <div f_m, G div f_n>
//
// with the reduced kernel G = exp(-jkR)/(4 pi R), R = sqrt(|r - r'|^2 + a^2).
// Time convention exp(+jwt); Z = R + jX with R the radiation operator.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cmaw/constants.hpp"
#include "cmaw/csv.hpp"
#include "cmaw/error.hpp"
#include "cmaw/geometry.hpp"
#include "cmaw/parallel.hpp"
#include "cmaw/quadrature.hpp"

namespace cmaw {

class FrequencyGrid {
 public:
  FrequencyGrid() = default;
  explicit FrequencyGrid(std::vector<double> f) : f_(std::move(f)) {
    detail::require(!f_.empty(), "frequency grid is empty");
    for (std::size_t i = 0; i < f_.size(); ++i) {
      detail::require(std::isfinite(f_[i]) && f_[i] > 0.0, "frequencies must be positive");
      if (i > 0) detail::require(f_[i] > f_[i - 1], "frequencies must be strictly increasing");
    }
  }

  static FrequencyGrid linspace(double start_hz, double stop_hz, std::size_t points) {
    detail::require(points >= 1, "frequency grid needs at least one point");
    if (points == 1) return FrequencyGrid({start_hz});
    detail::require(stop_hz > start_hz, "frequency stop must exceed start");
    std::vector<double> f(points);
    const double step = (stop_hz - start_hz) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) f[i] = start_hz + step * static_cast<double>(i);
    f.back() = stop_hz;
    return FrequencyGrid(std::move(f));
  }

  const std::vector<double>& values() const { return f_; }
  std::size_t size() const { return f_.size(); }
  double operator[](std::size_t i) const { return f_[i]; }
  double max() const { return f_.back(); }
  double min() const { return f_.front(); }

 private:
  std::vector<double> f_;
};

struct ImpedanceMatrix {
  double frequency = 0.0;
  Eigen::MatrixXcd Z;

  Eigen::MatrixXd R() const { return Z.real(); }
  Eigen::MatrixXd X() const { return Z.imag(); }
  Eigen::Index basis_count() const { return Z.rows(); }

  double symmetry_residual() const {
    const double n = Z.norm();
    return n == 0.0 ? 0.0 : (Z - Z.transpose()).norm() / n;
  }
};

struct KernelOptions {
  std::size_t quadrature_order = 8;
  // Outer order for self, adjacent and other near pairs.
  std::size_t near_order = 16;
  // A pair is near when midpoint distance < near_factor * (len_p + len_q) / 2.
  double near_factor = 3.0;
};

/// Basis function index for each node: interior nodes of an open wire, every
/// node of a closed one. End nodes of an open wire carry no basis.
inline std::vector<std::optional<Eigen::Index>> node_basis_map(const WireMesh& mesh) {
  std::vector<std::optional<Eigen::Index>> map(mesh.nodes.size());
  Eigen::Index next = 0;
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    if (!mesh.closed && (i == 0 || i + 1 == mesh.nodes.size())) continue;
    map[i] = next++;
  }
  return map;
}

inline Eigen::Index basis_count(const WireMesh& mesh) {
  if (mesh.nodes.size() < 2) return 0;
  return mesh.closed ? static_cast<Eigen::Index>(mesh.nodes.size())
                     : static_cast<Eigen::Index>(mesh.nodes.size()) - 2;
}

namespace detail {

struct SegmentData {
  Point3 start;
  Point3 dir;
  Point3 mid;
  double length;
};

inline std::vector<SegmentData> segment_data(const WireMesh& mesh) {
  std::vector<SegmentData> segs(mesh.segment_count());
  for (std::size_t s = 0; s < segs.size(); ++s) {
    const Point3 d = mesh.segment_end(s) - mesh.segment_start(s);
    segs[s].start = mesh.segment_start(s);
    segs[s].length = d.norm();
    if (!(segs[s].length > 0.0)) throw ValidationError("degenerate segment " + std::to_string(s));
    segs[s].dir = d / segs[s].length;
    segs[s].mid = segs[s].start + 0.5 * d;
  }
  return segs;
}

// Returns {len*int_0^1 G dt', len*int_0^1 t' G dt'} over source segment q
// for an observation point r on the axis of another segment.
inline std::pair<cplx, cplx> source_integrals(const Point3& r, const SegmentData& q, double a2, double k,
                                              bool near, const GaussRule& inner) {
  constexpr double inv4pi = 1.0 / (4.0 * kPi);
  cplx i0{0.0, 0.0};
  cplx i1{0.0, 0.0};
  for (std::size_t j = 0; j < inner.size(); ++j) {
    const double t = inner.nodes[j];
    const Point3 rp = q.start + (t * q.length) * q.dir;
    const double dist = std::sqrt((r - rp).squaredNorm() + a2);
    cplx g;
    if (near) {
      // Smooth remainder exp(-jkR)/R - 1/R, bounded by k as R -> 0.
      g = (std::exp(cplx(0.0, -k * dist)) - 1.0) / dist;
    } else {
      g = std::exp(cplx(0.0, -k * dist)) / dist;
    }
    const double w = inner.weights[j] * q.length;
    i0 += w * g;
    i1 += w * t * g;
  }
  if (near) {
    const Point3 d = r - q.start;
    const double z = d.dot(q.dir);
    const double rho2 = std::max(0.0, d.squaredNorm() - z * z) + a2;
    const double rho = std::sqrt(rho2);
    const double len = q.length;
    const double j0 = std::asinh((len - z) / rho) + std::asinh(z / rho);
    const double j1 = std::sqrt(rho2 + (len - z) * (len - z)) - std::sqrt(rho2 + z * z) + z * j0;
    i0 += j0;
    i1 += j1 / len;
  }
  return {i0 * inv4pi, i1 * inv4pi};
}

// 2x2 block A_ab = int_p int_q N_a(t) N_b(t') G, with N_0 = 1 - t, N_1 = t.
inline Eigen::Matrix2cd pair_block(const SegmentData& p, const SegmentData& q, double a2, double k,
                                   bool near, const GaussRule& outer, const GaussRule& inner) {
  Eigen::Matrix2cd block = Eigen::Matrix2cd::Zero();
  for (std::size_t i = 0; i < outer.size(); ++i) {
    const double t = outer.nodes[i];
    const Point3 r = p.start + (t * p.length) * p.dir;
    const auto [i0, i1] = source_integrals(r, q, a2, k, near, inner);
    const double w = outer.weights[i] * p.length;
    const cplx b0 = i0 - i1;
    block(0, 0) += w * (1.0 - t) * b0;
    block(0, 1) += w * (1.0 - t) * i1;
    block(1, 0) += w * t * b0;
    block(1, 1) += w * t * i1;
  }
  return block;
}

}  // namespace detail

inline ImpedanceMatrix assemble_impedance(const WireMesh& mesh, double frequency_hz,
                                          const KernelOptions& opt = {}) {
  detail::require(std::isfinite(frequency_hz) && frequency_hz > 0.0, "frequency must be positive");
  detail::require(mesh.wire_radius > 0.0, "wire radius must be positive");
  check_density(mesh, frequency_hz);

  const auto segs = detail::segment_data(mesh);
  const auto basis = node_basis_map(mesh);
  const Eigen::Index nb = basis_count(mesh);
  detail::require(nb >= 1, "mesh has no basis functions");

  const double omega = 2.0 * kPi * frequency_hz;
  const double k = wavenumber(frequency_hz);
  const double a2 = mesh.wire_radius * mesh.wire_radius;
  const cplx vec_coef(0.0, omega * kMu0);
  const cplx sca_coef = 1.0 / cplx(0.0, omega * kEps0);
  const GaussRule far_rule = gauss_legendre(opt.quadrature_order);
  const GaussRule near_rule = gauss_legendre(opt.near_order);

  const std::size_t ns = segs.size();
  const std::size_t nn = mesh.nodes.size();
  // Basis indices touched by segment s through its start / end shape.
  auto shape_basis = [&](std::size_t s, int a) { return basis[a == 0 ? s : (s + 1) % nn]; };

  ImpedanceMatrix out;
  out.frequency = frequency_hz;
  out.Z = Eigen::MatrixXcd::Zero(nb, nb);

  for (std::size_t p = 0; p < ns; ++p) {
    for (std::size_t q = p; q < ns; ++q) {
      const double mid_dist = (segs[p].mid - segs[q].mid).norm();
      const bool near = mid_dist < opt.near_factor * 0.5 * (segs[p].length + segs[q].length);
      Eigen::Matrix2cd block =
          detail::pair_block(segs[p], segs[q], a2, k, near, near ? near_rule : far_rule, far_rule);
      if (p == q) block = 0.5 * (block + block.transpose()).eval();
      const cplx scalar = block.sum();
      const double dot = segs[p].dir.dot(segs[q].dir);
      for (int a = 0; a < 2; ++a) {
        const auto m = shape_basis(p, a);
        if (!m) continue;
        for (int b = 0; b < 2; ++b) {
          const auto n = shape_basis(q, b);
          if (!n) continue;
          const double sign = (a == b) ? 1.0 : -1.0;
          const cplx term = vec_coef * dot * block(a, b) +
                            sca_coef * sign * scalar / (segs[p].length * segs[q].length);
          out.Z(*m, *n) += term;
          if (p != q) out.Z(*n, *m) += term;
        }
      }
    }
  }
  // Exact reciprocity up to the order of floating-point accumulation.
  out.Z = 0.5 * (out.Z + out.Z.transpose()).eval();
  return out;
}

inline std::vector<ImpedanceMatrix> sweep_impedance(const WireMesh& mesh, const FrequencyGrid& grid,
                                                    const KernelOptions& opt = {}) {
  detail::require(grid.size() >= 1, "frequency grid is empty");
  check_density(mesh, grid.max());
  std::vector<ImpedanceMatrix> out(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    try {
      out[i] = assemble_impedance(mesh, grid[i], opt);
    } catch (const ValidationError& e) {
      throw ValidationError("at " + std::to_string(grid[i]) + " Hz: " + e.what());
    }
  });
  return out;
}

/// Voltage excitation at the basis function sitting on `node` (delta gap).
inline Eigen::VectorXcd delta_gap(const WireMesh& mesh, std::size_t node, cplx volts = 1.0) {
  const auto basis = node_basis_map(mesh);
  detail::require(node < basis.size() && basis[node].has_value(), "delta gap node carries no basis");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(basis_count(mesh));
  v(*basis[node]) = volts;
  return v;
}

// Dump as `row,col,re,im` plus a sidecar `frequency_hz,basis_count`.
inline std::string matrix_to_csv(const ImpedanceMatrix& zm) {
  std::string out = "row,col,re,im\n";
  for (Eigen::Index r = 0; r < zm.Z.rows(); ++r) {
    for (Eigen::Index c = 0; c < zm.Z.cols(); ++c) {
      out += csv::row({std::to_string(r), std::to_string(c), csv::num(zm.Z(r, c).real()),
                       csv::num(zm.Z(r, c).imag())});
    }
  }
  return out;
}

inline std::string matrix_header_csv(const ImpedanceMatrix& zm) {
  return "frequency_hz,basis_count\n" + csv::row({csv::num(zm.frequency), std::to_string(zm.Z.rows())});
}

}  // namespace cmaw
