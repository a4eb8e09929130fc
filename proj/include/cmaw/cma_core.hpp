#pragma once

// Characteristic modes: X J = lambda R J on the radiating subspace of R,
// modal significance, frequency tracking, resonances, modal expansion and
// the bending fluctuation value.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "cmaw/csv.hpp"
#include "cmaw/em_kernel.hpp"
#include "cmaw/error.hpp"

namespace cmaw {

struct CharacteristicMode {
  double frequency = 0.0;
  double lambda = 0.0;
  double ms = 0.0;
  Eigen::VectorXd current;  // J_n, normalized so that J^T R J = 1
};

/// Modes at one frequency together with the R used to normalize them.
struct ModalSolution {
  double frequency = 0.0;
  Eigen::MatrixXd R;
  Eigen::Index retained = 0;  // dimension of the radiating subspace
  std::vector<CharacteristicMode> modes;
};

inline double modal_significance(double lambda) {
  detail::require(std::isfinite(lambda), "eigenvalue must be finite");
  return 1.0 / std::sqrt(1.0 + lambda * lambda);
}

struct ModeSolverOptions {
  // Eigenvalues of R below retain_tol * max are treated as non-radiating.
  double retain_tol = 1e-8;
  // Return fewer modes instead of failing when the subspace is too small.
  bool clamp_to_retained = false;
};

/// Solves X J = lambda R J for symmetric X and positive semi-definite R by
/// restricting to the span of R's eigenvectors above the retention floor.
/// Returns the n_modes modes of smallest |lambda| (ties: smaller lambda first).
inline ModalSolution solve_pencil(const Eigen::MatrixXd& R, const Eigen::MatrixXd& X, std::size_t n_modes,
                                  double frequency = 0.0, const ModeSolverOptions& opt = {}) {
  detail::require(R.rows() == R.cols() && X.rows() == X.cols() && R.rows() == X.rows(),
                  "R and X must be square and of equal size");
  detail::require(n_modes >= 1, "n_modes must be >= 1");
  detail::require(opt.clamp_to_retained || static_cast<Eigen::Index>(n_modes) <= R.rows(),
                  "n_modes exceeds the basis count");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> r_eig(R);
  if (r_eig.info() != Eigen::Success) throw NumericalError("eigen-decomposition of R failed");
  const Eigen::VectorXd& d = r_eig.eigenvalues();  // ascending
  const double dmax = d.maxCoeff();
  if (!(dmax > 0.0)) throw NumericalError("R has no positive eigenvalues");
  Eigen::Index first = 0;
  while (first < d.size() && d(first) <= opt.retain_tol * dmax) ++first;
  const Eigen::Index kept = d.size() - first;
  if (opt.clamp_to_retained) n_modes = std::min(n_modes, static_cast<std::size_t>(kept));
  if (static_cast<Eigen::Index>(n_modes) > kept) {
    throw NumericalError("requested " + std::to_string(n_modes) + " modes but the radiating subspace has dimension " +
                         std::to_string(kept));
  }

  // Q = U_k D_k^{-1/2} whitens R on the kept subspace: Q^T R Q = I.
  Eigen::MatrixXd Q = r_eig.eigenvectors().rightCols(kept);
  for (Eigen::Index c = 0; c < kept; ++c) Q.col(c) /= std::sqrt(d(first + c));
  Eigen::MatrixXd Xr = Q.transpose() * X * Q;
  Xr = 0.5 * (Xr + Xr.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> x_eig(Xr);
  if (x_eig.info() != Eigen::Success) throw NumericalError("reduced eigenproblem failed");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(kept));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const Eigen::VectorXd& lam = x_eig.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double la = std::abs(lam(a));
    const double lb = std::abs(lam(b));
    if (la != lb) return la < lb;
    return lam(a) < lam(b);
  });

  ModalSolution sol;
  sol.frequency = frequency;
  sol.R = R;
  sol.retained = kept;
  sol.modes.reserve(n_modes);
  for (std::size_t i = 0; i < n_modes; ++i) {
    const Eigen::Index idx = order[i];
    CharacteristicMode m;
    m.frequency = frequency;
    m.lambda = lam(idx);
    m.ms = modal_significance(m.lambda);
    m.current = Q * x_eig.eigenvectors().col(idx);
    // Re-normalize against R itself, then fix the sign: largest entry positive.
    m.current /= std::sqrt(m.current.dot(R * m.current));
    Eigen::Index imax = 0;
    m.current.cwiseAbs().maxCoeff(&imax);
    if (m.current(imax) < 0.0) m.current = -m.current;
    sol.modes.push_back(std::move(m));
  }
  return sol;
}

inline ModalSolution solve_modes(const ImpedanceMatrix& zm, std::size_t n_modes, const ModeSolverOptions& opt = {}) {
  return solve_pencil(zm.R(), zm.X(), n_modes, zm.frequency, opt);
}

inline std::vector<ModalSolution> solve_sweep(const std::vector<ImpedanceMatrix>& mats, std::size_t n_modes,
                                              const ModeSolverOptions& opt = {}) {
  std::vector<ModalSolution> out(mats.size());
  parallel_for(mats.size(), [&](std::size_t i) { out[i] = solve_modes(mats[i], n_modes, opt); });
  return out;
}

// ---------------------------------------------------------------------------
// Tracking

struct ModeTrack {
  int mode_id = 0;
  std::vector<CharacteristicMode> samples;
  std::vector<double> resonances;
};

/// Normalized R-weighted correlation |a^T R b| / sqrt(a^T R a * b^T R b).
inline double r_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::MatrixXd& R) {
  const Eigen::VectorXd Rb = R * b;
  const double ab = a.dot(Rb);
  const double aa = a.dot(R * a);
  const double bb = b.dot(Rb);
  if (aa <= 0.0 || bb <= 0.0) return 0.0;
  return std::abs(ab) / std::sqrt(aa * bb);
}

inline std::vector<double> find_resonances(const ModeTrack& track) {
  std::vector<double> out;
  const auto& s = track.samples;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double l0 = s[i].lambda;
    const double l1 = s[i + 1].lambda;
    if (l0 == 0.0) {
      out.push_back(s[i].frequency);
    } else if ((l0 < 0.0 && l1 > 0.0) || (l0 > 0.0 && l1 < 0.0)) {
      out.push_back(s[i].frequency - l0 * (s[i + 1].frequency - s[i].frequency) / (l1 - l0));
    }
  }
  if (s.size() >= 2 && s.back().lambda == 0.0) out.push_back(s.back().frequency);
  return out;
}

struct TrackingOptions {
  double threshold = 0.7;
};

namespace detail {

// Greedy one-to-one matching on a correlation matrix: repeatedly take the
// largest remaining entry at or above the threshold.
inline std::vector<std::pair<Eigen::Index, Eigen::Index>> greedy_match(const Eigen::MatrixXd& rho, double threshold) {
  std::vector<std::tuple<double, Eigen::Index, Eigen::Index>> cand;
  for (Eigen::Index i = 0; i < rho.rows(); ++i)
    for (Eigen::Index j = 0; j < rho.cols(); ++j)
      if (rho(i, j) >= threshold) cand.emplace_back(rho(i, j), i, j);
  std::stable_sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
    return std::get<2>(a) < std::get<2>(b);
  });
  std::vector<bool> used_i(static_cast<std::size_t>(rho.rows()), false);
  std::vector<bool> used_j(static_cast<std::size_t>(rho.cols()), false);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
  for (const auto& [r, i, j] : cand) {
    if (used_i[static_cast<std::size_t>(i)] || used_j[static_cast<std::size_t>(j)]) continue;
    used_i[static_cast<std::size_t>(i)] = used_j[static_cast<std::size_t>(j)] = true;
    out.emplace_back(i, j);
  }
  return out;
}

}  // namespace detail

/// Follows modes across ascending frequencies. Modes at adjacent points are
/// associated by greedy maximal matching on the R-correlation (R taken from
/// the lower frequency); unmatched modes open new tracks.
inline std::vector<ModeTrack> track_modes(const std::vector<ModalSolution>& sweep, const TrackingOptions& opt = {}) {
  std::vector<ModeTrack> tracks;
  if (sweep.empty()) return tracks;
  const auto dim = sweep.front().R.rows();
  for (const auto& s : sweep) {
    detail::require(s.R.rows() == dim, "inconsistent basis dimension across frequencies");
    for (const auto& m : s.modes) detail::require(m.current.size() == dim, "eigencurrent dimension mismatch");
  }
  for (std::size_t i = 1; i < sweep.size(); ++i) {
    detail::require(sweep[i].frequency > sweep[i - 1].frequency, "sweep frequencies must be increasing");
  }

  std::vector<std::size_t> active;  // track index per mode at the current point
  for (const auto& m : sweep.front().modes) {
    active.push_back(tracks.size());
    tracks.push_back(ModeTrack{static_cast<int>(tracks.size()), {m}, {}});
  }
  for (std::size_t f = 1; f < sweep.size(); ++f) {
    const auto& lo = sweep[f - 1];
    const auto& hi = sweep[f];
    const auto n_lo = static_cast<Eigen::Index>(lo.modes.size());
    const auto n_hi = static_cast<Eigen::Index>(hi.modes.size());
    Eigen::MatrixXd Jlo(dim, n_lo);
    Eigen::MatrixXd Jhi(dim, n_hi);
    for (Eigen::Index i = 0; i < n_lo; ++i) Jlo.col(i) = lo.modes[static_cast<std::size_t>(i)].current;
    for (Eigen::Index j = 0; j < n_hi; ++j) Jhi.col(j) = hi.modes[static_cast<std::size_t>(j)].current;
    const Eigen::MatrixXd RJhi = lo.R * Jhi;
    const Eigen::MatrixXd cross = Jlo.transpose() * RJhi;
    const Eigen::VectorXd norm_lo = (Jlo.transpose() * (lo.R * Jlo)).diagonal();
    const Eigen::VectorXd norm_hi = (Jhi.transpose() * RJhi).diagonal();
    Eigen::MatrixXd rho(n_lo, n_hi);
    for (Eigen::Index i = 0; i < n_lo; ++i) {
      for (Eigen::Index j = 0; j < n_hi; ++j) {
        const double den = norm_lo(i) * norm_hi(j);
        rho(i, j) = den > 0.0 ? std::abs(cross(i, j)) / std::sqrt(den) : 0.0;
      }
    }
    constexpr auto unmatched = static_cast<std::size_t>(-1);
    std::vector<std::size_t> next(static_cast<std::size_t>(n_hi), unmatched);
    for (const auto& [i, j] : detail::greedy_match(rho, opt.threshold)) {
      const std::size_t t = active[static_cast<std::size_t>(i)];
      tracks[t].samples.push_back(hi.modes[static_cast<std::size_t>(j)]);
      next[static_cast<std::size_t>(j)] = t;
    }
    for (Eigen::Index j = 0; j < n_hi; ++j) {
      if (next[static_cast<std::size_t>(j)] != unmatched) continue;
      next[static_cast<std::size_t>(j)] = tracks.size();
      tracks.push_back(ModeTrack{static_cast<int>(tracks.size()), {hi.modes[static_cast<std::size_t>(j)]}, {}});
    }
    active = std::move(next);
  }
  for (auto& t : tracks) t.resonances = find_resonances(t);
  return tracks;
}

/// One MS = 1 crossing of a track, with the eigencurrent of the bracketing
/// sample closest to resonance.
struct ResonantMode {
  int track_id = 0;
  double frequency = 0.0;
  Eigen::VectorXd current;
};

/// All crossings inside [f_min, f_max], ascending in frequency.
inline std::vector<ResonantMode> resonant_modes(const std::vector<ModeTrack>& tracks, double f_min, double f_max) {
  std::vector<ResonantMode> out;
  for (const auto& t : tracks) {
    for (double fr : t.resonances) {
      if (fr < f_min || fr > f_max) continue;
      const CharacteristicMode* best = nullptr;
      for (const auto& s : t.samples) {
        if (best == nullptr || std::abs(s.frequency - fr) < std::abs(best->frequency - fr)) best = &s;
      }
      out.push_back(ResonantMode{t.mode_id, fr, best->current});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ResonantMode& a, const ResonantMode& b) { return a.frequency < b.frequency; });
  return out;
}

// ---------------------------------------------------------------------------
// Modal expansion

/// a_n = (J_n^T v) / (1 + j lambda_n).
inline std::vector<cplx> modal_weighting(const std::vector<CharacteristicMode>& modes, const Eigen::VectorXcd& v) {
  std::vector<cplx> a;
  a.reserve(modes.size());
  for (const auto& m : modes) {
    detail::require(m.current.size() == v.size(), "excitation dimension does not match the basis");
    const cplx proj = m.current.cast<cplx>().dot(v);  // J real, so no conjugation issue
    a.push_back(proj / cplx(1.0, m.lambda));
  }
  return a;
}

inline Eigen::VectorXcd expand_current(const std::vector<CharacteristicMode>& modes, const std::vector<cplx>& a) {
  detail::require(modes.size() == a.size(), "mode and coefficient counts differ");
  if (modes.empty()) return {};
  Eigen::VectorXcd J = Eigen::VectorXcd::Zero(modes.front().current.size());
  for (std::size_t n = 0; n < modes.size(); ++n) J += a[n] * modes[n].current.cast<cplx>();
  return J;
}

// ---------------------------------------------------------------------------
// Fluctuation value

struct FluctuationReport {
  std::string label_a;
  std::string label_b;
  std::vector<int> mode_ids;
  std::vector<double> fa_hz;
  std::vector<double> fb_hz;
  std::size_t n = 0;
  double fv_ghz = 0.0;
};

/// FV = sqrt(sum_i (fA_i - fB_i)^2) / n with frequencies in GHz.
inline FluctuationReport fluctuation_value(const std::vector<double>& fa_hz, const std::vector<double>& fb_hz) {
  detail::require(fa_hz.size() == fb_hz.size(), "resonance lists differ in length");
  detail::require(!fa_hz.empty(), "resonance lists are empty");
  FluctuationReport rep;
  rep.fa_hz = fa_hz;
  rep.fb_hz = fb_hz;
  rep.n = fa_hz.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < rep.n; ++i) {
    const double d = (fa_hz[i] - fb_hz[i]) * 1e-9;
    sum += d * d;
  }
  rep.fv_ghz = std::sqrt(sum) / static_cast<double>(rep.n);
  for (std::size_t i = 0; i < rep.n; ++i) rep.mode_ids.push_back(static_cast<int>(i) + 1);
  return rep;
}

/// Pairs the reference modes with modes of another curvature state by
/// eigencurrent correlation. Basis functions of a bent mesh coincide with
/// those of its planar parent by arc length, so coefficient vectors compare
/// directly. Returns (reference index, other index), ordered by reference.
inline std::vector<std::pair<std::size_t, std::size_t>> pair_modes(const std::vector<ResonantMode>& ref,
                                                                   const std::vector<ResonantMode>& other,
                                                                   double threshold = 0.7) {
  if (ref.empty() || other.empty()) return {};
  Eigen::MatrixXd rho(static_cast<Eigen::Index>(ref.size()), static_cast<Eigen::Index>(other.size()));
  for (std::size_t i = 0; i < ref.size(); ++i) {
    for (std::size_t j = 0; j < other.size(); ++j) {
      detail::require(ref[i].current.size() == other[j].current.size(), "eigencurrent dimension mismatch");
      rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::abs(ref[i].current.normalized().dot(other[j].current.normalized()));
    }
  }
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& [i, j] : detail::greedy_match(rho, threshold))
    out.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  std::sort(out.begin(), out.end());
  return out;
}

/// FV between a reference state A and state B over A's modes that pair.
inline FluctuationReport paired_fluctuation(const std::vector<ResonantMode>& a, const std::vector<ResonantMode>& b,
                                            double threshold = 0.7) {
  const auto pairs = pair_modes(a, b, threshold);
  if (pairs.empty()) throw NumericalError("no modes could be paired between the two curvature states");
  std::vector<double> fa;
  std::vector<double> fb;
  for (const auto& [i, j] : pairs) {
    fa.push_back(a[i].frequency);
    fb.push_back(b[j].frequency);
  }
  auto rep = fluctuation_value(fa, fb);
  rep.mode_ids.clear();
  for (const auto& [i, j] : pairs) rep.mode_ids.push_back(static_cast<int>(i) + 1);
  return rep;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string tracks_to_csv(const std::vector<ModeTrack>& tracks) {
  std::string out = "mode_id,frequency_hz,lambda,ms\n";
  for (const auto& t : tracks)
    for (const auto& s : t.samples)
      out += csv::row({std::to_string(t.mode_id), csv::num(s.frequency), csv::num(s.lambda), csv::num(s.ms)});
  return out;
}

inline std::string fluctuation_to_csv(const FluctuationReport& rep) {
  std::string out = "mode_id,fA_hz,fB_hz\n";
  for (std::size_t i = 0; i < rep.n; ++i)
    out += csv::row({std::to_string(rep.mode_ids[i]), csv::num(rep.fa_hz[i]), csv::num(rep.fb_hz[i])});
  out += "# fv_ghz=" + csv::num(rep.fv_ghz) + " n=" + std::to_string(rep.n) + "\n";
  return out;
}

}  // namespace cmaw
