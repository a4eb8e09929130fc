#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "cmaw/cma_core.hpp"
#include "cmaw/em_kernel.hpp"

using namespace cmaw;

namespace {

constexpr double kHalfWave5GHz = kC0 / (2.0 * 5e9);

// Imaginary part of the input impedance seen by a delta gap at the centre node.
double input_reactance(const WireMesh& m, double f, const KernelOptions& opt) {
  const auto z = assemble_impedance(m, f, opt);
  const Eigen::VectorXcd v = delta_gap(m, m.nodes.size() / 2);
  const Eigen::VectorXcd i = z.Z.partialPivLu().solve(v);
  return (1.0 / i(basis_count(m) / 2)).imag();
}

// First upward zero of X_in on a 50 MHz grid, linearly interpolated.
double reactance_zero(const WireMesh& m, double f_lo, double f_hi, const KernelOptions& opt) {
  double pf = 0.0, px = 0.0;
  for (double f = f_lo; f <= f_hi * (1.0 + 1e-12); f += 0.05e9) {
    const double x = input_reactance(m, f, opt);
    if (pf > 0.0 && px < 0.0 && x >= 0.0) return pf - px * (f - pf) / (x - px);
    pf = f;
    px = x;
  }
  return std::nan("");
}

}  // namespace

TEST(FrequencyGrid, Validation) {
  EXPECT_THROW(FrequencyGrid(std::vector<double>{}), ValidationError);
  EXPECT_THROW(FrequencyGrid({1e9, 1e9}), ValidationError);
  EXPECT_THROW(FrequencyGrid({2e9, 1e9}), ValidationError);
  EXPECT_THROW(FrequencyGrid({-1e9}), ValidationError);
  const auto g = FrequencyGrid::linspace(2e9, 10e9, 81);
  EXPECT_EQ(g.size(), 81u);
  EXPECT_DOUBLE_EQ(g[40], 6e9);
  EXPECT_DOUBLE_EQ(g.max(), 10e9);
}

TEST(Impedance, SymmetricOnStraightAndBentMeshes) {
  const auto straight = build_strip_chain(2, kHalfWave5GHz, 1e-3, 20);
  for (double rc : {0.0, 0.1, 0.03}) {
    const auto m = rc > 0 ? bend_to_cylinder(straight, BendSpec::radius(rc)) : straight;
    for (double f : {2e9, 5e9, 10e9}) EXPECT_LE(assemble_impedance(m, f).symmetry_residual(), 1e-10);
  }
}

TEST(Impedance, SymmetricOnRandomPolyline) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  WireMesh m;
  m.wire_radius = 2e-4;
  Point3 p(0, 0, 0);
  for (int i = 0; i < 30; ++i) {
    m.nodes.push_back(p);
    p += Point3(1.0 + 0.3 * u(rng), 0.5 * u(rng), 0.5 * u(rng)).normalized() * 1.5e-3;
  }
  EXPECT_LE(assemble_impedance(m, 8e9).symmetry_residual(), 1e-10);
}

TEST(Impedance, RadiationOperatorIsPositiveSemiDefinite) {
  const auto m = build_strip_chain(1, kHalfWave5GHz, 2e-3, 20);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(assemble_impedance(m, 5e9).R());
  const auto& d = eig.eigenvalues();
  EXPECT_GE(d.minCoeff(), -1e-8 * d.maxCoeff());
}

TEST(Impedance, BasisOnInteriorNodesOnly) {
  const auto m = build_strip_chain(1, kHalfWave5GHz, 2e-3, 20);
  EXPECT_EQ(basis_count(m), 19);
  EXPECT_EQ(assemble_impedance(m, 5e9).basis_count(), 19);
  const auto map = node_basis_map(m);
  EXPECT_FALSE(map.front().has_value());
  EXPECT_FALSE(map.back().has_value());
  WireMesh closed = m;
  closed.nodes.pop_back();
  closed.closed = true;
  EXPECT_EQ(basis_count(closed), 20);
}

TEST(Impedance, DipoleReactanceZeroMatchesRefinedOracle) {
  const auto coarse = build_strip_chain(1, kHalfWave5GHz, 2e-3, 10);
  const auto fine = build_strip_chain(1, kHalfWave5GHz, 2e-3, 40);
  KernelOptions heavy;
  heavy.quadrature_order = 32;
  heavy.near_order = 64;
  const double f0 = reactance_zero(coarse, 4.2e9, 5.0e9, {});
  const double f1 = reactance_zero(fine, 4.2e9, 5.0e9, heavy);
  ASSERT_TRUE(std::isfinite(f0));
  ASSERT_TRUE(std::isfinite(f1));
  const double r0 = kHalfWave5GHz * f0 / kC0;
  const double r1 = kHalfWave5GHz * f1 / kC0;
  EXPECT_GE(r0, 0.46);
  EXPECT_LE(r0, 0.49);
  EXPECT_GE(r1, 0.46);
  EXPECT_LE(r1, 0.49);
  EXPECT_NEAR(r0, r1, 0.01 * r1);
}

TEST(Impedance, ThinHalfWaveInputResistance) {
  // A thin resonant dipole has Rin in the 65-75 ohm range near its first zero.
  const auto m = build_strip_chain(1, kHalfWave5GHz, 0.4e-3, 20);
  const double f = reactance_zero(m, 4.3e9, 5.0e9, {});
  ASSERT_TRUE(std::isfinite(f));
  const auto z = assemble_impedance(m, f);
  const Eigen::VectorXcd i = z.Z.partialPivLu().solve(delta_gap(m, 10));
  const double rin = (1.0 / i(9)).real();
  EXPECT_GT(rin, 60.0);
  EXPECT_LT(rin, 80.0);
}

TEST(Impedance, ScaleInvariance) {
  const auto m = build_strip_chain(2, kHalfWave5GHz, 1e-3, 20);
  const double s = 3.7;
  WireMesh big = m;
  for (auto& p : big.nodes) p *= s;
  for (auto& a : big.arc) a *= s;
  big.wire_radius *= s;
  big.section_length *= s;
  const auto a = solve_modes(assemble_impedance(m, 6e9), 6);
  const auto b = solve_modes(assemble_impedance(big, 6e9 / s), 6);
  for (std::size_t n = 0; n < 6; ++n) {
    EXPECT_NEAR(b.modes[n].lambda, a.modes[n].lambda, 1e-6 * std::max(1.0, std::abs(a.modes[n].lambda)));
  }
}

TEST(Impedance, Errors) {
  const auto m = build_strip_chain(1, kHalfWave5GHz, 2e-3, 10);
  EXPECT_THROW(assemble_impedance(m, 10e9), ValidationError);  // too coarse
  EXPECT_THROW(assemble_impedance(m, 0.0), ValidationError);
  WireMesh bad = m;
  bad.nodes[3] = bad.nodes[2];
  EXPECT_THROW(assemble_impedance(bad, 1e9), ValidationError);
}

TEST(Sweep, SinglePointMatchesAssembly) {
  const auto m = build_strip_chain(1, kHalfWave5GHz, 1e-3, 20);
  const auto one = sweep_impedance(m, FrequencyGrid({5e9}));
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].Z, assemble_impedance(m, 5e9).Z);
}

TEST(Sweep, OrderAndDeterminism) {
  const auto m = build_strip_chain(2, kHalfWave5GHz, 1e-3, 20);
  std::vector<double> f = {2e9, 3.5e9, 5e9, 6.25e9, 8e9, 10e9};
  const auto a = sweep_impedance(m, FrequencyGrid(f));
  // Per-point assembly in a shuffled order, then re-sorted.
  std::vector<double> shuffled = f;
  std::mt19937 rng(3);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  std::vector<ImpedanceMatrix> b;
  for (double x : shuffled) b.push_back(assemble_impedance(m, x));
  std::sort(b.begin(), b.end(), [](const auto& l, const auto& r) { return l.frequency < r.frequency; });
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].frequency, f[i]);
    EXPECT_EQ(a[i].Z, b[i].Z);
    EXPECT_LE(a[i].symmetry_residual(), 1e-10);
  }
}

TEST(Sweep, ErrorNamesFrequency) {
  const auto m = build_strip_chain(1, kHalfWave5GHz, 2e-3, 10);
  try {
    sweep_impedance(m, FrequencyGrid({1e9, 12e9}));
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("12000000000"), std::string::npos) << e.what();
  }
}

TEST(MatrixCsv, Layout) {
  const auto m = build_strip_chain(1, kHalfWave5GHz, 2e-3, 4);
  const auto z = assemble_impedance(m, 1e9);
  const auto text = matrix_to_csv(z);
  EXPECT_EQ(text.rfind("row,col,re,im\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 9);
  EXPECT_EQ(matrix_header_csv(z), "frequency_hz,basis_count\n1.00000000e+09,3\n");
}

TEST(DeltaGap, RejectsEndNode) {
  const auto m = build_strip_chain(1, kHalfWave5GHz, 2e-3, 10);
  EXPECT_THROW(delta_gap(m, 0), ValidationError);
  EXPECT_EQ(delta_gap(m, 5).size(), 9);
}
