#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "cmaw/cma_core.hpp"
#include "cmaw/radiation.hpp"

using namespace cmaw;

namespace {

constexpr double kHalfWave5GHz = kC0 / (2.0 * 5e9);

// Basis coefficients that reproduce I(s) at the interior nodes.
Eigen::VectorXcd coefficients_from(const WireMesh& m, const std::function<double(double)>& current) {
  Eigen::VectorXcd c(basis_count(m));
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = current(m.arc[static_cast<std::size_t>(i) + 1]);
  return c;
}

// Directivity of I(z) = cos(kz) on a half-wave dipole, by 1-D quadrature of
// the closed-form pattern cos(pi/2 cos t)/sin t: 1.6409.
double analytic_half_wave_directivity() {
  const int n = 200000;
  double sum = 0.0;
  for (int i = 1; i < n; ++i) {
    const double t = kPi * i / n;
    const double f = std::cos(0.5 * kPi * std::cos(t)) / std::sin(t);
    sum += f * f * std::sin(t);
  }
  sum *= kPi / n;
  return 2.0 / sum;
}

}  // namespace

TEST(SphereGrid, Regular) {
  const auto g = SphereGrid::regular(5, 5);
  EXPECT_EQ(g.theta_deg.size(), 37u);
  EXPECT_EQ(g.phi_deg.size(), 72u);
  EXPECT_TRUE(g.is_full_sphere());
  EXPECT_FALSE(SphereGrid::cut({0, 90}, {0}).is_full_sphere());
  EXPECT_THROW(SphereGrid::regular(7, 5), ValidationError);
}

TEST(FarField, HertzianDirectivity) {
  const double f = 1e9;
  const auto m = build_strip_chain(1, wavelength(f) / 200.0, 1e-5, 8);
  const Eigen::VectorXcd c = Eigen::VectorXcd::Ones(basis_count(m));
  const auto p = far_field(m, c, f, SphereGrid::regular(2, 2));
  EXPECT_NEAR(directivity(p), 1.5, 0.015);
}

TEST(FarField, AnalyticHalfWaveCurrent) {
  const double oracle = analytic_half_wave_directivity();
  EXPECT_NEAR(oracle, 1.6409, 1e-3);
  const double f = 5e9;
  const auto m = build_strip_chain(1, kHalfWave5GHz, 1e-4, 40);
  const double k = wavenumber(f);
  const auto c = coefficients_from(m, [&](double s) { return std::cos(k * (s - 0.5 * kHalfWave5GHz)); });
  const auto p = far_field(m, c, f, SphereGrid::regular(2, 2));
  EXPECT_NEAR(directivity(p), oracle, 0.01 * oracle);
}

TEST(FarField, ResonantDipoleMode) {
  const auto m = build_strip_chain(1, kHalfWave5GHz, 1e-3, 20);
  const double f = 4.62e9;
  const auto s = solve_modes(assemble_impedance(m, f), 1);
  const auto p = far_field(m, s.modes[0].current.cast<cplx>(), f, SphereGrid::regular(2, 2));
  EXPECT_NEAR(directivity(p), 1.64, 0.02 * 1.64);
  // Null along the wire axis (x): theta = 90, phi = 0.
  const std::size_t np = p.grid.phi_deg.size();
  const double peak = p.intensity(45 * np + 45);  // theta 90, phi 90
  EXPECT_LT(p.intensity(45 * np + 0), 1e-10 * peak);
}

TEST(FarField, MirrorSymmetry) {
  const auto m = build_strip_chain(2, kHalfWave5GHz, 1e-3, 20);
  const double f = 7e9;
  const auto s = solve_modes(assemble_impedance(m, f), 3);
  const auto g = SphereGrid::regular(5, 5);
  for (const auto& mode : s.modes) {
    const auto p = far_field(m, mode.current.cast<cplx>(), f, g);
    double peak = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) peak = std::max(peak, p.intensity(i));
    const std::size_t np = g.phi_deg.size();
    for (std::size_t it = 0; it < g.theta_deg.size(); ++it)
      for (std::size_t ip = 1; ip < np; ++ip)
        EXPECT_NEAR(p.intensity(it * np + ip), p.intensity(it * np + (np - ip)), 1e-10 * peak);
  }
}

TEST(FarField, EmptyGridRejected) {
  const auto m = build_strip_chain(1, kHalfWave5GHz, 1e-3, 10);
  EXPECT_THROW(far_field(m, Eigen::VectorXcd::Ones(9), 5e9, SphereGrid{}), ValidationError);
  EXPECT_THROW(far_field(m, Eigen::VectorXcd::Ones(8), 5e9, SphereGrid::regular(5, 5)), ValidationError);
}

TEST(RadiatedPower, ClosedForms) {
  FarFieldPattern p;
  p.grid = SphereGrid::regular(5, 5);
  p.e_theta.assign(p.grid.size(), 0.0);
  p.e_phi.assign(p.grid.size(), 0.0);
  EXPECT_EQ(radiated_power(p), 0.0);
  p.e_theta.assign(p.grid.size(), 1.0);
  EXPECT_NEAR(radiated_power(p), 4.0 * kPi / (2.0 * kEta0), 1e-3 * 4.0 * kPi / (2.0 * kEta0));
  EXPECT_NEAR(4.0 * kPi / (2.0 * kEta0), 0.01667, 1e-5);
}

TEST(RadiatedPower, NeedsFullDenseSphere) {
  FarFieldPattern p;
  p.grid = SphereGrid::regular(10, 10);
  p.e_theta.assign(p.grid.size(), 1.0);
  p.e_phi.assign(p.grid.size(), 0.0);
  EXPECT_THROW(radiated_power(p), ValidationError);
  p.grid = SphereGrid::cut({0, 45, 90}, {0, 90});
  p.e_theta.assign(p.grid.size(), 1.0);
  p.e_phi.assign(p.grid.size(), 0.0);
  EXPECT_THROW(radiated_power(p), ValidationError);
}

TEST(RadiatedPower, MatchesQuadraticForm) {
  const auto m = build_strip_chain(2, kHalfWave5GHz, 1e-3, 20);
  const double f = 6e9;
  const auto z = assemble_impedance(m, f);
  const auto s = solve_modes(z, 4);
  const auto g = SphereGrid::regular(5, 5);
  for (const auto& mode : s.modes) {
    const double expect = 0.5 * mode.current.dot(z.R() * mode.current);
    EXPECT_NEAR(expect, 0.5, 1e-9);
    EXPECT_NEAR(radiated_power(far_field(m, mode.current.cast<cplx>(), f, g)), expect, 0.02 * expect);
  }
}

TEST(RadiatedPower, CharacteristicFieldsAreOrthogonal) {
  const auto m = build_strip_chain(2, kHalfWave5GHz, 1e-3, 20);
  const double f = 6e9;
  const auto s = solve_modes(assemble_impedance(m, f), 4);
  const auto g = SphereGrid::regular(5, 5);
  std::vector<FarFieldPattern> p;
  for (const auto& mode : s.modes) p.push_back(far_field(m, mode.current.cast<cplx>(), f, g));
  for (std::size_t a = 0; a < p.size(); ++a)
    for (std::size_t b = a + 1; b < p.size(); ++b) {
      const double aa = std::abs(pattern_inner_product(p[a], p[a]));
      const double bb = std::abs(pattern_inner_product(p[b], p[b]));
      EXPECT_LE(std::abs(pattern_inner_product(p[a], p[b])), 0.05 * std::sqrt(aa * bb));
    }
}

TEST(InteriorExtrema, PlateauCountsOnce) {
  const std::vector<double> v = {5, 4, 1, 1, 1, 4, 5, 3, 0.5, 3, 5};
  const auto mins = interior_extrema(v, Extremum::Minimum, 0.3);
  ASSERT_EQ(mins.size(), 2u);
  EXPECT_EQ(mins[0], 3u);
  EXPECT_EQ(mins[1], 8u);
  // Runs touching either end are ignored.
  EXPECT_TRUE(interior_extrema({1, 1, 3, 5}, Extremum::Minimum, 0.5).empty());
}

TEST(InteriorExtrema, ProminenceRejectsRipple) {
  const std::vector<double> v = {0, 5, 9, 8.99, 9, 5, 0};
  EXPECT_EQ(interior_extrema(v, Extremum::Maximum, 0.1).size(), 2u);
  EXPECT_EQ(interior_extrema(v, Extremum::Maximum, 0.1, 0.05).size(), 1u);
}

TEST(CurrentNulls, AnalyticSine) {
  LineFieldSamples l;
  const double L = 1.0;
  for (int i = 0; i <= 200; ++i) {
    l.s.push_back(L * i / 200.0);
    l.magnitude.push_back(std::abs(std::sin(2.0 * kPi * l.s.back() / L)));
  }
  EXPECT_EQ(count_current_nulls(l), 1);
  const auto idx = interior_extrema(l.magnitude, Extremum::Minimum, 0.1);
  EXPECT_DOUBLE_EQ(l.s[idx.at(0)], 0.5);
}

TEST(CurrentNulls, DipoleFirstModeHasNone) {
  const auto m = build_strip_chain(1, kHalfWave5GHz, 1e-3, 20);
  const auto s = solve_modes(assemble_impedance(m, 4.62e9), 1);
  EXPECT_EQ(count_current_nulls(current_samples(m, s.modes[0].current.cast<cplx>())), 0);
}

TEST(CurrentNulls, Preconditions) {
  LineFieldSamples few{{0, 1, 2}, {0, 1, 0}};
  EXPECT_THROW(count_current_nulls(few), ValidationError);
  LineFieldSamples zero;
  zero.s.assign(60, 0.0);
  zero.magnitude.assign(60, 0.0);
  EXPECT_THROW(count_current_nulls(zero), ValidationError);
  LineFieldSamples ok;
  for (int i = 0; i < 60; ++i) {
    ok.s.push_back(i);
    ok.magnitude.push_back(1.0);
  }
  EXPECT_THROW(count_current_nulls(ok, 0.0), ValidationError);
  EXPECT_THROW(count_current_nulls(ok, 0.5), ValidationError);
}

TEST(CurrentSamples, PositionsIncreaseWithinLength) {
  const auto m = build_strip_chain(2, kHalfWave5GHz, 1e-3, 20);
  const auto l = current_samples(m, Eigen::VectorXcd::Ones(basis_count(m)));
  for (std::size_t i = 1; i < l.s.size(); ++i) EXPECT_GT(l.s[i], l.s[i - 1]);
  EXPECT_DOUBLE_EQ(l.s.front(), 0.0);
  EXPECT_NEAR(l.s.back(), m.total_arc_length(), 1e-15);
  EXPECT_EQ(l.magnitude.front(), 0.0);
  EXPECT_EQ(l.magnitude.back(), 0.0);
}

TEST(NearField, ZeroCurrentHasNoMaxima) {
  const auto m = build_strip_chain(2, kHalfWave5GHz, 1e-3, 20);
  EXPECT_EQ(near_field_maxima(m, Eigen::VectorXcd::Zero(basis_count(m)), 5e9), 0);
}

TEST(NearField, StandingWaveHasCentralMaximum) {
  const auto m = build_strip_chain(2, kHalfWave5GHz, 1e-3, 20);
  const double L = m.total_arc_length();
  const auto c = coefficients_from(m, [&](double s) { return std::sin(2.0 * kPi * s / L); });
  EXPECT_EQ(near_field_maxima(m, c, 5e9), 1);
  const auto line = near_field_line(m, c, 5e9, 2e-3);
  const auto peaks = interior_extrema(line.magnitude, Extremum::Maximum, 0.1, 0.05);
  bool central = false;
  for (auto i : peaks) central = central || std::abs(line.s[i] - 0.5 * L) < 0.02 * L;
  EXPECT_TRUE(central);
}

TEST(NearField, MaximaMatchNullsOnModes) {
  const auto m = build_strip_chain(2, kHalfWave5GHz, 1e-3, 20);
  for (double f : {2.4e9, 7.2e9}) {
    const auto s = solve_modes(assemble_impedance(m, f), 1);
    const Eigen::VectorXcd j = s.modes[0].current.cast<cplx>();
    EXPECT_EQ(near_field_maxima(m, j, f), count_current_nulls(current_samples(m, j))) << f;
  }
}

TEST(NearField, OffsetInsideWireRejected) {
  const auto m = build_strip_chain(1, kHalfWave5GHz, 2e-3, 20);
  EXPECT_THROW(near_field_maxima(m, Eigen::VectorXcd::Ones(19), 5e9, 0.4e-3), ValidationError);
}

TEST(PatternCsv, RoundTrip) {
  const auto m = build_strip_chain(1, kHalfWave5GHz, 1e-3, 20);
  const auto p = far_field(m, Eigen::VectorXcd::Ones(19), 5e9, SphereGrid::regular(30, 45));
  const auto text = pattern_to_csv(p);
  EXPECT_EQ(text.rfind("theta_deg,phi_deg,re_etheta,im_etheta,re_ephi,im_ephi\n", 0), 0u);
  const auto q = pattern_from_csv(text, 5e9);
  EXPECT_EQ(q.grid, p.grid);
  EXPECT_EQ(pattern_to_csv(q), text);
  for (std::size_t i = 0; i < p.grid.size(); ++i) EXPECT_NEAR(std::abs(q.e_theta[i] - p.e_theta[i]), 0.0, 1e-7 * std::abs(p.e_theta[i]) + 1e-300);
}

TEST(PatternCsv, Errors) {
  EXPECT_THROW(pattern_from_csv("a,b\n", 1e9), IoError);
  EXPECT_THROW(pattern_from_csv("theta_deg,phi_deg,re_etheta,im_etheta,re_ephi,im_ephi\n0,0,1,0,0\n", 1e9), IoError);
  EXPECT_THROW(pattern_from_csv("theta_deg,phi_deg,re_etheta,im_etheta,re_ephi,im_ephi\n0,0,1,0,0,0\n0,90,1,0,0,0\n90,0,1,0,0,0\n", 1e9),
               IoError);
}

TEST(LineSamplesCsv, Format) {
  LineFieldSamples l{{0.0, 0.5}, {1.0, 2.0}};
  EXPECT_EQ(line_samples_to_csv(l), "s_m,magnitude\n0.00000000e+00,1.00000000e+00\n5.00000000e-01,2.00000000e+00\n");
}
