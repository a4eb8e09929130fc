#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cmaw/geometry.hpp"

using namespace cmaw;

namespace {

constexpr double kHalfWave5GHz = kC0 / (2.0 * 5e9);  // 29.9792458 mm

double polyline_length(const WireMesh& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.segment_count(); ++i) s += m.segment_length(i);
  return s;
}

}  // namespace

TEST(StripChain, SingleSectionLength) {
  const auto m = build_strip_chain(1, kHalfWave5GHz, 2e-3, 20);
  EXPECT_NEAR(polyline_length(m), 29.9792458e-3, 1e-15);
  EXPECT_NEAR(m.total_arc_length(), 29.9792458e-3, 1e-15);
  EXPECT_EQ(m.segment_count(), 20u);
  EXPECT_FALSE(m.closed);
}

TEST(StripChain, EightSectionsLength) {
  const auto m = build_strip_chain(8, kHalfWave5GHz, 2e-3, 20);
  EXPECT_NEAR(polyline_length(m), 239.8339664e-3, 1e-12);
  EXPECT_NEAR(m.arc.back(), m.total_arc_length(), 1e-9 * m.total_arc_length());
}

TEST(StripChain, EquivalentRadiusIsQuarterWidth) {
  EXPECT_DOUBLE_EQ(build_strip_chain(1, kHalfWave5GHz, 2e-3, 10).wire_radius, 0.5e-3);
  EXPECT_DOUBLE_EQ(build_strip_chain(1, kHalfWave5GHz, 1e-3, 10).wire_radius, 0.25e-3);
}

TEST(StripChain, CentredAlongX) {
  const auto m = build_strip_chain(2, 0.03, 1e-3, 10);
  EXPECT_NEAR(m.nodes.front().x(), -0.03, 1e-15);
  EXPECT_NEAR(m.nodes.back().x(), 0.03, 1e-15);
  for (const auto& p : m.nodes) {
    EXPECT_EQ(p.y(), 0.0);
    EXPECT_EQ(p.z(), 0.0);
  }
}

TEST(StripChain, UniformSegments) {
  const auto m = build_strip_chain(8, 0.025918, 1e-3, 20);
  const double mean = m.mean_segment_length();
  for (std::size_t s = 0; s < m.segment_count(); ++s) EXPECT_NEAR(m.segment_length(s), mean, 1e-12);
}

TEST(StripChain, RejectsBadInput) {
  EXPECT_THROW(build_strip_chain(0, 0.03, 1e-3, 10), ValidationError);
  EXPECT_THROW(build_strip_chain(1, -0.03, 1e-3, 10), ValidationError);
  EXPECT_THROW(build_strip_chain(1, 0.03, 0.0, 10), ValidationError);
  EXPECT_THROW(build_strip_chain(1, 0.03, 1e-3, 3), ValidationError);
}

TEST(StripChain, DensityRule) {
  // 10 segments per half-wave section is lambda/20 at exactly 5 GHz.
  EXPECT_NO_THROW(build_strip_chain(1, kHalfWave5GHz, 1e-3, 10, 5e9));
  EXPECT_THROW(build_strip_chain(1, kHalfWave5GHz, 1e-3, 10, 10e9), ValidationError);
  EXPECT_NO_THROW(build_strip_chain(8, kHalfWave5GHz, 1e-3, 20, 10e9));
}

TEST(Bend, PlanarIsIdentity) {
  const auto m = build_strip_chain(8, kHalfWave5GHz, 1e-3, 20);
  const auto b = bend_to_cylinder(m, BendSpec::planar());
  ASSERT_EQ(b.nodes.size(), m.nodes.size());
  for (std::size_t i = 0; i < m.nodes.size(); ++i) EXPECT_EQ(b.nodes[i], m.nodes[i]);
}

TEST(Bend, SubtendedAngle) {
  const auto m = build_strip_chain(8, kHalfWave5GHz, 1e-3, 20);
  const double rc = 0.1;
  const auto b = bend_to_cylinder(m, BendSpec::radius(rc));
  const Point3 axis(0.0, -rc, 0.0);
  const Point3 a = b.nodes.front() - axis;
  const Point3 c = b.nodes.back() - axis;
  const double angle = std::acos(a.dot(c) / (a.norm() * c.norm()));
  EXPECT_NEAR(angle, 2.398339664, 1e-9);
  for (const auto& p : b.nodes) EXPECT_NEAR((p - axis).norm(), rc, 1e-12);
}

TEST(Bend, ArcLengthPreserved) {
  const auto m = build_strip_chain(8, kHalfWave5GHz, 1e-3, 20);
  for (double rc : {0.2, 0.15, 0.1, 0.05, 0.04}) {
    const auto b = bend_to_cylinder(m, BendSpec::radius(rc));
    EXPECT_EQ(b.arc, m.arc);
    // Each chord is 2 Rc sin(ds / 2Rc): shrink bounded by 1 - sinc.
    for (std::size_t s = 0; s < b.segment_count(); ++s) {
      const double ds = m.segment_length(s);
      const double expect = 2.0 * rc * std::sin(ds / (2.0 * rc));
      EXPECT_NEAR(b.segment_length(s), expect, 1e-15);
      EXPECT_LE(1.0 - b.segment_length(s) / ds, 1.0 - std::sin(ds / rc) / (ds / rc) + 1e-15);
    }
  }
}

TEST(Bend, LoopClosure) {
  const auto m = build_strip_chain(8, kHalfWave5GHz, 1e-3, 20);
  const double L = m.total_arc_length();
  const auto loop = bend_to_cylinder(m, BendSpec::radius(L / (2.0 * kPi)));
  EXPECT_TRUE(is_loop(loop, 1e-6));
  EXPECT_FALSE(is_loop(m, 1e-6));
  EXPECT_FALSE(is_loop(bend_to_cylinder(m, BendSpec::radius(0.1)), 1e-6));
  EXPECT_THROW(is_loop(m, 0.0), ValidationError);
}

TEST(Bend, OverWrapRejected) {
  const auto m = build_strip_chain(8, kHalfWave5GHz, 1e-3, 20);
  const double L = m.total_arc_length();
  EXPECT_THROW(bend_to_cylinder(m, BendSpec::radius(0.9 * L / (2.0 * kPi))), ValidationError);
  EXPECT_NO_THROW(bend_to_cylinder(m, BendSpec::radius(L / (2.0 * kPi))));
}

TEST(Bend, RejectsNonStraightInput) {
  const auto m = build_strip_chain(2, 0.03, 1e-3, 10);
  const auto b = bend_to_cylinder(m, BendSpec::radius(0.1));
  EXPECT_THROW(bend_to_cylinder(b, BendSpec::radius(0.1)), ValidationError);
}

TEST(Bend, RejectsNonPositiveRadius) {
  EXPECT_THROW(BendSpec::radius(0.0), ValidationError);
  EXPECT_THROW(BendSpec::radius(-1.0), ValidationError);
  EXPECT_THROW(BendSpec::radius(std::nan("")), ValidationError);
}

TEST(Bend, ContinuousAtLargeRadius) {
  const auto m = build_strip_chain(8, kHalfWave5GHz, 1e-3, 20);
  const auto b = bend_to_cylinder(m, BendSpec::radius(1e6));
  for (std::size_t i = 0; i < m.nodes.size(); ++i) EXPECT_LT((b.nodes[i] - m.nodes[i]).norm(), 1e-6);
}

TEST(Bend, UnrollRecoversPlanar) {
  const auto m = build_strip_chain(8, kHalfWave5GHz, 1e-3, 20);
  for (double rc : {0.2, 0.1, 0.05, 0.04}) {
    const auto u = unroll_from_cylinder(bend_to_cylinder(m, BendSpec::radius(rc)), BendSpec::radius(rc));
    for (std::size_t i = 0; i < m.nodes.size(); ++i) EXPECT_LT((u.nodes[i] - m.nodes[i]).norm(), 1e-12);
  }
}

TEST(Bend, Labels) {
  EXPECT_EQ(BendSpec::planar().label(), "planar");
  EXPECT_EQ(BendSpec::radius(0.05).label(), "50mm");
  EXPECT_EQ(BendSpec::radius(0.2).label(), "200mm");
}

TEST(InPlaneNormal, PerpendicularToSegment) {
  const auto b = bend_to_cylinder(build_strip_chain(4, 0.03, 1e-3, 10), BendSpec::radius(0.05));
  for (std::size_t s = 0; s < b.segment_count(); ++s) {
    const Point3 t = (b.segment_end(s) - b.segment_start(s)).normalized();
    const Point3 n = in_plane_normal(b, s);
    EXPECT_NEAR(n.norm(), 1.0, 1e-14);
    EXPECT_NEAR(n.dot(t), 0.0, 1e-14);
    EXPECT_NEAR(n.z(), 0.0, 1e-14);
  }
}

TEST(MeshCsv, RoundTrip) {
  const auto m = bend_to_cylinder(build_strip_chain(3, 0.03, 1e-3, 10), BendSpec::radius(0.07));
  const auto text = mesh_to_csv(m);
  EXPECT_EQ(text.substr(0, 12), "index,x,y,z\n");
  const auto r = mesh_from_csv(text, m.wire_radius, 3);
  ASSERT_EQ(r.nodes.size(), m.nodes.size());
  for (std::size_t i = 0; i < m.nodes.size(); ++i) EXPECT_LT((r.nodes[i] - m.nodes[i]).norm(), 1e-10);
  EXPECT_EQ(mesh_to_csv(r), text);
}

TEST(MeshCsv, RandomRoundTripIsStable) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    WireMesh m;
    m.wire_radius = 1e-4;
    Point3 p(0, 0, 0);
    for (int i = 0; i < 12; ++i) {
      m.nodes.push_back(p);
      p += Point3(u(rng), u(rng), u(rng)) * 0.01 + Point3(0.02, 0, 0);
    }
    const auto once = mesh_to_csv(m);
    EXPECT_EQ(mesh_to_csv(mesh_from_csv(once, 1e-4, 1)), once);
  }
}

TEST(MeshCsv, Errors) {
  EXPECT_THROW(mesh_from_csv("x,y\n0,1\n", 1e-4, 1), IoError);
  EXPECT_THROW(mesh_from_csv("index,x,y,z\n0,0,0,0\n", 1e-4, 1), IoError);
  EXPECT_THROW(mesh_from_csv("index,x,y,z\n0,0,0,0\n1,abc,0,0\n", 1e-4, 1), IoError);
  EXPECT_THROW(mesh_from_csv("index,x,y,z\n0,0,0,0\n2,1,0,0\n", 1e-4, 1), IoError);
  EXPECT_THROW(mesh_from_csv("index,x,y,z\n0,0,0,0\n1,0,0,0\n", 1e-4, 1), ValidationError);
}
