#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "pjn/geometry.hpp"

using namespace pjn;

namespace {

Box box2(double x0, double x1, double t0, double t1) { return Box({x0, t0}, {x1, t1}); }

}  // namespace

TEST(ParabolicRectangle, UpperPartWithLag) {
  const ParabolicRectangle R({0.0}, 0.0, 2.0, GeometryParams(1, 2.0));
  const Box up = R.upper_part(TimeLag(0.5));
  EXPECT_DOUBLE_EQ(up.lo[0], -2.0);
  EXPECT_DOUBLE_EQ(up.hi[0], 2.0);
  EXPECT_DOUBLE_EQ(up.t_lo(), 2.0);
  EXPECT_DOUBLE_EQ(up.t_hi(), 4.0);
  EXPECT_DOUBLE_EQ(up.measure(), 8.0);
  EXPECT_DOUBLE_EQ(R.part_measure(TimeLag(0.5)), 8.0);
}

TEST(ParabolicRectangle, LowerPartWithLag) {
  const ParabolicRectangle R({0.0}, 0.0, 2.0, GeometryParams(1, 2.0));
  const Box down = R.lower_part(TimeLag(0.5));
  EXPECT_DOUBLE_EQ(down.t_lo(), -4.0);
  EXPECT_DOUBLE_EQ(down.t_hi(), -2.0);
  EXPECT_DOUBLE_EQ(down.measure(), R.upper_part(TimeLag(0.5)).measure());
}

TEST(ParabolicRectangle, ZeroLagIsHalf) {
  const ParabolicRectangle R({0.3}, 1.0, 0.5, GeometryParams(1, 2.0));
  EXPECT_DOUBLE_EQ(R.upper_part(TimeLag(0.0)).t_lo(), 1.0);
  EXPECT_DOUBLE_EQ(R.upper_part(TimeLag(0.0)).t_hi(), 1.25);
  EXPECT_DOUBLE_EQ(R.lower_part(TimeLag(0.0)).t_hi(), 1.0);
}

TEST(ParabolicRectangle, NegativeLagOverlapsCenter) {
  for (int n : {1, 2, 3}) {
    const ParabolicRectangle R(std::vector<double>(n, 0.0), 0.0, 1.0, GeometryParams(n, 3.0));
    const Box up = R.upper_part(TimeLag(-0.5));
    EXPECT_DOUBLE_EQ(up.t_lo(), -0.5);
    EXPECT_DOUBLE_EQ(up.t_hi(), 1.0);
    EXPECT_NEAR(up.measure(), 1.5 * std::pow(2.0, n), 1e-12);
  }
}

TEST(ParabolicRectangle, DilateScalesTimeByPower) {
  const ParabolicRectangle R({0.0}, 0.0, 1.0, GeometryParams(1, 2.0));
  const Box b = R.dilate(5.0).box();
  EXPECT_DOUBLE_EQ(b.t_lo(), -25.0);
  EXPECT_DOUBLE_EQ(b.t_hi(), 25.0);
  EXPECT_DOUBLE_EQ(b.lo[0], -5.0);
}

TEST(ParabolicRectangle, RejectsBadInput) {
  EXPECT_THROW(ParabolicRectangle({0.0}, 0.0, 0.0, GeometryParams(1, 2.0)), RangeError);
  EXPECT_THROW(ParabolicRectangle({0.0, 0.0}, 0.0, 1.0, GeometryParams(1, 2.0)), RangeError);
  EXPECT_THROW(GeometryParams(1, 1.0), Error);
  EXPECT_THROW(TimeLag(1.0), Error);
  EXPECT_THROW(TimeLag(-1.0), Error);
}

TEST(ParabolicRectangle, WithTopPlacesTopSlice) {
  const auto R = ParabolicRectangle::with_top({0.0, 1.0}, 3.0, 0.5, GeometryParams(2, 3.0));
  EXPECT_DOUBLE_EQ(R.top(), 3.0);
  EXPECT_DOUBLE_EQ(R.bottom(), 3.0 - 2.0 * 0.125);
}

TEST(BoxOps, ReflectTime) {
  const Box r = reflect_time(box2(0, 1, 2, 4), 0.0);
  EXPECT_DOUBLE_EQ(r.lo[0], 0.0);
  EXPECT_DOUBLE_EQ(r.hi[0], 1.0);
  EXPECT_DOUBLE_EQ(r.t_lo(), -4.0);
  EXPECT_DOUBLE_EQ(r.t_hi(), -2.0);
}

TEST(BoxOps, Relations) {
  auto d = box_relations(box2(0, 1, 0, 1), box2(2, 3, 0, 1));
  EXPECT_EQ(d.relation, Relation::disjoint);
  EXPECT_EQ(d.intersection_measure, 0.0);
  auto c = box_relations(box2(0, 2, 0, 2), box2(0, 1, 0, 1));
  EXPECT_EQ(c.relation, Relation::contains);
  EXPECT_DOUBLE_EQ(c.intersection_measure, 1.0);
  auto i = box_relations(box2(0, 1, 0, 1), box2(0, 2, 0, 2));
  EXPECT_EQ(i.relation, Relation::inside);
  auto o = box_relations(box2(0, 2, 0, 1), box2(1, 3, 0, 1));
  EXPECT_EQ(o.relation, Relation::overlaps);
  EXPECT_DOUBLE_EQ(o.intersection_measure, 1.0);
}

TEST(BoxOps, TouchingHalfOpenBoxesAreDisjoint) {
  EXPECT_TRUE(disjoint(box2(0, 1, 0, 1), box2(1, 2, 0, 1)));
  EXPECT_TRUE(disjoint(box2(0, 1, 0, 1), box2(0, 1, 1, 2)));
  EXPECT_FALSE(disjoint(box2(0, 1, 0, 1), box2(0.5, 2, 0.5, 2)));
}

TEST(BoxOps, ToleranceAbsorbsRoundoff) {
  EXPECT_TRUE(disjoint(box2(0, 1, 0, 1), box2(1 - 1e-13, 2, 0, 1)));
  EXPECT_TRUE(contains(box2(0, 1, 0, 1), box2(-1e-13, 1, 0, 1 + 1e-13)));
  EXPECT_FALSE(contains(box2(0, 1, 0, 1), box2(-1e-3, 1, 0, 1)));
}

TEST(BoxOps, DimensionMismatchThrows) {
  EXPECT_THROW(box_relations(box2(0, 1, 0, 1), Box({0, 0, 0}, {1, 1, 1})), RangeError);
  EXPECT_THROW(Box({1.0, 0.0}, {0.0, 1.0}), Error);
}

// Intersection measure agrees with a sampled estimate and is symmetric.
TEST(BoxOps, IntersectionMeasureProperty) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    auto rb = [&] {
      double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
      return box2(std::min(a, b), std::max(a, b) + 1e-3, std::min(c, d), std::max(c, d) + 1e-3);
    };
    const Box a = rb(), b = rb();
    const double m = intersection_measure(a, b);
    EXPECT_DOUBLE_EQ(m, intersection_measure(b, a));
    EXPECT_LE(m, std::min(a.measure(), b.measure()) * (1 + 1e-12));
    double ox = std::max(0.0, std::min(a.hi[0], b.hi[0]) - std::max(a.lo[0], b.lo[0]));
    double ot = std::max(0.0, std::min(a.t_hi(), b.t_hi()) - std::max(a.t_lo(), b.t_lo()));
    EXPECT_NEAR(m, ox * ot, 1e-12);
    if (m > 1e-9) EXPECT_FALSE(disjoint(a, b));
  }
}

// Upper and lower parts of a rectangle are disjoint for every γ >= 0 and
// together fill (1-γ) of the rectangle.
TEST(ParabolicRectangle, PartsProperty) {
  for (double g : {0.0, 0.1, 0.5, 0.9}) {
    for (double p : {1.5, 2.0, 4.0}) {
      const ParabolicRectangle R({0.2, -0.1}, 0.3, 0.7, GeometryParams(2, p));
      const Box up = R.upper_part(TimeLag(g)), down = R.lower_part(TimeLag(g));
      EXPECT_TRUE(disjoint(up, down));
      EXPECT_TRUE(contains(R.box(), up));
      EXPECT_TRUE(contains(R.box(), down));
      EXPECT_NEAR(up.measure() + down.measure(), (1 - g) * R.measure(), 1e-12);
      EXPECT_NEAR(reflect_time(up, R.center_t()).t_lo(), down.t_lo(), 1e-12);
    }
  }
}
