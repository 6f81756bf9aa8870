#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "pjn/field.hpp"
#include "pjn/field_io.hpp"
#include "pjn/testing/oracles.hpp"

using namespace pjn;
using pjn::testing::monte_carlo_mean;
using pjn::testing::naive_integral;

namespace {

const GeometryParams kGeo(1, 2.0);

GridField two_by_two() { return GridField(Box({0, 0}, {1, 1}), {2, 2}, {1, 2, 3, 4}, kGeo); }

GridField random_field(std::uint64_t seed, std::vector<std::size_t> res = {7, 13}) {
  return generate("random_cells", {}, Box({-1, -1}, {1, 1}), res, kGeo, seed);
}

}  // namespace

TEST(GridField, BoxAverageWhole) { EXPECT_DOUBLE_EQ(two_by_two().box_average(Box({0, 0}, {1, 1})), 2.5); }

TEST(GridField, BoxAverageLeftColumn) {
  // x-major: cells (x0,t0)=1 (x0,t1)=2 (x1,t0)=3 (x1,t1)=4
  EXPECT_DOUBLE_EQ(two_by_two().box_average(Box({0, 0}, {0.5, 1})), 1.5);
}

TEST(GridField, ConstantAverage) {
  const auto f = generate("constant", {.a = -3.25}, Box({-1, -1}, {1, 1}), {5, 9}, kGeo, 0);
  EXPECT_DOUBLE_EQ(f.box_average(Box({-0.3, 0.1}, {0.77, 0.9})), -3.25);
}

TEST(GridField, BoxOutsideOrDegenerate) {
  const auto f = two_by_two();
  EXPECT_THROW(f.box_average(Box({0, 0}, {1.5, 1})), DomainError);
  EXPECT_THROW(f.box_average(Box({0, 0.5}, {1, 0.5})), DegenerateInput);
}

TEST(GridField, ConstructorValidates) {
  EXPECT_THROW(GridField(Box({0, 0}, {1, 1}), {2, 2}, {1, 2, 3}, kGeo), RangeError);
  EXPECT_THROW(GridField(Box({0, 0}, {1, 1}), {2, 0}, {}, kGeo), RangeError);
  EXPECT_THROW(GridField(Box({0, 0}, {1, 1}), {1, 1}, {NAN}, kGeo), RangeError);
  EXPECT_THROW(GridField(Box({0, 0, 0}, {1, 1, 1}), {1, 1, 1}, {0}, kGeo), RangeError);
}

TEST(GridField, TruncatedPowerAverage) {
  const Box all({-1, -1}, {1, 1});
  const auto five = generate("constant", {.a = 5}, all, {3, 3}, kGeo, 0);
  for (double r : {0.25, 0.5, 1.0}) {
    EXPECT_EQ(five.truncated_power_average(all, 5.0, r, Sign::plus), 0.0);
    EXPECT_EQ(five.truncated_power_average(all, 5.0, r, Sign::minus), 0.0);
  }
  const auto seven = generate("constant", {.a = 7}, all, {3, 3}, kGeo, 0);
  EXPECT_DOUBLE_EQ(seven.truncated_power_average(all, 5.0, 1.0, Sign::plus), 2.0);
  EXPECT_DOUBLE_EQ(seven.truncated_power_average(all, 5.0, 0.5, Sign::plus), std::sqrt(2.0));
  const auto neg = generate("constant", {.a = -2}, all, {3, 3}, kGeo, 0);
  EXPECT_DOUBLE_EQ(neg.truncated_power_average(all, 0.0, 1.0, Sign::minus), 2.0);
}

TEST(GridField, LevelSetMeasure) {
  const GridField f(Box({0, 0}, {1, 1}), {1, 2}, {1, 3}, kGeo);
  const Box all({0, 0}, {1, 1});
  EXPECT_DOUBLE_EQ(f.level_set_measure(all, 0.0, 2.0, Sign::plus), 0.5);
  EXPECT_DOUBLE_EQ(f.level_set_measure(all, 0.0, 3.0, Sign::plus), 0.0);
  EXPECT_DOUBLE_EQ(f.level_set_measure(all, 0.0, 1e-12, Sign::plus), 1.0);
  EXPECT_DOUBLE_EQ(f.level_set_measure(all, 4.0, 2.0, Sign::minus), 0.5);
}

TEST(GridField, ReflectTime) {
  const Box all({-1, -1}, {1, 1});
  const auto down = generate("time_step", {.jump = 4, .nonincreasing = true}, all, {4, 8}, kGeo, 0);
  const auto up = reflect_time_field(down, false);
  const auto flipped = generate("time_step", {.jump = 4}, all, {4, 8}, kGeo, 0);
  EXPECT_EQ(up.values(), flipped.values());
  const auto f = random_field(3);
  EXPECT_EQ(reflect_time_field(reflect_time_field(f, true), true).values(), f.values());
}

TEST(Generate, Presets) {
  const Box all({-1, -1}, {1, 1});
  const auto z = generate("constant", {}, all, {4, 4}, kGeo, 0);
  for (double v : z.values()) EXPECT_EQ(v, 0.0);
  const auto step = generate("time_step", {.jump = 4, .nonincreasing = true}, all, {1, 4}, kGeo, 0);
  EXPECT_EQ(step.values(), (std::vector<double>{2, 2, -2, -2}));
  EXPECT_EQ(random_field(1).values(), random_field(1).values());
  EXPECT_NE(random_field(1).values(), random_field(2).values());
  EXPECT_THROW(generate("nope", {}, all, {2, 2}, kGeo, 0), RangeError);
  const auto spike = generate("log_spike", {.cap = 6}, all, {8, 8}, kGeo, 0);
  for (double v : spike.values()) EXPECT_LE(v, 6.0);
}

TEST(FieldIO, RoundTrip) {
  const auto f = random_field(5);
  std::stringstream ss;
  write_field(ss, f);
  const auto g = read_field(ss);
  EXPECT_EQ(g.values(), f.values());
  EXPECT_EQ(g.resolution(), f.resolution());
  EXPECT_EQ(g.domain().lo, f.domain().lo);
  EXPECT_EQ(g.params().p, f.params().p);
}

TEST(FieldIO, MalformedInputs) {
  auto parse = [](const std::string& s) {
    std::stringstream ss(s);
    return read_field(ss);
  };
  EXPECT_THROW(parse(""), FormatError);
  EXPECT_THROW(parse("not json\n"), FormatError);
  EXPECT_THROW(parse("{\"n\": 1}\n"), FormatError);
  std::stringstream ss;
  write_field(ss, two_by_two());
  std::string s = ss.str();
  EXPECT_THROW(parse(s.substr(0, s.size() - 3)), FormatError);
  EXPECT_THROW(parse(s + "x"), FormatError);
}

// Prefix-sum integrals match cell-by-cell summation on arbitrary boxes.
TEST(GridField, IntegralMatchesNaive) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto f = random_field(seed, {5 + seed, 11 + 2 * seed});
    for (int k = 0; k < 50; ++k) {
      double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
      const Box box({std::min(a, b), std::min(c, d)}, {std::max(a, b) + 1e-6, std::max(c, d) + 1e-6});
      EXPECT_NEAR(f.integral(box), naive_integral(f, box), 1e-12);
    }
    EXPECT_NEAR(f.integral(f.domain()), naive_integral(f, f.domain()), 1e-12);
  }
}

// Averages sit within a few standard errors of a Monte Carlo estimate.
TEST(GridField, AverageMatchesMonteCarlo) {
  const auto f = random_field(9, {16, 16});
  const Box box({-0.6, -0.2}, {0.9, 0.7});
  const auto mc = monte_carlo_mean(f, box, 200000, 42);
  EXPECT_NEAR(f.box_average(box), mc.mean, 5.0 * mc.stderr_ + 1e-12);
}

// Linearity of the integral in the field values.
TEST(GridField, IntegralIsLinear) {
  const auto f = random_field(1), g = random_field(2);
  std::vector<double> sum(f.values().size());
  for (std::size_t k = 0; k < sum.size(); ++k) sum[k] = 2.0 * f.values()[k] - 3.0 * g.values()[k];
  const GridField h(f.domain(), f.resolution(), sum, f.params());
  const Box box({-0.4, -0.9}, {0.3, 0.2});
  EXPECT_NEAR(h.integral(box), 2.0 * f.integral(box) - 3.0 * g.integral(box), 1e-12);
}
