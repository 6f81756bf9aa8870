#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "pjn/candidates.hpp"
#include "pjn/field_io.hpp"
#include "pjn/packing.hpp"
#include "pjn/testing/oracles.hpp"

using namespace pjn;
using pjn::testing::exhaustive_packing;
using pjn::testing::naive_family_value_r1;

namespace {

const GeometryParams kGeo(1, 2.0);
const Box kUnit({-1, -1}, {1, 1});

GridField random_field(std::uint64_t seed) { return generate("random_cells", {}, kUnit, {8, 32}, kGeo, seed); }

std::vector<ParabolicRectangle> disjoint_family() {
  std::vector<ParabolicRectangle> fam;
  for (double x : {-0.75, -0.25, 0.25, 0.75})
    for (double t : {-0.75, -0.25, 0.25, 0.75}) fam.emplace_back(std::vector<double>{x}, t, 0.25, kGeo);
  return fam;
}

}  // namespace

TEST(Candidates, SingleFit) {
  const auto f = random_field(0);
  const auto c = enumerate_candidates(f, kUnit, {.scales = 1});
  ASSERT_EQ(c.size(), 1U);
  EXPECT_DOUBLE_EQ(c[0].edge(), 1.0);
}

TEST(Candidates, FinerStrideGivesMore) {
  const auto f = random_field(0);
  std::size_t last = 0;
  for (std::size_t s : {8U, 4U, 2U, 1U}) {
    const auto c = enumerate_candidates(f, kUnit, {.scales = 3, .stride = {s, 4 * s}});
    EXPECT_GE(c.size(), last);
    last = c.size();
    for (auto& R : c) EXPECT_TRUE(contains(kUnit, R.box()));
  }
}

TEST(PjnNorm, ConstantIsZero) {
  const auto f = generate("constant", {.a = 4}, kUnit, {4, 4}, kGeo, 0);
  const auto res = pjnq_norm(f, enumerate_candidates(f, kUnit, {}), JnParams(TimeLag(0.0), 1.0, 2.0), PackingMode::greedy);
  EXPECT_EQ(res.norm, 0.0);
  EXPECT_TRUE(res.packing.indices.empty());
}

TEST(PjnNorm, SingleCandidateStep) {
  const auto f = generate("time_step", {.jump = 4}, kUnit, {8, 16}, kGeo, 0);
  const ParabolicRectangle R({0.0}, 0.0, 1.0, kGeo);
  const auto res = pjnq_norm(f, {R}, JnParams(TimeLag(0.0), 1.0, 2.0), PackingMode::exact);
  EXPECT_DOUBLE_EQ(res.norm, std::sqrt(32.0));
}

TEST(PjnNorm, ModesAndLimits) {
  EXPECT_THROW(parse_packing_mode("fast"), RangeError);
  EXPECT_EQ(resolve_mode(PackingMode::automatic, 20), PackingMode::exact);
  EXPECT_EQ(resolve_mode(PackingMode::automatic, 21), PackingMode::greedy);
  std::vector<double> w(65, 1.0);
  std::vector<std::vector<bool>> conflict(65, std::vector<bool>(65, false));
  EXPECT_THROW(exact_packing(w, conflict), RangeError);
  EXPECT_THROW(JnParams(TimeLag(0.0), 1.0, 1.0), Error);
  EXPECT_THROW(JnParams(TimeLag(0.0), 3.0, 2.0), Error);
}

// Branch and bound equals exhaustive enumeration; greedy never beats it.
TEST(Packing, ExactMatchesExhaustive) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 3 + trial % 14;
    std::vector<double> w(n);
    for (auto& x : w) x = u(rng) < 0.1 ? 0.0 : u(rng);
    std::vector<std::vector<bool>> conflict(n, std::vector<bool>(n, false));
    const double density = 0.1 + 0.8 * u(rng);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) conflict[i][j] = conflict[j][i] = u(rng) < density;
    const auto ex = exact_packing(w, conflict);
    const auto gr = greedy_packing(w, conflict);
    EXPECT_NEAR(ex.total, exhaustive_packing(w, conflict), 1e-12);
    EXPECT_LE(gr.total, ex.total + 1e-12);
    for (std::size_t a = 0; a < ex.indices.size(); ++a)
      for (std::size_t b = a + 1; b < ex.indices.size(); ++b) EXPECT_FALSE(conflict[ex.indices[a]][ex.indices[b]]);
  }
}

// Packing of real candidates: chosen rectangles are pairwise disjoint and the
// total equals the weights recomputed from scratch.
TEST(PjnNorm, PackingIsValid) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto f = random_field(seed);
    const auto cands = enumerate_candidates(f, kUnit, {.scales = 2, .stride = {4, 16}});
    ASSERT_LE(cands.size(), kExactMandatory);
    const JnParams jp(TimeLag(0.25), 1.0, 2.0);
    const auto res = pjnq_norm(f, cands, jp, PackingMode::automatic);
    EXPECT_EQ(res.mode, PackingMode::exact);
    std::vector<ParabolicRectangle> fam;
    for (auto i : res.packing.indices) fam.push_back(cands[i]);
    EXPECT_TRUE(pairwise_disjoint(fam));
    EXPECT_NEAR(res.packing.total, naive_family_value_r1(f, fam, jp.lag, jp.q), 1e-10);
    EXPECT_NEAR(res.norm, std::pow(res.packing.total, 0.5), 1e-12);
  }
}

TEST(SplitValues, Bounds) {
  const auto fam = disjoint_family();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto f = random_field(seed);
    for (double r : {0.5, 1.0}) {
      const JnParams jp(TimeLag(0.2), r, 3.0);
      const auto s = split_values(f, fam, jp);
      EXPECT_LE(s.v_plus, s.v_combined * (1 + 1e-12));
      EXPECT_LE(s.v_minus, s.v_combined * (1 + 1e-12));
      EXPECT_LE(s.v_combined, std::pow(2.0, jp.q / r) * (s.v_plus + s.v_minus) * (1 + 1e-12));
    }
  }
  const auto z = generate("constant", {.a = 1}, kUnit, {4, 4}, kGeo, 0);
  const auto s = split_values(z, fam, JnParams(TimeLag(0.0), 1.0, 2.0));
  EXPECT_EQ(s.v_plus + s.v_minus + s.v_combined, 0.0);
}

TEST(QLimit, NondecreasingWithMaxLimit) {
  const auto fam = disjoint_family();
  const std::vector<double> qs{1.1, 1.5, 2, 4, 8, 16, 64, 256};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto prof = q_limit_profile(random_field(seed), fam, TimeLag(0.0), 1.0, qs);
    for (std::size_t k = 1; k < qs.size(); ++k) EXPECT_GE(prof.values[k], prof.values[k - 1] * (1 - 1e-12));
    EXPECT_LE(prof.values.back(), prof.limit * (1 + 1e-12));
    EXPECT_GT(prof.limit, 0.0);
  }
  const auto z = generate("constant", {.a = 1}, kUnit, {4, 4}, kGeo, 0);
  for (double v : q_limit_profile(z, fam, TimeLag(0.0), 1.0, qs).values) EXPECT_EQ(v, 0.0);
  auto overlapping = fam;
  overlapping.push_back(fam[0]);
  EXPECT_THROW(q_limit_profile(z, overlapping, TimeLag(0.0), 1.0, qs), RangeError);
}

TEST(Embedding, HoldsWithRatio) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto f = seed == 0 ? generate("time_step", {.jump = 4}, kUnit, {8, 32}, kGeo, 0) : random_field(seed);
    const auto cands = enumerate_candidates(f, kUnit, {.scales = 2, .stride = {4, 16}});
    const auto rep = pbmo_embedding_check(f, cands, JnParams(TimeLag(0.0), 1.0, 2.0));
    EXPECT_TRUE(rep.checks.exact_pass());
    ASSERT_TRUE(rep.exact_norm.has_value());
    EXPECT_FALSE(rep.checks.checks[0].note.empty());
  }
}

// Algebra of a fixed packing: translation is exact, the sum obeys the
// quasi-triangle inequality, scaling is homogeneous and a < 0 swaps to the
// time-reflected family.
TEST(PackingValue, Algebra) {
  const auto fam = disjoint_family();
  std::vector<ParabolicRectangle> reflected;
  for (auto& R : fam) reflected.push_back(R.reflect_time(0.0));
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto f = random_field(seed), g = random_field(seed + 50);
    for (double r : {0.5, 1.0}) {
      const JnParams jp(TimeLag(0.3), r, 2.0);
      auto val = [&](const GridField& h, const std::vector<ParabolicRectangle>& fm) {
        return std::pow(packing_value(h, fm, jp), 1.0 / jp.q);
      };
      const double vf = val(f, fam), vg = val(g, fam);
      EXPECT_NEAR(val(f.transformed([](double v) { return v - 2.0; }), fam), vf, 1e-9 * vf);
      std::vector<double> sum(f.values().size());
      for (std::size_t k = 0; k < sum.size(); ++k) sum[k] = f.values()[k] + g.values()[k];
      const GridField h(f.domain(), f.resolution(), sum, f.params());
      const double K = std::max(std::pow(2.0, 1.0 / r - 1.0), std::pow(2.0, 1.0 - 1.0 / r));
      EXPECT_LE(val(h, fam), K * (vf + vg) * (1 + 1e-9));
      EXPECT_NEAR(val(f.transformed([](double v) { return 2.5 * v; }), fam), 2.5 * vf, 1e-9 * vf);
      const auto neg = reflect_time_field(f, false);
      EXPECT_NEAR(val(f.transformed([](double v) { return -1.5 * v; }), fam), 1.5 * val(neg, reflected), 1e-9 * vf);
    }
  }
}
