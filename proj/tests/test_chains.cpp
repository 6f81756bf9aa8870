#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "pjn/chains.hpp"
#include "pjn/field_io.hpp"

using namespace pjn;

namespace {

const Box kUnit({-1, -1}, {1, 1});

// m = 4 on the unit rectangle with p = 4; chains stay short.
const ChainParams kP4(0.09, 0.1, 0.09, 0.09, 2.0, 1.0);

ParabolicRectangle unit_R0(double p) { return ParabolicRectangle({0.0}, 0.0, 1.0, GeometryParams(1, p)); }

UGrid grid_for(double p, const ChainParams& P) {
  return UGrid(unit_R0(p), P.rho, chain_m(p, P.alpha, P.rho, P.sigma).m, P.alpha);
}

GridField field(const std::string& preset, double p, std::uint64_t seed = 0) {
  return generate(preset, {.a = 1.25, .jump = 4, .nonincreasing = true}, kUnit, {16, 64}, GeometryParams(1, p), seed);
}

void expect_exact_pass(const CheckList& cl) {
  for (auto& c : cl.checks) {
    if (c.tag == CheckTag::exact) EXPECT_TRUE(c.pass) << c.name << " lhs=" << c.lhs << " rhs=" << c.rhs;
  }
}

}  // namespace

TEST(ChainM, Examples) {
  const auto a = chain_m(2.0, 0.5, 0.25, 0.25);
  EXPECT_NEAR(a.expr, 2 * std::log2(3.0) + 4, 1e-12);
  EXPECT_NEAR(a.expr, 7.170, 1e-3);
  EXPECT_EQ(a.m, 8);
  EXPECT_NEAR(a.eps, 0.830, 1e-3);
  const auto b = chain_m(4.0, 0.5, 0.5, 0.5);
  EXPECT_NEAR(b.expr, std::log2(3.0) + (2 + std::log2(1.5)) / 3 + 2, 1e-12);
  EXPECT_EQ(b.m, 5);
  EXPECT_NEAR(b.eps, 5 - b.expr, 1e-12);
  EXPECT_THROW(chain_m(2.0, 0.5, 0.25, -0.25), RangeError);
}

TEST(ChainM, EpsilonInUnitInterval) {
  for (double p : {1.5, 2.0, 3.0, 5.0})
    for (double a : {-0.5, 0.0, 0.3, 0.9})
      for (double s : {0.05, 0.5, 1.2}) {
        const auto m = chain_m(p, a, 0.5 * s, 0.5 * s);
        EXPECT_GE(m.eps, 0.0);
        EXPECT_LT(m.eps, 1.0);
      }
}

TEST(ChainParams, RejectsRanges) {
  EXPECT_THROW(ChainParams(0.0, 0.5, 0.0, 0.1, 2, 1), Error);
  EXPECT_THROW(ChainParams(0.25, 0.2, 0.1, 0.1, 2, 1), Error);
  EXPECT_THROW(ChainParams(0.25, 0.5, 0.3, 0.1, 2, 1), Error);
  EXPECT_THROW(ChainParams(0.25, 0.5, 0.1, -0.2, 2, 1), Error);
  EXPECT_THROW(ChainParams(0.25, 0.5, 0.1, 0.1, 2, 1.5), Error);
}

TEST(UGrid, SlabCountAndTau) {
  const UGrid g(unit_R0(2.0), 0.25, 8, 0.5);
  EXPECT_EQ(g.slabs(), 98304U);
  EXPECT_DOUBLE_EQ(g.tau(), 1.0);
  EXPECT_DOUBLE_EQ(g.l(), 1.0 / 256);
  EXPECT_NEAR(g.slab_length(), 0.75 / 98304, 1e-18);
  EXPECT_THROW(g.piece(256, 1), RangeError);
  EXPECT_THROW(g.piece(0, 0), RangeError);
}

TEST(UGrid, TauBracket) {
  for (double p : {1.5, 2.0, 3.0})
    for (int m = 1; m <= 6; ++m) {
      const UGrid g(unit_R0(p), 0.1, m, 0.4);
      EXPECT_GE(g.tau(), 1.0 - 1e-12);
      EXPECT_LT(g.tau(), 2.0);
    }
}

// The pieces tile R0+(ρ) exactly.
TEST(UGrid, PiecesTile) {
  const ParabolicRectangle R0({0.1, -0.2}, 0.3, 0.8, GeometryParams(2, 2.0));
  const UGrid g = partition_upper(R0, 0.2, 2, 0.5);
  const Box up = R0.upper_part(TimeLag(0.2));
  double total = 0.0;
  std::vector<Box> pieces;
  for (std::uint64_t i = 0; i < g.spatial_count(); ++i)
    for (std::uint64_t j = 1; j <= g.slabs(); ++j) {
      pieces.push_back(g.piece(i, j));
      total += pieces.back().measure();
      EXPECT_TRUE(contains(up, pieces.back()));
      EXPECT_NEAR(g.associated(i, j).top(), pieces.back().t_hi(), 1e-12);
    }
  EXPECT_NEAR(total, up.measure(), 1e-12 * up.measure());
  for (std::size_t a = 0; a < pieces.size(); ++a)
    for (std::size_t b = a + 1; b < pieces.size(); ++b) EXPECT_TRUE(disjoint(pieces[a], pieces[b]));
}

TEST(SpatialChain, CentralCube) {
  const auto s = spatial_chain({0.125}, {0.0}, 0.125, 1.0);
  EXPECT_EQ(s.N_i, 1U);
  const auto c = spatial_chain({0.0}, {0.0}, 0.125, 1.0);
  EXPECT_EQ(c.N_i, 0U);
  EXPECT_EQ(c.centers.size(), 1U);
}

TEST(SpatialChain, OneDimensionalHalfOverlap) {
  const auto s = spatial_chain({-0.875}, {0.0}, 0.125, 1.0);
  EXPECT_EQ(s.N_i, 7U);
  EXPECT_DOUBLE_EQ(s.theta, 1.0);
  for (double r : s.overlap) EXPECT_NEAR(r, 0.5, 1e-12);
  EXPECT_THROW(spatial_chain({0.95}, {0.0}, 0.125, 1.0), DomainError);
}

TEST(SpatialChain, OverlapBracketInTwoAndThreeDimensions) {
  for (int n : {2, 3}) {
    const ParabolicRectangle R0(std::vector<double>(n, 0.0), 0.0, 1.0, GeometryParams(n, 2.0));
    const UGrid g(R0, 0.25, 3, 0.5);
    for (std::uint64_t i = 0; i < g.spatial_count(); ++i) {
      const auto s = spatial_chain(g.cube_center(i), R0.center_x(), g.l(), 1.0);
      EXPECT_GE(s.theta, 1.0);
      EXPECT_LE(s.theta, std::sqrt(double(n)) + 1e-12);
      for (double r : s.overlap) {
        EXPECT_GE(r, std::exp2(-n) - 1e-12);
        EXPECT_LE(r, 0.5 + 1e-12);
      }
      EXPECT_NEAR(s.centers.back()[0], 0.0, 1e-12);
    }
  }
}

TEST(BuildChain, BottomSlabBoundaryCube) {
  const UGrid g = grid_for(4.0, kP4);
  const Chain ch = build_chain(g, 0, 1);
  EXPECT_EQ(ch.M, 0U);
  EXPECT_EQ(ch.beta, 0.0);
  EXPECT_EQ(ch.spatial.b, 1U);
  EXPECT_EQ(ch.length(), ch.N + 1);
  EXPECT_THROW(build_chain(g, g.spatial_count(), 1), RangeError);
}

// Shift bookkeeping against a direct evaluation of the defining relations.
TEST(BuildChain, ShiftQuantitiesMatchDefinition) {
  for (double p : {2.0, 4.0}) {
    const ChainParams P = p == 2.0 ? ChainParams(0.25, 0.5, 0.25, 0.25, 2, 1) : kP4;
    const UGrid g = grid_for(p, P);
    for (auto [i, j] : sample_sources(g, 20, 3)) {
      const Chain ch = build_chain(g, i, j);
      const double travel = (j - 1.0) * (1 - P.alpha) / g.tau();
      EXPECT_LE(ch.M * (1 + P.alpha), travel + 1e-9);
      EXPECT_GT((ch.M + 1) * (1 + P.alpha), travel - 1e-9);
      EXPECT_NEAR(ch.xi, travel - ch.M * (1 + P.alpha), 1e-9);
      EXPECT_NEAR(ch.beta * std::exp2(g.m() - 1) * (1 - P.alpha), ch.xi, 1e-9);
      EXPECT_LE(ch.beta, 2 * (1 + P.alpha) / ((1 - P.alpha) * std::exp2(g.m())) + 1e-12);
      // last top coincides with the top of the central rectangle
      const double lp = std::pow(g.l(), p);
      const double last = g.top(j) - (ch.length() - 1.0) * (1 + P.alpha) * lp -
                          std::min<double>(ch.length() - 1.0, std::exp2(g.m() - 1)) * ch.beta * (1 - P.alpha) * lp;
      EXPECT_NEAR(last, central_rectangle(g).top(), 1e-9);
      EXPECT_NEAR(ch.rect(ch.length() - 1).center_x()[0], 0.0, 1e-12);
    }
  }
}

// Consecutive rectangles overlap by a fraction in [2^{-(n+1)}, 1].
TEST(BuildChain, OverlapRatioBracket) {
  const UGrid g = grid_for(4.0, kP4);
  for (auto [i, j] : sample_sources(g, 10, 1)) {
    const Chain ch = build_chain(g, i, j);
    for (std::uint64_t k = 1; k < ch.length(); ++k) {
      const Box up = ch.upper(k);
      const double eta = intersection_measure(up, ch.lower(k - 1)) / up.measure();
      EXPECT_GE(eta, 0.25 - 1e-9);
      EXPECT_LE(eta, 1.0 + 1e-12);
    }
  }
}

TEST(BuildChain, InvariantChecksPass) {
  for (double p : {2.0, 4.0}) {
    const ChainParams P = p == 2.0 ? ChainParams(0.25, 0.5, 0.25, 0.25, 2, 1) : kP4;
    const UGrid g = grid_for(p, P);
    EXPECT_TRUE(central_containment(g, P).pass);
    for (auto [i, j] : sample_sources(g, 6, 9)) expect_exact_pass(check_chain(g, build_chain(g, i, j), P));
  }
}

TEST(SampleSources, DeterministicWithCorners) {
  const UGrid g = grid_for(4.0, kP4);
  const auto a = sample_sources(g, 5, 7), b = sample_sources(g, 5, 7);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.size(), 10U);
  EXPECT_EQ(a[0], (std::pair<std::uint64_t, std::uint64_t>{0, 1}));
  EXPECT_EQ(a[3].second, g.slabs());
}

TEST(Telescope, ConstantAndMonotoneFieldsGiveZeroLines) {
  const UGrid g = grid_for(4.0, kP4);
  for (const char* preset : {"constant", "time_step"}) {
    const auto f = field(preset, 4.0);
    for (auto [i, j] : sample_sources(g, 2, 0)) {
      const auto rep = telescope_bound(f, build_chain(g, i, j), kP4, 0.0);
      for (double v : rep.lines) EXPECT_EQ(v, 0.0) << preset;
      expect_exact_pass(rep.checks);
    }
  }
}

TEST(Telescope, RandomFieldLinesChain) {
  const UGrid g = grid_for(4.0, kP4);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto f = field("random_cells", 4.0, seed);
    for (auto [i, j] : sample_sources(g, 3, seed)) {
      const auto rep = telescope_bound(f, build_chain(g, i, j), kP4, 0.0);
      ASSERT_EQ(rep.lines.size(), 9U);
      expect_exact_pass(rep.checks);
      EXPECT_GT(rep.lines.back(), 0.0);
    }
  }
}

TEST(LagChange, ZeroFieldAndRandom) {
  const auto R0 = unit_R0(4.0);
  const auto z = verify_lag_change(field("constant", 4.0), R0, kP4, geometric_ladder(0.01, 10, 6), {2, 0}, 0.0);
  for (auto& row : z.rows) EXPECT_EQ(row.plus_measure + row.minus_measure, 0.0);
  expect_exact_pass(z.checks);
  for (std::uint64_t seed = 0; seed < 2; ++seed) {
    const auto f = field("random_cells", 4.0, seed);
    const double norm = desk_norm_in(f, R0, kP4.jn_gamma()).norm;
    const auto rep = verify_lag_change(f, R0, kP4, geometric_ladder(1e-3, 8, 12), {4, seed}, norm);
    expect_exact_pass(rep.checks);
    EXPECT_EQ(rep.chains_checked, 9U);
    EXPECT_GT(rep.max_plus_ratio + rep.max_minus_ratio, 0.0);
  }
}

TEST(LagEquivalence, C0AndChecks) {
  EXPECT_DOUBLE_EQ(lag_equivalence_c0(1.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(lag_equivalence_c0(0.5, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(lag_equivalence_c0(0.5, 2.0), 2.0 * std::sqrt(2.0));
  const auto f = field("random_cells", 2.0, 4);
  const auto cands = enumerate_candidates(f, kUnit, {.scales = 2, .stride = {4, 16}});
  for (auto [r, s] : {std::pair{1.0, 1.0}, std::pair{0.5, 1.0}, std::pair{0.5, 1.5}}) {
    const auto rep = verify_lag_equivalence(f, 0.25, 0.1, r, s, 2.0, cands);
    expect_exact_pass(rep.checks);
    EXPECT_EQ(rep.per_candidate_failures, 0U);
  }
  EXPECT_THROW(verify_lag_equivalence(f, 0.25, 0.3, 1.0, 1.0, 2.0, cands), Error);
  EXPECT_THROW(verify_lag_equivalence(f, 0.25, 0.1, 1.0, 0.5, 2.0, cands), Error);
  EXPECT_THROW(verify_lag_equivalence(f, 0.25, 0.1, 1.0, 1.0, 2.0, {}), DegenerateInput);
}
