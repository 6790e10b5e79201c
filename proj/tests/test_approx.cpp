#include <gtest/gtest.h>

#include <cmath>

#include "baire/catalog.hpp"
#include "samplers.hpp"

using namespace baire;

namespace {

std::vector<Point> approx_samples(std::size_t count, std::uint64_t seed) {
  auto pts = testing_support::random_points(count, seed, 8, 3, 3);
  pts.push_back(Point::constant({}, 1));
  pts.push_back(Point::constant({}, 0));
  pts.push_back(Point::constant({1, 1, 1, 1, 1, 1, 1, 0}, 1));
  pts.push_back(Point::constant({0, 2, 0, 2, 0, 2, 0}, 2));
  return pts;
}

Point first_zero_at(std::size_t i) {
  return Point::constant(FinSeq(std::vector<Nat>(i, 1)).append(0), 1);
}

}  // namespace

TEST(MetricSpace, ValidatesAxioms) {
  EXPECT_NO_THROW(CompMetricSpace::grid(8));
  EXPECT_THROW(CompMetricSpace::finite({"a", "b", "c"}, {{0, 1, Rational(1, 4)}, {1, 0, Rational(1, 4)},
                                                          {Rational(1, 4), Rational(1, 4), 0}}),
               std::invalid_argument);
  EXPECT_THROW(CompMetricSpace::finite({"a", "b"}, {{0, 2}, {2, 0}}), std::invalid_argument);
  EXPECT_THROW(CompMetricSpace::finite({"a", "b"}, {{0, 1}, {Rational(1, 2), 0}}), std::invalid_argument);
}

TEST(MetricSpace, DyadicEnumeration) {
  auto y = CompMetricSpace::dyadic_unit_interval();
  std::vector<Rational> want = {0, 1, Rational(1, 2), Rational(1, 4), Rational(3, 4), Rational(1, 8), Rational(3, 8)};
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_EQ(*y.value(i), want[i]);
  EXPECT_FALSE(y.check(40).has_value());
}

TEST(OpenScheme, TwoPointSpaceSeparatesAtLevelOne) {
  auto s = build_open_scheme(CompMetricSpace::on_line({0, 1}), 2, 2);
  EXPECT_EQ(s.members({0})->count(), 1u);
  EXPECT_TRUE(s.members({0})->test(0));
  EXPECT_TRUE(s.members({1})->test(1));
  EXPECT_EQ(s.witness({0}), 0u);
  EXPECT_EQ(s.witness({1}), 1u);
  EXPECT_EQ(s.children({0}), std::vector<std::size_t>{0});
  EXPECT_TRUE(verify_scheme(s, 2).passed());
}

TEST(OpenScheme, SingletonIsAChain) {
  auto s = build_open_scheme(CompMetricSpace::on_line({Rational(1, 2)}), 4, 1);
  auto nodes = s.explore(4);
  ASSERT_EQ(nodes.size(), 5u);
  for (const auto& n : nodes) {
    EXPECT_EQ(s.witness(n), 0u);
    for (Nat v : n) EXPECT_EQ(v, 0u);
  }
}

TEST(OpenScheme, DyadicDiameterBound) {
  auto s = build_open_scheme(CompMetricSpace::dyadic_unit_interval(), 3, 64);
  auto rep = verify_scheme(s, 3);
  EXPECT_TRUE(rep.passed()) << (rep.failures.empty() ? "" : rep.failures[0]);
  for (const auto& n : s.explore(3)) {
    if (n.empty()) continue;
    auto m = s.members(n);
    Rational bound = Dyadic::inv_pow2(n.size()).to_rational();
    for (auto i = m->find_first(); i != OpenScheme::Members::npos; i = m->find_next(i))
      for (auto j = m->find_next(i); j != OpenScheme::Members::npos; j = m->find_next(j))
        ASSERT_LT(s.distance(i, j), bound) << to_string(n);
  }
}

TEST(OpenScheme, ShippedSpacesSatisfyConditions) {
  for (const auto& name : baire1_catalog()) {
    auto spec = baire1_spec(name);
    auto s = build_open_scheme(spec.space, 6, *spec.space.size());
    EXPECT_TRUE(verify_scheme(s, 6).passed()) << name;
  }
}

TEST(Baire1, ConstantSpecGivesConstantApproximants) {
  Baire1Approximation a(baire1_spec("constant"));
  for (std::size_t k = 1; k <= 6; ++k) {
    auto r = baire1_to_full(a, k);
    EXPECT_EQ(r.function.range(), (std::set<std::size_t>{0}));
    EXPECT_TRUE(r.outside.empty());
  }
}

TEST(Baire1, NoZeroIndicatorReadsThePrefix) {
  Baire1Approximation a(baire1_spec("nozero"));
  for (std::size_t k = 1; k <= 6; ++k) {
    auto r = baire1_to_full(a, k);
    for (const auto& p : all_sequences(k, 2)) {
      std::size_t want = p.contains(0) ? 0 : 1;
      EXPECT_EQ(r.function.at_prefix(p), want) << to_string(p);
    }
  }
  // late zeros: wrong until the zero is read
  auto x = first_zero_at(7);
  for (std::size_t k = 1; k <= 12; ++k) EXPECT_EQ(a.run(x, k).value, k <= 7 ? 1u : 0u) << k;
}

TEST(Baire1, ApproximantsAreFullAndBucketConsistent) {
  auto samples = approx_samples(40, 9);
  for (const auto& name : baire1_catalog()) {
    Baire1Approximation a(baire1_spec(name));
    for (std::size_t k = 1; k <= 5; ++k) {
      auto r = baire1_to_full(a, k);
      EXPECT_TRUE(r.outside.empty()) << name;
      EXPECT_TRUE(preimages_partition(r.function));
      for (const auto& x : samples) EXPECT_EQ(r.function(x), a.run(x, k).value) << name << " k=" << k << to_string(x);
      for (auto v : r.function.range()) EXPECT_TRUE(a.scheme().members(FinSeq{})->test(v));
    }
  }
}

TEST(Baire1, ValueCountAtMostKPlusOneToKPlusOne) {
  for (const auto& name : baire1_catalog()) {
    Baire1Approximation a(baire1_spec(name));
    for (std::size_t k = 1; k <= 4; ++k) {
      auto r = baire1_to_full(a, k);
      auto cap = static_cast<std::size_t>(std::pow(k + 1, k + 1));
      EXPECT_LE(r.function.range().size(), cap);
      EXPECT_LE(r.distinct_nodes, cap);
    }
  }
}

// The derivable constant is 2^-(k-1); stated elsewhere as "full with constant k".
TEST(Baire1, FullWithConstantK) {
  Baire1Approximation a(baire1_spec("zerocount"));
  for (std::size_t k = 1; k <= 4; ++k) {
    auto r = baire1_to_full(a, k);
    EXPECT_EQ(r.function.constant(), Dyadic::inv_pow2(k - 1));
    ValueDistance d = [&](std::size_t i, std::size_t j) { return a.spec().space.dist(i, j); };
    EXPECT_TRUE(verify_lipschitz(r.function, d, lipschitz_bound_of_full(r.function)).passed);
  }
}

TEST(Baire1, NodeReductionsAgreeWithGroundTruth) {
  auto samples = approx_samples(30, 4);
  for (const auto& name : baire1_catalog()) {
    Baire1Approximation a(baire1_spec(name));
    for (const auto& s : a.scheme().explore(2)) {
      auto red = a.node_reduction(s);
      auto m = a.scheme().members(s);
      for (const auto& x : samples) {
        bool truth = m->test(a.spec().ground_truth(x));
        if (red.ground_truth) {
          EXPECT_EQ((*red.ground_truth)(x), truth) << name << to_string(s);
        }
      }
      if (red.control) {
        std::vector<Sigma02Set> fam;
        for (auto i = m->find_first(); i != OpenScheme::Members::npos; i = m->find_next(i))
          fam.push_back(a.spec().levels[i]);
        auto rep = verify_union(*red.control, fam, samples, 64);
        EXPECT_TRUE(rep.passed()) << name << to_string(s);
      }
    }
  }
}

TEST(Baire1, MissingReductionBeyondSchemeDepth) {
  Baire1Approximation a(baire1_spec("nozero"), 3);
  EXPECT_THROW(a.run(Point::constant({}, 1), 5), MissingReduction);
}

TEST(Convergence, ConstantStabilizesImmediately) {
  Baire1Approximation a(baire1_spec("constant"));
  auto rep = convergence_report(a, {1, 2, 3, 4, 5, 6}, approx_samples(20, 2), 2, 6);
  for (const auto& s : rep.samples) EXPECT_EQ(s.m, 0u);
}

TEST(Convergence, LateZeroWitnessesNonUniformity) {
  Baire1Approximation a(baire1_spec("nozero"));
  std::vector<std::size_t> ks;
  for (std::size_t k = 1; k <= 16; ++k) ks.push_back(k);
  auto rep = convergence_report(a, ks, {first_zero_at(7)}, 0, 16);
  EXPECT_EQ(rep.samples[0].m, 8u);
  for (std::size_t i = 3; i < 12; ++i) {
    auto r = convergence_report(a, ks, {first_zero_at(i)}, 0, 16);
    EXPECT_EQ(r.samples[0].m, i + 1);
  }
}

TEST(Convergence, ShippedExamplesConverge) {
  std::vector<std::size_t> ks;
  for (std::size_t k = 1; k <= 24; ++k) ks.push_back(k);
  auto samples = approx_samples(40, 31);
  for (const auto& name : baire1_catalog()) {
    Baire1Approximation a(baire1_spec(name));
    for (std::size_t n = 0; n <= 3; ++n) {
      auto rep = convergence_report(a, ks, samples, n, 24);
      EXPECT_EQ(rep.failures(), 0u) << name << " n=" << n;
    }
  }
}

TEST(Convergence, FailureAtHorizonIsReported) {
  Baire1Approximation a(baire1_spec("nozero"));
  auto rep = convergence_report(a, {1, 2, 3, 4}, {first_zero_at(9)}, 0, 4);
  EXPECT_FALSE(rep.samples[0].m.has_value());
  EXPECT_EQ(rep.failures(), 1u);
}

TEST(SpecFile, ParsesAndMatchesCatalog) {
  auto spec = parse_baire1_spec(
      "name: indicator\npoints: 0 1\nbranch: 1\nlevel 0: haszero\n# comment\nlevel 1: nozero\n");
  Baire1Approximation a(spec), b(baire1_spec("nozero"));
  for (std::size_t k = 1; k <= 4; ++k) EXPECT_EQ(baire1_to_full(a, k).function, baire1_to_full(b, k).function);
  try {
    parse_baire1_spec("points: 0 1\nbranch: 1\nlevel 0: haszero\nlevel 1: bogus\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
  EXPECT_THROW(parse_baire1_spec("points: 0 1\nbranch: 1\nlevel 0: haszero\n"), ParseError);
}

TEST(StepApproximation, ConstantHasNoError) {
  auto spec = step_spec("step-constant");
  for (std::size_t k = 0; k <= 3; ++k) {
    auto ap = step_approximation(spec, k);
    auto rep = step_error(spec, ap, approx_samples(30, k));
    EXPECT_EQ(rep.worst, Rational(0));
  }
}

TEST(StepApproximation, IndicatorIsExact) {
  auto spec = step_spec("step-indicator");
  auto grid = testing_support::point_grid(3, 4);
  for (std::size_t k = 1; k <= 4; ++k) {
    auto ap = step_approximation(spec, k);
    for (const auto& x : grid) EXPECT_EQ(ap.value(x), spec.ground_truth(x)) << to_string(x);
  }
}

TEST(StepApproximation, DyadicExampleWithinBound) {
  auto spec = step_spec("step-tree");
  auto samples = testing_support::random_points(200, 77, 5, 4, 3);
  for (std::size_t k = 1; k <= 5; ++k) {
    auto ap = step_approximation(spec, k);
    auto rep = step_error(spec, ap, samples);
    EXPECT_TRUE(rep.within_bound) << "k=" << k << " worst " << to_string(rep.worst);
  }
}

TEST(StepApproximation, CoverGapWhenPreimagesMissing) {
  auto spec = step_spec("step-indicator");
  spec.cover_bound = 1;
  auto ap = step_approximation(spec, 2);
  EXPECT_THROW(ap.value(Point::constant({1}, 0)), CoverGap);
}

TEST(DiagonalLimit, TrivialCases) {
  auto ex = two_stage_example(12);
  auto constant_in_m = [&](std::size_t n, std::size_t) { return ex.fn[n]; };
  auto h = diagonal_limit(constant_in_m, 12);
  auto same = [&](std::size_t, std::size_t) { return ex.f; };
  auto hf = diagonal_limit(same, 12);
  for (const auto& x : approx_samples(20, 5))
    for (std::size_t n = 0; n < 12; ++n) {
      EXPECT_EQ(h[n](x), ex.fn[n](x));
      EXPECT_EQ(hf[n](x), ex.f(x));
    }
}

TEST(DiagonalLimit, TwoStageEstimate) {
  auto ex = two_stage_example(40);
  auto h = diagonal_limit(ex.g, 40);
  auto rep = verify_diagonal(h, ex.fn, ex.f, approx_samples(46, 12), 4);
  EXPECT_TRUE(rep.passed()) << rep.failures.front();
  EXPECT_GT(rep.checks, 0u);
}
