#include <gtest/gtest.h>

#include "baire/catalog.hpp"
#include "baire/embed.hpp"

using namespace baire;

namespace {

UltraSpace one_point() { return UltraSpace({{Dyadic::zero()}}); }

UltraSpace two_far() { return UltraSpace({{Dyadic::zero(), Dyadic::one()}, {Dyadic::one(), Dyadic::zero()}}); }

// Pairs {0,1} and {2,3} at 1/4, cross pairs at 1.
UltraSpace dendrogram() {
  Dyadic z = Dyadic::zero(), q = Dyadic::pow2(-2), o = Dyadic::one();
  return UltraSpace({{z, q, o, o}, {q, z, o, o}, {o, o, z, q}, {o, o, q, z}});
}

}  // namespace

TEST(UltraSpace, RejectsNonUltrametrics) {
  Dyadic z = Dyadic::zero(), h = Dyadic::pow2(-1), o = Dyadic::one();
  EXPECT_THROW(UltraSpace({{z, h, h}, {h, z, o}, {h, o, z}}), std::invalid_argument);
  EXPECT_THROW(UltraSpace({{z, z}, {z, z}}), std::invalid_argument);
  EXPECT_THROW(UltraSpace({{z, h}, {o, z}}), std::invalid_argument);
  EXPECT_NO_THROW(dendrogram());
}

TEST(UltraSpace, TextRoundTrip) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    auto x = random_dendrogram(rng);
    auto y = parse_ultra(format_ultra(x));
    ASSERT_EQ(x.size(), y.size());
    for (std::size_t a = 0; a < x.size(); ++a)
      for (std::size_t b = 0; b < x.size(); ++b) EXPECT_EQ(x.dist(a, b), y.dist(a, b));
  }
  try {
    parse_ultra("points: 3\n1\n2^-1 2^-2\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse_ultra("points: 3\n1\n"), ParseError);
}

TEST(Lusin, OnePointIsAChain) {
  auto s = build_lusin_scheme(one_point(), 3);
  EXPECT_EQ(s.nodes().size(), 4u);
  EXPECT_NE(s.node({0, 0, 0}), nullptr);
  EXPECT_EQ(s.invert_h(0, 3), (FinSeq{0, 0, 0}));
  EXPECT_TRUE(verify_lusin(s).empty());
  EXPECT_TRUE(verify_bilipschitz(s).passed());
  EXPECT_EQ(verify_bilipschitz(s).pairs, 0u);
}

TEST(Lusin, TwoFarPointsSplitAtRoot) {
  auto s = build_lusin_scheme(two_far(), 2);
  EXPECT_EQ(s.nodes().at(FinSeq{}).children, 2u);
  EXPECT_EQ(s.nodes().at(FinSeq{0}).members, std::vector<std::size_t>{0});
  EXPECT_EQ(s.nodes().at(FinSeq{1}).members, std::vector<std::size_t>{1});
  EXPECT_EQ(s.nodes().at(FinSeq{0}).children, 1u);
  EXPECT_EQ(induced_ultrametric(s, 0, 1), Dyadic::one());
  auto rep = verify_bilipschitz(s);
  EXPECT_TRUE(rep.passed());
  EXPECT_EQ(rep.max_backward, Rational(1));
}

TEST(Lusin, DendrogramLevels) {
  auto s = build_lusin_scheme(dendrogram(), 3);
  EXPECT_TRUE(verify_lusin(s).empty());
  EXPECT_EQ(s.nodes().at(FinSeq{0}).members, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(s.nodes().at(FinSeq{1}).members, (std::vector<std::size_t>{2, 3}));
  for (const FinSeq& t : {FinSeq{0, 0}, FinSeq{0, 1}, FinSeq{1, 0}, FinSeq{1, 1}})
    EXPECT_EQ(s.nodes().at(t).members.size(), 1u);
  auto a0 = s.invert_h(0, 3), a1 = s.invert_h(1, 3);
  EXPECT_EQ(a0.entries()[0], a1.entries()[0]);
  EXPECT_NE(a0.entries()[1], a1.entries()[1]);
  auto rep = verify_bilipschitz(s);
  EXPECT_TRUE(rep.passed());
  EXPECT_EQ(rep.pairs, 6u);
  EXPECT_EQ(rep.max_backward, Rational(2));
  EXPECT_EQ(induced_ultrametric(s, 0, 1), Dyadic::pow2(-1));
  EXPECT_EQ(induced_ultrametric(s, 2, 2), Dyadic::zero());
}

TEST(Lusin, RoundTripOnEveryLabel) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 20; ++i) {
    auto s = build_lusin_scheme(random_dendrogram(rng), 20);
    for (std::size_t u = 0; u < s.space().size(); ++u) EXPECT_EQ(s.embed_h(s.invert_h(u, 20)), u);
  }
}

TEST(Lusin, EmbedUndefinedOffTheTree) {
  auto s = build_lusin_scheme(dendrogram(), 3);
  EXPECT_FALSE(s.embed_h({2}).has_value());
  EXPECT_FALSE(s.embed_h({0}).has_value());
  EXPECT_EQ(s.embed_h({1, 1}), 3u);
}

TEST(Lusin, RandomSpacesBiLipschitz) {
  std::mt19937_64 rng(2024);
  bool sharp = false;
  for (int i = 0; i < 60; ++i) {
    auto s = build_lusin_scheme(random_dendrogram(rng, 32, 8), 20);
    EXPECT_TRUE(verify_lusin(s).empty());
    auto rep = verify_bilipschitz(s);
    EXPECT_TRUE(rep.passed()) << rep.failures.front();
    EXPECT_LE(rep.max_forward, Rational(1));
    sharp = sharp || rep.max_backward == Rational(2);
  }
  EXPECT_TRUE(sharp);
}

TEST(Lusin, InducedUltrametricStrongTriangle) {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 20; ++i) {
    auto s = build_lusin_scheme(random_dendrogram(rng, 16, 6), 16);
    std::size_t n = s.space().size();
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t c = 0; c < n; ++c)
          EXPECT_LE(induced_ultrametric(s, a, c),
                    std::max(induced_ultrametric(s, a, b), induced_ultrametric(s, b, c)));
  }
}

TEST(Lusin, SeparationFailureAtShallowDepth) {
  auto s = build_lusin_scheme(dendrogram(), 1);
  EXPECT_THROW(induced_ultrametric(s, 0, 1), SeparationFailure);
  EXPECT_FALSE(verify_bilipschitz(s).passed());
}

TEST(Transfer, ApproximantsStayFullAndConverge) {
  std::mt19937_64 rng(5);
  for (const std::string name : {"firstzero", "nozero", "zerocount"}) {
    Baire1Approximation a(baire1_spec(name));
    for (int i = 0; i < 5; ++i) {
      auto s = build_lusin_scheme(random_dendrogram(rng, 16, 5), 20);
      auto rep = transfer_through_embedding(a, s, 5, 3, 24);
      EXPECT_TRUE(rep.fullness_failures.empty()) << name;
      EXPECT_EQ(rep.convergence.failures(), 0u) << name;
    }
  }
}
