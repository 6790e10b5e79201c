#include <gtest/gtest.h>

#include <random>

#include "baire/builtins.hpp"
#include "baire/seqmap.hpp"
#include "baire/seqmap_io.hpp"
#include "samplers.hpp"

using namespace baire;

namespace {

SeqMap reverse_map(std::size_t depth, Nat branch) {
  return SeqMap::custom("reverse",
                        [](const FinSeq& s) {
                          std::vector<Nat> v(s.begin(), s.end());
                          std::reverse(v.begin(), v.end());
                          return FinSeq(std::move(v));
                        },
                        depth, branch);
}

// Random length-preserving table map built from a random Mealy-like rule.
SeqMap random_lp_table(std::mt19937_64& rng, std::size_t depth, Nat branch) {
  std::map<FinSeq, FinSeq> entries;
  entries[FinSeq{}] = FinSeq{};
  for (std::size_t len = 1; len <= depth; ++len)
    for (const auto& s : all_sequences(len, branch)) {
      FinSeq parent = entries.at(s.prefix(len - 1));
      entries[s] = parent.append(rng() % branch);
    }
  return SeqMap::table(std::move(entries), depth, branch, SeqMap::Extension::Copy);
}

}  // namespace

TEST(ValidateMonotone, IdentityCertified) {
  auto rep = validate_monotone(SeqMap::identity(), 4, 3);
  EXPECT_TRUE(rep.certified);
  EXPECT_FALSE(rep.violation);
  EXPECT_EQ(rep.checked, 3u + 9u + 27u + 81u);
}

TEST(ValidateMonotone, ReverseViolates) {
  auto rep = validate_monotone(reverse_map(2, 2), 2, 2);
  ASSERT_TRUE(rep.violation);
  EXPECT_EQ(rep.violation->first, (FinSeq{0}));
  EXPECT_EQ(rep.violation->second, (FinSeq{0, 1}));
  try {
    require_monotone(reverse_map(2, 2), 2, 2);
    FAIL();
  } catch (const ViolationFound& e) {
    EXPECT_EQ(e.shorter(), (FinSeq{0}));
    EXPECT_EQ(e.longer(), (FinSeq{0, 1}));
  }
}

TEST(ValidateMonotone, DomainBeyondDeclaredBoundsRejected) {
  EXPECT_THROW(validate_monotone(reverse_map(2, 2), 3, 2), std::invalid_argument);
}

TEST(InducedEval, Identity) {
  auto x = parse_point("[4,0,2]~per(1,3)");
  auto r = induced_eval(SeqMap::identity(), x, 5, 5);
  ASSERT_TRUE(r.value);
  EXPECT_EQ(*r.value, x.prefix(5));
}

TEST(InducedEval, LengthPreservingTerminatesAtBudgetN) {
  auto phi = make_builtin("zero_count_eq", {1}).reduction;
  auto r = induced_eval(phi, parse_point("[0,1]~const(0)"), 4, 4);
  ASSERT_TRUE(r.value);
  EXPECT_EQ(*r.value, (FinSeq{1, 1, 0, 0}));
  EXPECT_EQ(r.inputs_read, 4u);
}

TEST(InducedEval, ConstantEmptyOutputDiverges) {
  auto phi = SeqMap::custom("nothing", [](const FinSeq&) { return FinSeq{}; }, 4, 2);
  auto r = induced_eval(phi, Point{}, 1, 100);
  EXPECT_TRUE(r.diverged());
  EXPECT_EQ(r.inputs_read, 100u);
}

TEST(Compose, IdentityLaws) {
  auto psi = make_builtin("first_zero_in", {1, 3}).reduction;
  for (const auto& s : all_sequences_upto(4, 3)) {
    EXPECT_EQ(compose(SeqMap::identity(), psi)(s), psi(s));
    EXPECT_EQ(compose(psi, SeqMap::identity())(s), psi(s));
  }
}

TEST(Compose, AgreesWithSequentialEvaluation) {
  std::mt19937_64 rng(11);
  auto phi = random_lp_table(rng, 3, 3);
  auto psi = random_lp_table(rng, 3, 3);
  auto both = compose(phi, psi);
  auto pts = testing_support::random_points(50, 12, 5, 3, 2);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::size_t n = 1 + i % 6;
    auto inner = induced_eval(phi, pts[i], n, n);
    ASSERT_TRUE(inner.value);
    auto outer = psi(*inner.value);
    auto direct = induced_eval(both, pts[i], n, n);
    ASSERT_TRUE(direct.value);
    EXPECT_EQ(*direct.value, outer);
  }
}

TEST(Compose, AssociativeOnSamples) {
  auto a = make_builtin("zero_count_ge", {2}).reduction;
  auto b = make_builtin("cylinder", {1, 1}).reduction;
  auto c = shift_map(1);
  auto left = compose(compose(a, b), c);
  auto right = compose(a, compose(b, c));
  for (const auto& x : testing_support::random_points(60, 5))
    for (std::size_t n = 0; n < 6; ++n) EXPECT_EQ(induced_eval(left, x, n, 40).value, induced_eval(right, x, n, 40).value);
}

TEST(Compose, MealyProductMatchesRule) {
  auto a = make_builtin("first_zero_in", {0, 2}).reduction;
  auto b = make_builtin("avoid", {1}).reduction;
  auto ab = compose(a, b);
  ASSERT_NE(ab.mealy(), nullptr);
  for (const auto& s : all_sequences_upto(5, 3)) EXPECT_EQ(ab.mealy()->run(s), b(a(s)));
}

TEST(Continuity, PrefixAgreementPropagates) {
  std::mt19937_64 rng(3);
  std::vector<SeqMap> maps = {random_lp_table(rng, 4, 3), make_builtin("zero_count_eq", {1}).reduction, shift_map(2)};
  auto grid = testing_support::point_grid(4, 3);
  for (const auto& phi : maps)
    for (const auto& x : grid)
      for (const auto& y : grid)
        for (std::size_t m = 0; m <= 4; ++m) {
          if (!point_eq_to_depth(x, y, m)) break;
          std::size_t len = phi(x.prefix(m)).size();
          auto fx = induced_eval(phi, x, len, 64);
          auto fy = induced_eval(phi, y, len, 64);
          ASSERT_TRUE(fx.value && fy.value);
          EXPECT_EQ(*fx.value, *fy.value);
        }
}

TEST(PrefixOracle, IdentityGuarantee) {
  auto m = seqmap_from_prefix_oracle([](const FinSeq& s) { return s; }, 3, 3);
  for (const auto& s : all_sequences_upto(3, 3)) EXPECT_EQ(m(s), s);
}

TEST(PrefixOracle, ConstantGuaranteeIsTruncated) {
  auto m = seqmap_from_prefix_oracle([](const FinSeq&) { return FinSeq{0}; }, 3, 2);
  EXPECT_EQ(m(FinSeq{}), FinSeq{});
  EXPECT_EQ(m(FinSeq{1}), (FinSeq{0}));
  EXPECT_EQ(m(FinSeq{1, 0, 1}), (FinSeq{0}));
}

TEST(PrefixOracle, IncoherentRejected) {
  auto g = [](const FinSeq& s) -> FinSeq {
    if (s == FinSeq{0}) return {1};
    if (s == FinSeq{0, 0}) return {2};
    return {};
  };
  try {
    seqmap_from_prefix_oracle(g, 2, 2);
    FAIL();
  } catch (const IncoherentOracle& e) {
    EXPECT_EQ(e.shorter(), (FinSeq{0}));
    EXPECT_EQ(e.longer(), (FinSeq{0, 0}));
  }
}

TEST(Tables, MissingEntryRejected) {
  std::map<FinSeq, FinSeq> entries{{FinSeq{}, FinSeq{}}, {FinSeq{0}, FinSeq{0}}};
  EXPECT_THROW(SeqMap::table(entries, 1, 2, SeqMap::Extension::Freeze), std::invalid_argument);
}

TEST(Tables, ExtensionModes) {
  std::map<FinSeq, FinSeq> entries{{FinSeq{}, FinSeq{}}, {FinSeq{0}, FinSeq{1}}, {FinSeq{1}, FinSeq{0}}};
  auto freeze = SeqMap::table(entries, 1, 2, SeqMap::Extension::Freeze);
  auto copy = SeqMap::table(entries, 1, 2, SeqMap::Extension::Copy);
  EXPECT_EQ(freeze(FinSeq{0, 5, 6}), (FinSeq{1}));
  EXPECT_EQ(copy(FinSeq{0, 5, 6}), (FinSeq{1, 5, 6}));
  EXPECT_EQ(copy(FinSeq{7, 1}), (FinSeq{7, 1}));
  EXPECT_TRUE(copy.length_preserving());
  EXPECT_FALSE(freeze.length_preserving());
}

TEST(SeqMapFiles, TableRoundTrip) {
  std::mt19937_64 rng(9);
  auto m = random_lp_table(rng, 2, 3);
  auto text = format_seqmap(m);
  auto back = parse_seqmap(text).map;
  EXPECT_EQ(format_seqmap(back), text);
  for (const auto& s : all_sequences_upto(4, 4)) EXPECT_EQ(back(s), m(s));
}

TEST(SeqMapFiles, BuiltinRoundTrip) {
  auto f = parse_seqmap("# comment\nkind: builtin\n\nbuiltin first_zero_in 1 3\n");
  EXPECT_EQ(f.map.name(), "first_zero_in");
  ASSERT_TRUE(f.ground_truth);
  EXPECT_TRUE((*f.ground_truth)(parse_point("[1,0]~const(1)")));
  EXPECT_EQ(format_seqmap(f.map), "kind: builtin\nbuiltin first_zero_in 1 3\n");
}

TEST(SeqMapFiles, ErrorsHaveLineNumbers) {
  try {
    parse_seqmap("kind: table\ndepth: 1\nbranch: 2\n[] -> []\n[0] -> [0\n[1] -> [1]\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 5u);
  }
  EXPECT_THROW(parse_seqmap("kind: builtin\nbuiltin nosuch\n"), ParseError);
  EXPECT_THROW(parse_seqmap("kind: table\ndepth: 1\nbranch: 2\n[] -> []\n[0] -> [0]\n"), ParseError);
}

TEST(Builtins, ReductionsMatchGroundTruth) {
  // Exact S-membership of the induced point via cycle detection on the Mealy state.
  auto induced_in_s = [](const SeqMap& phi, const Point& x) {
    const Mealy* m = phi.mealy();
    std::map<std::pair<std::uint64_t, std::size_t>, std::size_t> seen;
    std::vector<Nat> out;
    std::uint64_t q = m->initial;
    std::size_t h = x.head().size();
    for (std::size_t p = 0;; ++p) {
      std::size_t phase = p < h ? p : h + (p - h) % x.period();
      auto [it, fresh] = seen.emplace(std::pair{q, phase}, p);
      if (!fresh && p >= h) {
        for (std::size_t j = it->second; j < p; ++j)
          if (out[j] == 0) return false;
        return true;
      }
      auto [nq, o] = m->step(q, x.at(p));
      q = nq;
      out.push_back(o);
    }
  };
  std::vector<std::pair<std::string, std::vector<Nat>>> sets = {
      {"identity", {}},         {"full", {}},           {"empty", {}},           {"avoid", {2}},
      {"zero_count_eq", {0}},   {"zero_count_eq", {2}}, {"zero_count_ge", {0}},  {"zero_count_ge", {3}},
      {"nozero", {}},           {"haszero", {}},        {"first_zero_in", {1, 4}}, {"first_zero_from", {2}},
      {"cylinder", {0, 1}},     {"cylinder", {}},       {"not_cylinder", {1}}};
  auto pts = testing_support::random_points(300, 21, 7, 3, 3);
  for (const auto& [name, params] : sets) {
    auto b = make_builtin(name, params);
    EXPECT_TRUE(validate_monotone(b.reduction, 5, 3).certified) << name;
    for (const auto& x : pts) EXPECT_EQ(induced_in_s(b.reduction, x), b.ground_truth(x)) << name << " " << to_string(x);
  }
  EXPECT_THROW(make_builtin("avoid", {}), std::invalid_argument);
  EXPECT_THROW(make_builtin("bogus", {}), std::invalid_argument);
}

TEST(Builtins, ShiftDropsEntries) {
  auto sh = shift_map(2);
  EXPECT_EQ(sh(FinSeq{1, 2, 3, 4}), (FinSeq{3, 4}));
  EXPECT_EQ(sh(FinSeq{1}), FinSeq{});
  EXPECT_TRUE(validate_monotone(sh, 4, 3).certified);
}
