#include <gtest/gtest.h>

#include <set>
#include <thread>

#include "baire/sigma02.hpp"
#include "samplers.hpp"

using namespace baire;

namespace {

std::vector<Sigma02Set> sets(std::initializer_list<std::pair<const char*, std::vector<Nat>>> specs) {
  std::vector<Sigma02Set> out;
  for (const auto& [n, p] : specs) out.push_back(sigma02_builtin(n, p));
  return out;
}

std::vector<SeqMap> maps_of(const std::vector<Sigma02Set>& fam) {
  std::vector<SeqMap> out;
  for (const auto& a : fam) out.push_back(a.reduction);
  return out;
}

// Direct, unmemoized unfolding of the control recursion.
std::pair<FinSeq, ControlState> unfold(const std::vector<SeqMap>& fam, const Schedule& sch, const FinSeq& s) {
  FinSeq star;
  ControlState st{sch.at(0), 0};
  for (std::size_t len = 1; len <= s.size(); ++len) {
    FinSeq u = seq_diff(fam[st.index](s.prefix(len)), star);
    if (std::find(u.begin(), u.end(), Nat{0}) == u.end()) {
      star.push_back(1);
    } else {
      star.push_back(0);
      ++st.position;
      st.index = sch.at(st.position);
    }
  }
  return {star, st};
}

}  // namespace

TEST(SMembership, Examples) {
  EXPECT_TRUE(s_membership(parse_point("[1]~const(1)")));
  EXPECT_FALSE(s_membership(parse_point("[]~per(1,0)")));
  EXPECT_TRUE(s_membership(parse_point("[0,0,0]~const(7)")));
}

TEST(Schedules, DefaultShapes) {
  EXPECT_EQ(default_schedule(3).first(7), (std::vector<std::size_t>{0, 1, 2, 0, 1, 2, 0}));
  EXPECT_EQ(default_schedule(1).first(4), (std::vector<std::size_t>{0, 0, 0, 0}));
  EXPECT_EQ(default_schedule(std::nullopt).first(9), (std::vector<std::size_t>{0, 1, 0, 1, 2, 0, 1, 2, 3}));
  EXPECT_THROW(default_schedule(0), std::invalid_argument);
}

TEST(Schedules, StaircaseTruncated) {
  auto s = Schedule::staircase(4);
  EXPECT_EQ(s.first(13), (std::vector<std::size_t>{0, 1, 0, 1, 2, 0, 1, 2, 3, 0, 1, 2, 3}));
  auto omega = Schedule::staircase_omega();
  for (std::size_t k = 0; k < 9; ++k) EXPECT_EQ(s.at(k), omega.at(k));
}

TEST(Schedules, OmegaVisitsEverythingWithoutRepeats) {
  auto s = Schedule::staircase_omega();
  auto v = s.first(2000);
  for (std::size_t k = 0; k + 1 < v.size(); ++k) EXPECT_NE(v[k], v[k + 1]);
  for (std::size_t n = 0; n < 40; ++n) EXPECT_GE(std::count(v.begin(), v.end(), n), 10);
}

TEST(Schedules, CustomValidation) {
  EXPECT_NO_THROW(Schedule::custom(3, {2}, {0, 2, 1}));
  EXPECT_THROW(Schedule::custom(3, {}, {0, 1, 1}), std::invalid_argument);  // adjacent repeat
  EXPECT_THROW(Schedule::custom(3, {}, {0, 1, 0}), std::invalid_argument);  // wrap repeat, and 2 missing
  EXPECT_THROW(Schedule::custom(3, {}, {0, 1}), std::invalid_argument);     // 2 never revisited
  EXPECT_THROW(Schedule::custom(3, {1}, {1, 0, 2}), std::invalid_argument); // prefix into cycle repeat
  EXPECT_THROW(Schedule::custom(2, {5}, {0, 1}), std::invalid_argument);
  EXPECT_NO_THROW(Schedule::custom(1, {}, {0}));
}

TEST(Control, IdentityOnNoZeros) {
  auto phi = build_control({SeqMap::identity()}, default_schedule(1));
  auto x = parse_point("[1]~const(1)");
  for (std::size_t m = 0; m < 12; ++m) EXPECT_EQ(phi->star(x.prefix(m)), FinSeq(std::vector<Nat>(m, 1)));
}

TEST(Control, IdentityOnAllZeros) {
  auto phi = build_control({SeqMap::identity()}, default_schedule(1));
  auto x = parse_point("[]~const(0)");
  for (std::size_t m = 0; m < 12; ++m) {
    EXPECT_EQ(phi->star(x.prefix(m)), FinSeq(std::vector<Nat>(m, 0)));
    EXPECT_EQ(phi->state(x.prefix(m)).position, m);
  }
}

TEST(Control, EmptyPrefixStartsAtFirstScheduleEntry) {
  auto fam = sets({{"nozero", {}}, {"haszero", {}}, {"avoid", {1}}});
  auto phi = build_control(maps_of(fam), Schedule::custom(3, {2}, {0, 1, 2}));
  EXPECT_EQ(phi->star(FinSeq{}), FinSeq{});
  EXPECT_EQ(phi->state(FinSeq{}), (ControlState{2, 0}));
}

TEST(Control, MatchesDirectUnfolding) {
  auto fam = sets({{"zero_count_eq", {1}}, {"first_zero_in", {0, 2}}, {"avoid", {2}}});
  auto sch = Schedule::staircase(3);
  auto phi = build_control(maps_of(fam), sch);
  for (const auto& s : all_sequences_upto(6, 3)) {
    auto [star, st] = unfold(maps_of(fam), sch, s);
    EXPECT_EQ(phi->star(s), star);
    EXPECT_EQ(phi->state(s), st);
  }
}

TEST(Control, StructuralInvariantsExhaustive) {
  auto fam = sets({{"zero_count_eq", {2}}, {"nozero", {}}, {"first_zero_from", {3}}, {"avoid", {1}}});
  for (auto sch : {Schedule::round_robin(4), Schedule::staircase(4)}) {
    auto phi = build_control(maps_of(fam), sch);
    EXPECT_TRUE(validate_monotone(phi->star_map(), 6, 3).certified);
    for (const auto& s : all_sequences_upto(5, 3)) {
      FinSeq st = phi->star(s);
      ASSERT_EQ(st.size(), s.size());
      for (Nat i = 0; i < 3; ++i) {
        FinSeq t = s.append(i);
        FinSeq ext = phi->star(t);
        ASSERT_EQ(ext.size(), st.size() + 1);
        EXPECT_TRUE(st.is_prefix_of(ext));
        EXPECT_LE(ext.back(), 1u);
        EXPECT_EQ(ext.back() == 0, !(phi->state(t) == phi->state(s)));
      }
    }
  }
}

TEST(Control, UncertifiedMemberRejected) {
  auto bad = SeqMap::custom("reverse",
                            [](const FinSeq& s) {
                              std::vector<Nat> v(s.entries().rbegin(), s.entries().rend());
                              return FinSeq(std::move(v));
                            },
                            3, 2);
  EXPECT_THROW(build_control({SeqMap::identity(), bad}, default_schedule(2)), ViolationFound);
  EXPECT_THROW(build_control({SeqMap::identity()}, default_schedule(2)), std::invalid_argument);
  EXPECT_THROW(build_control({}, default_schedule(1)), std::invalid_argument);
}

TEST(Control, ConcurrentQueriesAreDeterministic) {
  auto fam = sets({{"zero_count_eq", {1}}, {"haszero", {}}, {"avoid", {2}}});
  auto shared = build_control(maps_of(fam), default_schedule(3));
  auto fresh = build_control(maps_of(fam), default_schedule(3));
  auto seqs = all_sequences_upto(6, 3);
  std::vector<std::thread> pool;
  for (int t = 0; t < 4; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < seqs.size(); i += 3) shared->star(seqs[seqs.size() - 1 - i]);
    });
  for (auto& th : pool) th.join();
  for (const auto& s : seqs) EXPECT_EQ(shared->star(s), fresh->star(s));
}

TEST(StateTrace, BaseAndConstant) {
  auto phi = build_control({SeqMap::identity()}, default_schedule(1));
  auto t0 = state_trace(*phi, parse_point("[2]~const(2)"), 0);
  ASSERT_EQ(t0.size(), 1u);
  EXPECT_EQ(t0[0].index, 0u);
  auto t5 = state_trace(*phi, parse_point("[3,1]~const(1)"), 5);
  for (const auto& s : t5) EXPECT_EQ(s, t5[0]);
}

TEST(StateTrace, AlternatesOutsideBothSets) {
  auto fam = sets({{"nozero", {}}, {"zero_count_eq", {1}}});
  auto phi = build_control(maps_of(fam), default_schedule(2));
  auto x = parse_point("[]~per(0,1)");
  auto tr = state_trace(*phi, x, 32);
  std::size_t changes = 0;
  for (std::size_t i = 1; i < tr.size(); ++i) changes += !(tr[i] == tr[i - 1]);
  EXPECT_GE(changes, 10u);
  std::set<std::size_t> late;
  for (std::size_t i = 16; i < tr.size(); ++i) late.insert(tr[i].index);
  EXPECT_EQ(late.size(), 2u);
}

TEST(StabilizingPoint, Examples) {
  auto fam = sets({{"identity", {}}});
  auto phi = build_control(maps_of(fam), default_schedule(1));
  std::vector<std::optional<PointPredicate>> truths{fam[0].ground_truth};
  auto a = stabilizing_point(*phi, parse_point("[1]~const(1)"), 10, truths);
  EXPECT_EQ(a.m, 0u);
  EXPECT_EQ(a.status, Stability::ProvenStable);
  auto b = stabilizing_point(*phi, parse_point("[0,1]~const(1)"), 10, truths);
  EXPECT_EQ(b.m, 1u);
  EXPECT_EQ(b.status, Stability::ProvenStable);
  for (std::size_t h = 4; h < 40; ++h)
    EXPECT_EQ(stabilizing_point(*phi, parse_point("[]~per(1,0)"), h, truths).status, Stability::NotStableAtHorizon);
  EXPECT_THROW(stabilizing_point(*phi, Point{}, 0), std::invalid_argument);
}

TEST(StabilizingPoint, HorizonFallbackForTableMembers) {
  std::map<FinSeq, FinSeq> entries;
  for (const auto& s : all_sequences_upto(2, 2)) entries[s] = s;
  auto table_identity = SeqMap::table(entries, 2, 2, SeqMap::Extension::Copy);
  auto phi = build_control({table_identity}, default_schedule(1));
  auto s1 = stabilizing_point(*phi, parse_point("[0,0,1]~const(1)"), 20);
  EXPECT_FALSE(s1.exact);
  EXPECT_EQ(s1.m, 2u);
  EXPECT_EQ(s1.status, Stability::StableThroughHorizon);
  auto s2 = stabilizing_point(*phi, parse_point("[]~per(1,0)"), 20);
  EXPECT_EQ(s2.status, Stability::NotStableAtHorizon);
}

TEST(UnionReduction, SingletonAgreesWithMember) {
  auto fam = sets({{"zero_count_eq", {2}}});
  auto u = union_reduction(fam, default_schedule(1));
  auto rep = verify_union(*u.control, fam, testing_support::random_points(50, 4, 6, 3, 3), 64);
  EXPECT_TRUE(rep.passed());
  EXPECT_EQ(rep.inexact, 0u);
}

TEST(UnionReduction, DisjunctionAndEmptyMember) {
  auto pts = testing_support::random_points(80, 8, 6, 3, 3);
  auto fam = sets({{"nozero", {}}, {"first_zero_in", {0, 3}}});
  auto u = union_reduction(fam, default_schedule(2));
  for (const auto& x : pts) EXPECT_EQ((*u.ground_truth)(x), fam[0].ground_truth.value()(x) || fam[1].ground_truth.value()(x));
  EXPECT_TRUE(verify_union(*u.control, fam, pts, 64).passed());

  auto with_empty = sets({{"empty", {}}, {"avoid", {2}}});
  auto v = union_reduction(with_empty, default_schedule(2));
  for (const auto& x : pts) EXPECT_EQ((*v.ground_truth)(x), with_empty[1].ground_truth.value()(x));
  EXPECT_TRUE(verify_union(*v.control, with_empty, pts, 64).passed());
}

TEST(UnionReduction, EmptyOnlyFamily) {
  auto fam = sets({{"empty", {}}});
  auto u = union_reduction(fam, default_schedule(1));
  auto rep = verify_union(*u.control, fam, testing_support::random_points(30, 2), 64);
  ASSERT_TRUE(rep.passed());
  for (const auto& r : rep.rows) {
    EXPECT_FALSE(r.member);
    EXPECT_FALSE(r.stable);
  }
}

TEST(UnionReduction, StabilizedStateBelongsToItsSet) {
  auto fam = sets({{"zero_count_eq", {0}}, {"zero_count_eq", {1}}, {"zero_count_eq", {2}}});
  auto u = union_reduction(fam, default_schedule(3));
  auto x = parse_point("[1,0,2]~const(3)");
  auto rep = verify_union(*u.control, fam, {x}, 64);
  ASSERT_TRUE(rep.passed());
  ASSERT_TRUE(rep.rows[0].final_state);
  EXPECT_EQ(rep.rows[0].final_state->index, 1u);
}

TEST(UnionReduction, ExactRunAgreesWithMemoizedStar) {
  auto fam = sets({{"zero_count_ge", {2}}, {"cylinder", {1}}, {"avoid", {0}}});
  auto phi = build_control(maps_of(fam), Schedule::staircase(3));
  for (const auto& x : testing_support::random_points(40, 31)) {
    auto run = analyze_exact(*phi, x);
    ASSERT_TRUE(run);
    FinSeq star = phi->star(x.prefix(run->star_prefix.size()));
    EXPECT_EQ(star.entries(), run->star_prefix);
  }
}

TEST(UnionReduction, OmegaScheduleNeedsInfiniteFamily) {
  auto fam = sets({{"nozero", {}}, {"haszero", {}}});
  EXPECT_THROW(build_control(maps_of(fam), Schedule::staircase_omega()), std::invalid_argument);
}
