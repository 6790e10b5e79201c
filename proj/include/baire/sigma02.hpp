#pragma once

// Sigma^0_2 sets as reductions to S, and the control-function combinator that
// turns reductions of A_0..A_{N-1} into a single reduction of their union.
//
// Given reductions phi_n and a schedule <n_k> visiting every index infinitely
// often with n_k != n_{k+1}, the control function star and state sigma are
//   star(empty) = empty,   sigma(empty) = n_0
//   star(s^i)   = star(s)^1, sigma unchanged       if phi_{sigma(s)}(s^i) - star(s) has no 0
//   star(s^i)   = star(s)^0, sigma advances to n_{k+1}  otherwise.
// The state is tracked as (index, schedule position k).

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "baire/builtins.hpp"
#include "baire/seqmap.hpp"

namespace baire {

// Enumeration k -> n_k of indices below N (or of all naturals).
class Schedule {
 public:
  static Schedule round_robin(std::size_t n) {
    if (n == 0) throw std::invalid_argument("schedule over zero indices");
    std::vector<std::size_t> cyc(n);
    for (std::size_t i = 0; i < n; ++i) cyc[i] = i;
    return Schedule(n, {}, std::move(cyc), "rr");
  }

  // Blocks 0..1, 0..2, ..., each one longer, capped at 0..N-1 which then repeats.
  static Schedule staircase(std::size_t n) {
    if (n == 0) throw std::invalid_argument("schedule over zero indices");
    if (n == 1) return Schedule(1, {}, {0}, "stair");
    std::vector<std::size_t> pre;
    for (std::size_t j = 1; j + 1 < n; ++j)
      for (std::size_t i = 0; i <= j; ++i) pre.push_back(i);
    std::vector<std::size_t> cyc(n);
    for (std::size_t i = 0; i < n; ++i) cyc[i] = i;
    return Schedule(n, std::move(pre), std::move(cyc), "stair");
  }

  // 0,1, 0,1,2, 0,1,2,3, ... over all naturals.
  static Schedule staircase_omega() {
    Schedule s;
    s.omega_ = true;
    s.name_ = "stair-omega";
    return s;
  }

  // prefix followed by cycle repeated forever. Schedules with equal adjacent
  // entries (N > 1) or missing indices are rejected.
  static Schedule custom(std::size_t n, std::vector<std::size_t> prefix, std::vector<std::size_t> cycle) {
    return Schedule(n, std::move(prefix), std::move(cycle), "custom");
  }

  std::size_t at(std::size_t k) const {
    if (omega_) {
      std::size_t block = 1;
      while (k > block) {
        k -= block + 1;
        ++block;
      }
      return k;
    }
    if (k < prefix_.size()) return prefix_[k];
    return cycle_[(k - prefix_.size()) % cycle_.size()];
  }

  std::vector<std::size_t> first(std::size_t count) const {
    std::vector<std::size_t> out(count);
    for (std::size_t k = 0; k < count; ++k) out[k] = at(k);
    return out;
  }

  // nullopt stands for omega.
  std::optional<std::size_t> size() const {
    if (omega_) return std::nullopt;
    return n_;
  }
  bool eventually_periodic() const { return !omega_; }
  const std::string& name() const { return name_; }

  // Positions with equal phase are followed by identical futures.
  std::size_t phase(std::size_t k) const {
    if (omega_) throw std::logic_error("omega schedule has no finite phase");
    if (k < prefix_.size()) return k;
    return prefix_.size() + (k - prefix_.size()) % cycle_.size();
  }

 private:
  Schedule() = default;
  Schedule(std::size_t n, std::vector<std::size_t> prefix, std::vector<std::size_t> cycle, std::string name)
      : n_(n), prefix_(std::move(prefix)), cycle_(std::move(cycle)), name_(std::move(name)) {
    if (n_ == 0) throw std::invalid_argument("schedule over zero indices");
    if (cycle_.empty()) throw std::invalid_argument("schedule cycle must be nonempty");
    std::vector<bool> seen(n_, false);
    for (auto i : prefix_)
      if (i >= n_) throw std::invalid_argument("schedule index out of range");
    for (auto i : cycle_) {
      if (i >= n_) throw std::invalid_argument("schedule index out of range");
      seen[i] = true;
    }
    for (bool b : seen)
      if (!b) throw std::invalid_argument("schedule does not repeat every index");
    if (n_ > 1) {
      std::size_t span = prefix_.size() + cycle_.size() + 1;
      for (std::size_t k = 0; k + 1 < span; ++k)
        if (at(k) == at(k + 1)) throw std::invalid_argument("schedule repeats an index at adjacent positions");
    }
  }

  std::size_t n_ = 0;
  bool omega_ = false;
  std::vector<std::size_t> prefix_;
  std::vector<std::size_t> cycle_;
  std::string name_;
};

// N = 0 is rejected; nullopt requests the omega staircase.
inline Schedule default_schedule(std::optional<std::size_t> n) {
  if (!n) return Schedule::staircase_omega();
  return Schedule::round_robin(*n);
}

struct ControlState {
  std::size_t index = 0;
  std::size_t position = 0;
  friend bool operator==(const ControlState&, const ControlState&) = default;
};

class ControlFunction;

struct Sigma02Set {
  SeqMap reduction;
  std::optional<PointPredicate> ground_truth;
  std::shared_ptr<const ControlFunction> control;  // set for unions built here
};

inline Sigma02Set sigma02_builtin(const std::string& name, const std::vector<Nat>& params = {}) {
  auto b = make_builtin(name, params);
  return {b.reduction, b.ground_truth, nullptr};
}

// The star map is memoized per prefix behind an internal mutex, so concurrent
// queries are safe and results do not depend on interleaving.
class ControlFunction : public std::enable_shared_from_this<ControlFunction> {
 public:
  ControlFunction(std::vector<SeqMap> family, Schedule schedule)
      : family_(std::move(family)), schedule_(std::move(schedule)) {
    if (family_.empty()) throw std::invalid_argument("control function over an empty family");
    auto n = schedule_.size();
    if (!n) throw std::invalid_argument("an omega schedule needs an infinite family");
    if (*n != family_.size()) throw std::invalid_argument("schedule size does not match family size");
    for (const auto& phi : family_)
      if (phi.bounded()) require_monotone(phi, phi.declared_depth(), phi.declared_branch());
    memo_.emplace(FinSeq{}, Node{FinSeq{}, ControlState{schedule_.at(0), 0}});
  }

  FinSeq star(const FinSeq& s) const { return node(s).star; }
  ControlState state(const FinSeq& s) const { return node(s).state; }

  const std::vector<SeqMap>& family() const { return family_; }
  const Schedule& schedule() const { return schedule_; }

  SeqMap star_map() const {
    auto self = shared_from_this();
    return SeqMap::derived("control", [self](const FinSeq& s) { return self->star(s); }, true);
  }

  std::size_t memo_size() const {
    std::lock_guard lock(mu_);
    return memo_.size();
  }

 private:
  struct Node {
    FinSeq star;
    ControlState state;
  };

  Node node(const FinSeq& s) const {
    std::lock_guard lock(mu_);
    std::size_t known = s.size();
    while (!memo_.count(s.prefix(known))) --known;
    Node cur = memo_.at(s.prefix(known));
    for (std::size_t len = known; len < s.size(); ++len) {
      FinSeq ext = s.prefix(len + 1);
      FinSeq u = seq_diff(family_[cur.state.index](ext), cur.star);
      Node next = cur;
      if (!u.contains(0)) {
        next.star.push_back(1);
      } else {
        next.star.push_back(0);
        next.state.position += 1;
        next.state.index = schedule_.at(next.state.position);
        if (next.state.index >= family_.size()) throw std::out_of_range("schedule index beyond family");
      }
      memo_.emplace(ext, next);
      cur = std::move(next);
    }
    return cur;
  }

  std::vector<SeqMap> family_;
  Schedule schedule_;
  mutable std::mutex mu_;
  mutable std::unordered_map<FinSeq, Node, FinSeqHash> memo_;
};

inline std::shared_ptr<const ControlFunction> build_control(std::vector<SeqMap> family, Schedule schedule) {
  return std::make_shared<const ControlFunction>(std::move(family), std::move(schedule));
}

inline std::vector<ControlState> state_trace(const ControlFunction& phi, const Point& x, std::size_t m) {
  std::vector<ControlState> out;
  out.reserve(m + 1);
  FinSeq s = x.prefix(m);
  for (std::size_t i = 0; i <= m; ++i) out.push_back(phi.state(s.prefix(i)));
  return out;
}

// Exact run of a control function over Mealy members on an eventually
// periodic point: the joint configuration (input phase, member states,
// schedule phase) eventually repeats, after which the output is periodic.
struct ExactRun {
  bool in_s = false;               // f_star(x) in S, equivalently the trace stabilizes
  std::size_t stabilizing_point = 0;  // meaningful when in_s
  ControlState final_state;        // state from the stabilizing point on, when in_s
  std::size_t cycle_start = 0;
  std::size_t cycle_length = 0;
  std::vector<Nat> star_prefix;    // star entries up to the end of the first cycle
};

inline std::optional<ExactRun> analyze_exact(const ControlFunction& phi, const Point& x,
                                             std::size_t max_steps = std::size_t{1} << 20) {
  const auto& fam = phi.family();
  if (!phi.schedule().eventually_periodic()) return std::nullopt;
  for (const auto& m : fam)
    if (!m.mealy()) return std::nullopt;

  std::vector<std::uint64_t> q(fam.size());
  for (std::size_t n = 0; n < fam.size(); ++n) q[n] = fam[n].mealy()->initial;
  std::size_t k = 0;
  const std::size_t head = x.head().size();
  std::map<std::vector<std::uint64_t>, std::size_t> seen;
  ExactRun run;
  for (std::size_t p = 0; p < max_steps; ++p) {
    std::vector<std::uint64_t> key;
    key.reserve(q.size() + 3);
    key.push_back(p < head ? 0 : 1);
    key.push_back(p < head ? p : (p - head) % x.period());
    key.push_back(phi.schedule().phase(k));
    key.insert(key.end(), q.begin(), q.end());
    auto [it, fresh] = seen.emplace(std::move(key), p);
    if (!fresh) {
      run.cycle_start = it->second;
      run.cycle_length = p - it->second;
      bool zero_in_cycle = false;
      for (std::size_t j = run.cycle_start; j < p; ++j) zero_in_cycle |= run.star_prefix[j] == 0;
      run.in_s = !zero_in_cycle;
      if (run.in_s) {
        std::size_t last = 0;
        std::size_t zeros = 0;
        for (std::size_t j = 0; j < run.cycle_start; ++j)
          if (run.star_prefix[j] == 0) {
            last = j + 1;
            ++zeros;
          }
        run.stabilizing_point = last;
        run.final_state = {phi.schedule().at(zeros), zeros};
      }
      return run;
    }
    Nat v = x.at(p);
    std::size_t active = phi.schedule().at(k);
    Nat active_out = 0;
    for (std::size_t n = 0; n < fam.size(); ++n) {
      auto [nq, o] = fam[n].mealy()->step(q[n], v);
      q[n] = nq;
      if (n == active) active_out = o;
    }
    Nat entry = active_out != 0 ? 1 : 0;
    run.star_prefix.push_back(entry);
    if (entry == 0) ++k;
  }
  return std::nullopt;
}

enum class Stability { ProvenStable, StableThroughHorizon, NotStableAtHorizon };

inline const char* to_string(Stability s) {
  switch (s) {
    case Stability::ProvenStable: return "proven-stable";
    case Stability::StableThroughHorizon: return "stable-through-horizon";
    case Stability::NotStableAtHorizon: return "not-stable-at-horizon";
  }
  return "?";
}

struct StabilizingPoint {
  std::size_t m = 0;
  Stability status = Stability::NotStableAtHorizon;
  ControlState state;
  bool exact = false;
};

// Least m from which the state trace is constant. Exact when every member is a
// Mealy machine and the schedule is eventually periodic; otherwise the final
// constant run must cover at least the second half of the horizon.
inline StabilizingPoint stabilizing_point(const ControlFunction& phi, const Point& x, std::size_t horizon,
                                          const std::vector<std::optional<PointPredicate>>& truths = {}) {
  if (horizon < 1) throw std::invalid_argument("stabilizing_point: horizon must be >= 1");
  auto trace = state_trace(phi, x, horizon);
  std::size_t m = horizon;
  while (m > 0 && trace[m - 1] == trace[horizon]) --m;

  auto confirmed = [&](std::size_t index) -> std::optional<bool> {
    if (index < truths.size() && truths[index]) return (*truths[index])(x);
    return std::nullopt;
  };

  StabilizingPoint out;
  if (auto run = analyze_exact(phi, x)) {
    out.exact = true;
    if (!run->in_s || run->stabilizing_point > horizon) {
      out.m = m;
      out.state = trace[horizon];
      out.status = Stability::NotStableAtHorizon;
      return out;
    }
    out.m = run->stabilizing_point;
    out.state = run->final_state;
    auto c = confirmed(out.state.index);
    out.status = (!c || *c) ? Stability::ProvenStable : Stability::StableThroughHorizon;
    return out;
  }
  out.m = m;
  out.state = trace[horizon];
  if (2 * m > horizon) {
    out.status = Stability::NotStableAtHorizon;
    return out;
  }
  auto c = confirmed(out.state.index);
  out.status = (c && *c) ? Stability::ProvenStable : Stability::StableThroughHorizon;
  return out;
}

// Reduction of the union of the family: the star map of their control function.
inline Sigma02Set union_reduction(const std::vector<Sigma02Set>& family, Schedule schedule) {
  if (family.empty()) throw std::invalid_argument("union of an empty family");
  std::vector<SeqMap> maps;
  std::vector<PointPredicate> truths;
  bool all_truths = true;
  for (const auto& a : family) {
    maps.push_back(a.reduction);
    if (a.ground_truth)
      truths.push_back(*a.ground_truth);
    else
      all_truths = false;
  }
  auto control = build_control(std::move(maps), std::move(schedule));
  Sigma02Set out{control->star_map(), std::nullopt, control};
  if (all_truths)
    out.ground_truth = [truths](const Point& x) {
      for (const auto& t : truths)
        if (t(x)) return true;
      return false;
    };
  return out;
}

struct UnionSampleVerdict {
  Point x;
  bool member = false;       // some ground truth holds
  bool exact = false;        // S-membership of the induced point decided exactly
  bool induced_in_s = false;
  bool stable = false;
  std::optional<ControlState> final_state;
  bool final_member = false;  // ground truth of the stabilized state's set
  bool ok = false;
  std::string note;
};

struct UnionReport {
  std::vector<UnionSampleVerdict> rows;
  std::size_t failures = 0;
  std::size_t inexact = 0;
  bool passed() const { return failures == 0; }
};

// Checks, per sample: induced point in S <=> membership, trace stable <=>
// membership, and membership of the stabilized state's own set.
inline UnionReport verify_union(const ControlFunction& phi, const std::vector<Sigma02Set>& family,
                                const std::vector<Point>& samples, std::size_t horizon) {
  if (family.size() != phi.family().size()) throw std::invalid_argument("verify_union: family size mismatch");
  std::vector<std::optional<PointPredicate>> truths;
  for (const auto& a : family) {
    if (!a.ground_truth) throw std::invalid_argument("verify_union: every member needs a ground truth");
    truths.push_back(a.ground_truth);
  }
  UnionReport rep;
  for (const auto& x : samples) {
    UnionSampleVerdict v;
    v.x = x;
    for (const auto& t : truths) v.member = v.member || (*t)(x);
    auto run = analyze_exact(phi, x);
    if (run) {
      v.exact = true;
      v.induced_in_s = run->in_s;
      v.stable = run->in_s;
      if (run->in_s) v.final_state = run->final_state;
      // The memoized recursion must agree with the exact run.
      std::size_t check = std::min(run->star_prefix.size(), horizon);
      FinSeq star = phi.star(x.prefix(check));
      for (std::size_t i = 0; i < check; ++i)
        if (star[i] != run->star_prefix[i]) v.note = "memoized star disagrees with exact run";
    } else {
      ++rep.inexact;
      auto sp = stabilizing_point(phi, x, horizon, truths);
      v.stable = sp.status != Stability::NotStableAtHorizon;
      v.induced_in_s = v.stable;
      if (v.stable) v.final_state = sp.state;
    }
    if (v.final_state) v.final_member = (*truths[v.final_state->index])(x);
    v.ok = v.note.empty() && v.induced_in_s == v.member && v.stable == v.member && (!v.stable || v.final_member);
    if (!v.ok && v.note.empty()) v.note = "equivalence violated";
    if (!v.ok) ++rep.failures;
    rep.rows.push_back(std::move(v));
  }
  return rep;
}

}  // namespace baire
