#pragma once

// Built-in length-preserving reductions to S = {x : x(m) != 0 for almost all m},
// each paired with a decidable membership test on eventually periodic points
// for the set it reduces.
//
//   identity                 S itself
//   full / empty             the whole space / the empty set
//   avoid c                  finitely many entries equal to c
//   zero_count_eq j          exactly j zeros
//   zero_count_ge j          at least j zeros (infinitely many counts)
//   nozero / haszero         no zero at all / some zero
//   first_zero_in lo hi      least zero position in [lo, hi)
//   first_zero_from lo       least zero position >= lo
//   cylinder s...            points extending s
//   not_cylinder s...        points not extending s
//
// `shift k` (drop the first k entries) is also available as a map; it is not a
// reduction and has no membership test.

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "baire/seqmap.hpp"

namespace baire {

using PointPredicate = std::function<bool(const Point&)>;

struct BuiltinSet {
  SeqMap reduction;
  PointPredicate ground_truth;
};

namespace detail {

inline void need_params(const std::string& name, const std::vector<Nat>& p, std::size_t n) {
  if (p.size() != n)
    throw std::invalid_argument("builtin " + name + " expects " + std::to_string(n) + " parameter(s)");
}

// Outputs 1 exactly while the zero count read so far satisfies `ok`.
inline Mealy zero_counter(Nat cap, std::function<bool(Nat)> ok) {
  return Mealy{0, [cap, ok](std::uint64_t q, Nat v) {
                 Nat c = std::min<Nat>(q + (v == 0 ? 1 : 0), cap);
                 return std::pair<std::uint64_t, Nat>{c, ok(c) ? 1 : 0};
               }};
}

// States: 0 = no zero yet, 1 = first zero inside the window, 2 = outside.
// The position counter is packed above the status and saturates at `cap`.
inline Mealy first_zero_window(Nat lo, std::optional<Nat> hi) {
  Nat cap = hi ? *hi : lo;
  return Mealy{0, [lo, hi, cap](std::uint64_t q, Nat v) {
                 std::uint64_t status = q & 3;
                 Nat pos = q >> 2;
                 if (status == 0 && v == 0) {
                   bool inside = pos >= lo && (!hi || pos < *hi);
                   status = inside ? 1 : 2;
                 }
                 Nat next_pos = std::min<Nat>(pos + 1, cap);
                 return std::pair<std::uint64_t, Nat>{(next_pos << 2) | status, status == 1 ? 1 : 0};
               }};
}

// State: number of entries matched so far, or lh(s)+1 once a mismatch was read.
inline Mealy cylinder_tracker(FinSeq s, bool negate) {
  return Mealy{0, [s, negate](std::uint64_t q, Nat v) {
                 std::uint64_t failed = s.size() + 1;
                 std::uint64_t next = q;
                 if (q < s.size()) next = (v == s[q]) ? q + 1 : failed;
                 bool in = next != failed;
                 return std::pair<std::uint64_t, Nat>{next, (in != negate) ? 1 : 0};
               }};
}

}  // namespace detail

inline BuiltinSet make_builtin(const std::string& name, const std::vector<Nat>& p) {
  using detail::need_params;
  if (name == "identity") {
    need_params(name, p, 0);
    return {SeqMap::identity(), [](const Point& x) { return !x.occurs_cofinally(0); }};
  }
  if (name == "full" || name == "empty") {
    need_params(name, p, 0);
    Nat out = name == "full" ? 1 : 0;
    return {SeqMap::builtin(name, p, Mealy{0, [out](std::uint64_t q, Nat) { return std::pair{q, out}; }}),
            [out](const Point&) { return out == 1; }};
  }
  if (name == "avoid") {
    need_params(name, p, 1);
    Nat c = p[0];
    return {SeqMap::builtin(name, p,
                            Mealy{0, [c](std::uint64_t q, Nat v) { return std::pair<std::uint64_t, Nat>{q, v != c}; }}),
            [c](const Point& x) { return !x.occurs_cofinally(c); }};
  }
  if (name == "zero_count_eq" || name == "nozero") {
    Nat j = 0;
    if (name == "nozero") {
      need_params(name, p, 0);
    } else {
      need_params(name, p, 1);
      j = p[0];
    }
    return {SeqMap::builtin(name, p, detail::zero_counter(j + 1, [j](Nat c) { return c == j; })),
            [j](const Point& x) {
              auto c = x.count_of(0);
              return c && *c == j;
            }};
  }
  if (name == "zero_count_ge") {
    need_params(name, p, 1);
    Nat j = p[0];
    return {SeqMap::builtin(name, p, detail::zero_counter(j, [j](Nat c) { return c >= j; })),
            [j](const Point& x) {
              auto c = x.count_of(0);
              return !c || *c >= j;
            }};
  }
  if (name == "first_zero_in" || name == "first_zero_from" || name == "haszero") {
    Nat lo = 0;
    std::optional<Nat> hi;
    if (name == "first_zero_in") {
      need_params(name, p, 2);
      lo = p[0];
      hi = p[1];
    } else if (name == "first_zero_from") {
      need_params(name, p, 1);
      lo = p[0];
    } else {
      need_params(name, p, 0);
    }
    return {SeqMap::builtin(name, p, detail::first_zero_window(lo, hi)), [lo, hi](const Point& x) {
              auto f = x.first_index_of(0);
              return f && *f >= lo && (!hi || *f < *hi);
            }};
  }
  if (name == "cylinder" || name == "not_cylinder") {
    FinSeq s{std::vector<Nat>(p)};
    bool neg = name == "not_cylinder";
    return {SeqMap::builtin(name, p, detail::cylinder_tracker(s, neg)), [s, neg](const Point& x) {
              return (x.prefix(s.size()) == s) != neg;
            }};
  }
  throw std::invalid_argument("unknown builtin set: " + name);
}

// Drops the first k entries; Lipschitz with constant 2^k.
inline SeqMap shift_map(std::size_t k) {
  return SeqMap::builtin_rule("shift", {k},
                              [k](const FinSeq& s) {
                                if (s.size() <= k) return FinSeq{};
                                return seq_diff(s, s.prefix(k));
                              },
                              false);
}

inline SeqMap make_builtin_map(const std::string& name, const std::vector<Nat>& p) {
  if (name == "shift") {
    detail::need_params(name, p, 1);
    return shift_map(p[0]);
  }
  return make_builtin(name, p).reduction;
}

// S-membership of an eventually periodic point: decided by its tail.
inline bool s_membership(const Point& x) { return !x.occurs_cofinally(0); }

}  // namespace baire
