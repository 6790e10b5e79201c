#pragma once

// Finite sequences of naturals, finitely described points of Baire space,
// dyadic distances and the pairing function.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/rational.hpp>

namespace baire {

using Nat = std::uint64_t;
using Rational = boost::rational<std::int64_t>;

// An element of the tree of finite sequences.
class FinSeq {
 public:
  FinSeq() = default;
  FinSeq(std::initializer_list<Nat> init) : entries_(init) {}
  explicit FinSeq(std::vector<Nat> entries) : entries_(std::move(entries)) {}

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  Nat operator[](std::size_t i) const { return entries_[i]; }
  Nat back() const { return entries_.back(); }
  const std::vector<Nat>& entries() const { return entries_; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  // s restricted to n, for n <= lh(s).
  FinSeq prefix(std::size_t n) const {
    if (n > size()) throw std::out_of_range("FinSeq::prefix beyond length");
    return FinSeq(std::vector<Nat>(entries_.begin(), entries_.begin() + n));
  }

  // s followed by i.
  FinSeq append(Nat i) const {
    FinSeq out = *this;
    out.entries_.push_back(i);
    return out;
  }

  FinSeq concat(const FinSeq& other) const {
    FinSeq out = *this;
    out.entries_.insert(out.entries_.end(), other.begin(), other.end());
    return out;
  }

  void push_back(Nat i) { entries_.push_back(i); }

  bool is_prefix_of(const FinSeq& t) const {
    return size() <= t.size() && std::equal(begin(), end(), t.begin());
  }

  bool comparable(const FinSeq& t) const { return is_prefix_of(t) || t.is_prefix_of(*this); }

  bool contains(Nat v) const { return std::find(begin(), end(), v) != end(); }

  friend bool operator==(const FinSeq&, const FinSeq&) = default;
  friend auto operator<=>(const FinSeq&, const FinSeq&) = default;

 private:
  std::vector<Nat> entries_;
};

struct FinSeqHash {
  std::size_t operator()(const FinSeq& s) const {
    std::size_t h = 0xcbf29ce484222325ULL ^ s.size();
    for (Nat v : s) h = (h ^ std::hash<Nat>{}(v)) * 0x100000001b3ULL;
    return h;
  }
};

// t - s: empty when lh(t) < lh(s), otherwise the part of t beyond lh(s).
// Whether s is really a prefix of t is not consulted.
inline FinSeq seq_diff(const FinSeq& t, const FinSeq& s) {
  if (t.size() < s.size()) return {};
  return FinSeq(std::vector<Nat>(t.begin() + static_cast<std::ptrdiff_t>(s.size()), t.end()));
}

// <i,j> = 2^i (2j+1) - 1
inline Nat pair(Nat i, Nat j) {
  if (i >= 63 || j > ((Nat{1} << (63 - i)) - 1) / 2) throw std::overflow_error("pair: out of range");
  return (Nat{1} << i) * (2 * j + 1) - 1;
}

inline std::pair<Nat, Nat> unpair(Nat n) {
  if (n == ~Nat{0}) throw std::overflow_error("unpair: out of range");
  Nat m = n + 1;
  Nat i = 0;
  while ((m & 1) == 0) {
    m >>= 1;
    ++i;
  }
  return {i, (m - 1) / 2};
}

// Exact values 0 or 2^e (e may be negative). Distances live in {0} U {2^-n : n >= 0};
// Lipschitz constants may exceed 1.
class Dyadic {
 public:
  constexpr Dyadic() = default;
  static constexpr Dyadic zero() { return Dyadic(); }
  static constexpr Dyadic one() { return pow2(0); }
  static constexpr Dyadic pow2(int e) {
    Dyadic d;
    d.zero_ = false;
    d.exp_ = e;
    return d;
  }
  // 2^-n
  static constexpr Dyadic inv_pow2(std::size_t n) { return pow2(-static_cast<int>(n)); }

  constexpr bool is_zero() const { return zero_; }
  constexpr int exponent() const { return exp_; }

  friend constexpr bool operator==(const Dyadic& a, const Dyadic& b) {
    return a.zero_ == b.zero_ && (a.zero_ || a.exp_ == b.exp_);
  }
  friend constexpr std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) {
    if (a.zero_ || b.zero_) return (!a.zero_) <=> (!b.zero_);
    return a.exp_ <=> b.exp_;
  }
  friend constexpr Dyadic operator*(const Dyadic& a, const Dyadic& b) {
    if (a.zero_ || b.zero_) return zero();
    return pow2(a.exp_ + b.exp_);
  }

  Rational to_rational() const {
    if (zero_) return Rational(0);
    if (exp_ > 62 || exp_ < -62) throw std::overflow_error("Dyadic exponent out of rational range");
    return exp_ >= 0 ? Rational(std::int64_t{1} << exp_) : Rational(1, std::int64_t{1} << (-exp_));
  }

  std::string to_string() const {
    if (zero_) return "0";
    if (exp_ == 0) return "1";
    return "2^" + std::to_string(exp_);
  }

 private:
  bool zero_ = true;
  int exp_ = 0;
};

// q compared with 2^e, exactly.
inline std::strong_ordering compare(const Rational& q, const Dyadic& d) {
  if (d.is_zero()) return q.numerator() <=> 0;
  if (q.numerator() <= 0) return std::strong_ordering::less;
  int e = d.exponent();
  if (e >= 62) return std::strong_ordering::less;
  if (e <= -62) return std::strong_ordering::greater;
  Rational dv = d.to_rational();
  if (q < dv) return std::strong_ordering::less;
  if (q > dv) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

// Eventually periodic element of Baire space: head followed by a repeated cycle.
class Point {
 public:
  enum class TailKind { Constant, Periodic };

  Point() : cycle_{0} {}

  static Point constant(FinSeq head, Nat c) { return Point(std::move(head), TailKind::Constant, {c}); }
  static Point periodic(FinSeq head, std::vector<Nat> period) {
    if (period.empty()) throw std::invalid_argument("Point: empty period");
    return Point(std::move(head), TailKind::Periodic, std::move(period));
  }

  const FinSeq& head() const { return head_; }
  TailKind tail_kind() const { return kind_; }
  const std::vector<Nat>& cycle() const { return cycle_; }
  std::size_t period() const { return cycle_.size(); }

  Nat at(std::size_t m) const {
    if (m < head_.size()) return head_[m];
    return cycle_[(m - head_.size()) % cycle_.size()];
  }

  FinSeq prefix(std::size_t n) const {
    std::vector<Nat> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = at(i);
    return FinSeq(std::move(out));
  }

  // Some entry equal to v occurs at infinitely many positions.
  bool occurs_cofinally(Nat v) const { return std::find(cycle_.begin(), cycle_.end(), v) != cycle_.end(); }
  // Number of positions holding v, when finite.
  std::optional<std::size_t> count_of(Nat v) const {
    if (occurs_cofinally(v)) return std::nullopt;
    return static_cast<std::size_t>(std::count(head_.begin(), head_.end(), v));
  }
  // Least position holding v, if any.
  std::optional<std::size_t> first_index_of(Nat v) const {
    for (std::size_t i = 0; i < head_.size(); ++i)
      if (head_[i] == v) return i;
    for (std::size_t i = 0; i < cycle_.size(); ++i)
      if (cycle_[i] == v) return head_.size() + i;
    return std::nullopt;
  }

  // Prefix ~ this: the point with `s` prepended.
  Point prepend(const FinSeq& s) const {
    Point p = *this;
    p.head_ = s.concat(head_);
    return p;
  }

  // Structural equality of descriptions (not of induced sequences).
  friend bool operator==(const Point&, const Point&) = default;

 private:
  Point(FinSeq head, TailKind kind, std::vector<Nat> cycle)
      : head_(std::move(head)), kind_(kind), cycle_(std::move(cycle)) {}

  FinSeq head_;
  TailKind kind_ = TailKind::Constant;
  std::vector<Nat> cycle_;
};

inline bool point_eq_to_depth(const Point& x, const Point& y, std::size_t depth) {
  for (std::size_t i = 0; i < depth; ++i)
    if (x.at(i) != y.at(i)) return false;
  return true;
}

// Length past which agreement of the two descriptions is equality of sequences,
// or nullopt when that length exceeds `cap`.
inline std::optional<std::size_t> decisive_length(const Point& x, const Point& y, std::size_t cap) {
  std::size_t px = x.period(), py = y.period();
  std::size_t g = std::gcd(px, py);
  std::size_t l = px / g;
  if (l != 0 && py > cap / l) return std::nullopt;
  std::size_t len = std::max(x.head().size(), y.head().size()) + l * py;
  if (len > cap) return std::nullopt;
  return len;
}

// Exact equality of the induced sequences.
inline bool point_eq(const Point& x, const Point& y) {
  auto len = decisive_length(x, y, std::size_t{1} << 40);
  if (!len) throw std::overflow_error("point_eq: periods too large");
  return point_eq_to_depth(x, y, *len);
}

struct Distance {
  Dyadic value;
  bool exact = true;
  friend bool operator==(const Distance&, const Distance&) = default;
};

// d'(x,y) = 2^-n where n is the length of the longest common prefix.
inline Distance ultrametric_distance(const Point& x, const Point& y, std::size_t horizon) {
  if (horizon < 1) throw std::invalid_argument("ultrametric_distance: horizon must be >= 1");
  for (std::size_t i = 0; i < horizon; ++i)
    if (x.at(i) != y.at(i)) return {Dyadic::inv_pow2(i), true};
  constexpr std::size_t kTailWorkCap = std::size_t{1} << 22;
  auto len = decisive_length(x, y, kTailWorkCap);
  if (!len) return {Dyadic::inv_pow2(horizon), false};
  for (std::size_t i = horizon; i < *len; ++i)
    if (x.at(i) != y.at(i)) return {Dyadic::inv_pow2(i), true};
  return {Dyadic::zero(), true};
}

// d / (1 + d)
inline Rational metric_normalize(const Rational& d) {
  if (d < 0) throw std::invalid_argument("metric_normalize: negative distance");
  return d / (Rational(1) + d);
}

// y / (1 - y), inverse of metric_normalize on [0,1).
inline Rational metric_denormalize(const Rational& y) {
  if (y < 0 || y >= 1) throw std::invalid_argument("metric_denormalize: argument outside [0,1)");
  return y / (Rational(1) - y);
}

// Truncated alphabet {0..B-1} plus a bucket symbol B standing for every entry >= B.
inline Nat bucket(Nat v, Nat branch) { return std::min(v, branch); }

inline FinSeq bucketed_prefix(const Point& x, std::size_t n, Nat branch) {
  std::vector<Nat> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = bucket(x.at(i), branch);
  return FinSeq(std::move(out));
}

// All sequences of length exactly n with entries < alphabet, in lexicographic order.
inline std::vector<FinSeq> all_sequences(std::size_t n, Nat alphabet) {
  std::vector<FinSeq> out{FinSeq{}};
  for (std::size_t len = 0; len < n; ++len) {
    std::vector<FinSeq> next;
    next.reserve(out.size() * alphabet);
    for (const auto& s : out)
      for (Nat i = 0; i < alphabet; ++i) next.push_back(s.append(i));
    out = std::move(next);
  }
  return out;
}

// All sequences of length <= n with entries < alphabet, shortest first.
inline std::vector<FinSeq> all_sequences_upto(std::size_t n, Nat alphabet) {
  std::vector<FinSeq> out;
  for (std::size_t len = 0; len <= n; ++len) {
    auto level = all_sequences(len, alphabet);
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

}  // namespace baire
