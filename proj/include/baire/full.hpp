#pragma once

// Full sets and full functions on Baire space over a truncated alphabet:
// entries 0..B-1 stand for themselves and the bucket symbol B for every entry
// >= B. A depth-m object is a table over the (B+1)^m bucketed prefixes, so its
// preimages are unions of cylinders N_{x|m} = B(x, 2^-(m-1)).

#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "baire/borel.hpp"
#include "baire/seq.hpp"
#include "baire/seqmap.hpp"
#include "baire/text.hpp"

namespace baire {

namespace detail {

inline std::size_t grid_size(std::size_t depth, Nat branch) {
  std::size_t n = 1;
  for (std::size_t i = 0; i < depth; ++i) {
    if (n > (std::size_t{1} << 26) / (branch + 1)) throw std::length_error("truncated prefix grid too large");
    n *= branch + 1;
  }
  return n;
}

// Lexicographic index of a prefix over {0..B}.
inline std::size_t prefix_index(const FinSeq& p, Nat branch) {
  std::size_t idx = 0;
  for (Nat v : p) {
    if (v > branch) throw std::out_of_range("prefix entry beyond the bucket symbol");
    idx = idx * (branch + 1) + v;
  }
  return idx;
}

inline FinSeq prefix_at(std::size_t idx, std::size_t depth, Nat branch) {
  std::vector<Nat> out(depth);
  for (std::size_t i = depth; i-- > 0;) {
    out[i] = idx % (branch + 1);
    idx /= branch + 1;
  }
  return FinSeq(std::move(out));
}

}  // namespace detail

// Constant of a depth-m tabulation: 2^-(m-1).
inline Dyadic full_constant(std::size_t depth) { return Dyadic::pow2(1 - static_cast<int>(depth)); }

class FullSet {
 public:
  FullSet(std::size_t depth, Nat branch) : depth_(depth), branch_(branch), bits_(detail::grid_size(depth, branch)) {
    if (depth == 0) throw std::invalid_argument("full sets need depth >= 1");
    if (branch == 0) throw std::invalid_argument("full sets need branch >= 1");
  }

  static FullSet whole(std::size_t depth, Nat branch) {
    FullSet s(depth, branch);
    s.bits_.set();
    return s;
  }

  // Prefixes of length `depth` with entries <= branch (branch itself is the bucket).
  static FullSet from_prefixes(std::size_t depth, Nat branch, const std::vector<FinSeq>& prefixes) {
    FullSet s(depth, branch);
    for (const auto& p : prefixes) {
      if (p.size() != depth) throw std::invalid_argument("prefix length differs from depth: " + to_string(p));
      s.bits_.set(detail::prefix_index(p, branch));
    }
    return s;
  }

  static FullSet from_predicate(std::size_t depth, Nat branch, const std::function<bool(const FinSeq&)>& in) {
    FullSet s(depth, branch);
    for (std::size_t i = 0; i < s.bits_.size(); ++i) s.bits_[i] = in(detail::prefix_at(i, depth, branch));
    return s;
  }

  std::size_t depth() const { return depth_; }
  Nat branch() const { return branch_; }
  Dyadic constant() const { return full_constant(depth_); }
  std::size_t count() const { return bits_.count(); }
  bool empty() const { return bits_.none(); }

  bool contains_prefix(const FinSeq& p) const { return bits_[detail::prefix_index(p, branch_)]; }
  bool contains(const Point& x) const { return contains_prefix(bucketed_prefix(x, depth_, branch_)); }

  std::vector<FinSeq> prefixes() const {
    std::vector<FinSeq> out;
    for (auto i = bits_.find_first(); i != boost::dynamic_bitset<>::npos; i = bits_.find_next(i))
      out.push_back(detail::prefix_at(i, depth_, branch_));
    return out;
  }

  // Same set at a larger depth: each prefix replaced by all its extensions.
  FullSet refine(std::size_t depth) const {
    if (depth < depth_) throw std::invalid_argument("refine cannot lower the depth");
    FullSet out(depth, branch_);
    std::size_t factor = out.bits_.size() / bits_.size();
    for (auto i = bits_.find_first(); i != boost::dynamic_bitset<>::npos; i = bits_.find_next(i))
      for (std::size_t j = 0; j < factor; ++j) out.bits_.set(i * factor + j);
    return out;
  }

  friend bool operator==(const FullSet& a, const FullSet& b) {
    return a.depth_ == b.depth_ && a.branch_ == b.branch_ && a.bits_ == b.bits_;
  }

  friend FullSet full_union(const FullSet& a, const FullSet& b) { return combine(a, b, [](auto& x, const auto& y) { x |= y; }); }
  friend FullSet full_intersection(const FullSet& a, const FullSet& b) {
    return combine(a, b, [](auto& x, const auto& y) { x &= y; });
  }
  friend FullSet full_complement(const FullSet& a) {
    FullSet out = a;
    out.bits_.flip();
    return out;
  }

 private:
  template <typename Op>
  static FullSet combine(const FullSet& a, const FullSet& b, Op op) {
    if (a.branch_ != b.branch_) throw std::invalid_argument("full sets over different alphabets");
    std::size_t d = std::max(a.depth_, b.depth_);
    FullSet x = a.refine(d);
    FullSet y = b.refine(d);
    op(x.bits_, y.bits_);
    return x;
  }

  std::size_t depth_;
  Nat branch_;
  boost::dynamic_bitset<> bits_;
};

// Union of any number of full sets of one depth.
inline FullSet full_union_all(std::size_t depth, Nat branch, const std::vector<FullSet>& sets) {
  FullSet out(depth, branch);
  for (const auto& s : sets) out = full_union(out, s);
  return out;
}

// Exact clopen normal form of a code whose cylinders have entries < branch.
inline FullSet tabulate_code(const BorelCode& c, Nat branch, std::size_t depth) {
  if (code_branch(c) > branch) throw std::invalid_argument("code mentions entries beyond the alphabet");
  if (code_depth(c) > depth) throw std::invalid_argument("code is deeper than the tabulation");
  return FullSet::from_predicate(depth, branch, [&](const FinSeq& p) {
    return eval_membership(c, Point::constant(p, 0)) == Verdict::In;
  });
}

class NotPrefixDetermined : public std::runtime_error {
 public:
  NotPrefixDetermined(Point x, Point y, std::size_t depth)
      : std::runtime_error("predicate differs on " + to_string(x) + " and " + to_string(y) + ", which agree to depth " +
                           std::to_string(depth)),
        x_(std::move(x)),
        y_(std::move(y)) {}
  const Point& first() const { return x_; }
  const Point& second() const { return y_; }

 private:
  Point x_, y_;
};

struct FullnessReport {
  bool full = false;
  std::size_t depth = 0;
  Dyadic constant;
};

inline FullnessReport is_full(const FullSet& s) { return {true, s.depth(), s.constant()}; }

// Least depth m <= max_depth at which `pred` is determined by the bucketed
// prefix, judged on probe points: every bucketed prefix, with bucket entries
// realized as B and B+1, followed by a few heads and tails.
inline FullnessReport is_full(const std::function<bool(const Point&)>& pred, std::size_t max_depth, Nat branch) {
  if (max_depth == 0) throw std::invalid_argument("is_full: depth must be >= 1");
  std::vector<Point> tails;
  for (Nat c = 0; c <= branch + 1; ++c) tails.push_back(Point::constant({}, c));
  tails.push_back(Point::periodic({}, {0, 1}));
  tails.push_back(Point::periodic({}, {1, 0}));
  for (Nat a = 0; a <= branch; ++a)
    for (Nat c = 0; c <= 1; ++c) tails.push_back(Point::constant({a, a}, c));

  std::optional<std::pair<Point, Point>> witness;
  for (std::size_t m = 1; m <= max_depth; ++m) {
    witness.reset();
    for (const auto& p : all_sequences(m, branch + 1)) {
      std::optional<std::pair<Point, bool>> first;
      for (Nat realize = branch; realize <= branch + 1 && !witness; ++realize) {
        std::vector<Nat> head(p.begin(), p.end());
        for (auto& v : head)
          if (v == branch) v = realize;
        for (const auto& t : tails) {
          Point x = t.prepend(FinSeq(head));
          bool v = pred(x);
          if (!first) {
            first = std::pair{x, v};
          } else if (first->second != v) {
            witness = std::pair{first->first, x};
            break;
          }
        }
      }
      if (witness) break;
    }
    if (!witness) return {true, m, full_constant(m)};
  }
  throw NotPrefixDetermined(witness->first, witness->second, max_depth);
}

class FullFunction {
 public:
  FullFunction(std::size_t depth, Nat branch, std::vector<std::size_t> table, std::size_t value_count)
      : depth_(depth), branch_(branch), table_(std::move(table)), value_count_(value_count) {
    if (depth == 0) throw std::invalid_argument("full functions need depth >= 1");
    if (table_.size() != detail::grid_size(depth, branch)) throw std::invalid_argument("table does not cover the grid");
    for (auto v : table_)
      if (v >= value_count_) throw std::invalid_argument("table value beyond the value count");
  }

  static FullFunction tabulate(std::size_t depth, Nat branch, std::size_t value_count,
                               const std::function<std::size_t(const FinSeq&)>& rule) {
    std::vector<std::size_t> table(detail::grid_size(depth, branch));
    for (std::size_t i = 0; i < table.size(); ++i) table[i] = rule(detail::prefix_at(i, depth, branch));
    return FullFunction(depth, branch, std::move(table), value_count);
  }

  std::size_t depth() const { return depth_; }
  Nat branch() const { return branch_; }
  std::size_t value_count() const { return value_count_; }
  Dyadic constant() const { return full_constant(depth_); }
  const std::vector<std::size_t>& table() const { return table_; }

  std::size_t at_prefix(const FinSeq& p) const { return table_[detail::prefix_index(p, branch_)]; }
  std::size_t operator()(const Point& x) const { return at_prefix(bucketed_prefix(x, depth_, branch_)); }

  std::set<std::size_t> range() const { return {table_.begin(), table_.end()}; }

  FullSet preimage(std::size_t v) const {
    return FullSet::from_predicate(depth_, branch_, [&](const FinSeq& p) { return at_prefix(p) == v; });
  }

  friend bool operator==(const FullFunction&, const FullFunction&) = default;

 private:
  std::size_t depth_;
  Nat branch_;
  std::vector<std::size_t> table_;
  std::size_t value_count_;
};

// Preimages of the range partition the prefix grid; true for every table by
// construction, checked independently here.
inline bool preimages_partition(const FullFunction& f) {
  FullSet seen(f.depth(), f.branch());
  std::size_t total = 0;
  for (auto v : f.range()) {
    auto pre = f.preimage(v);
    if (!full_intersection(seen, pre).empty()) return false;
    seen = full_union(seen, pre);
    total += pre.count();
  }
  return seen == FullSet::whole(f.depth(), f.branch()) && total == f.table().size();
}

// r^-1 = 2^(m-1)
inline Dyadic lipschitz_bound_of_full(const FullFunction& f) { return Dyadic::pow2(static_cast<int>(f.depth()) - 1); }

using ValueDistance = std::function<Rational(std::size_t, std::size_t)>;

struct LipschitzReport {
  bool passed = true;
  std::size_t pairs = 0;
  std::optional<std::pair<Point, Point>> violation;
};

// d_Y(f(x), f(x')) <= L d'(x, x') over all pairs of the depth-(m+1) grid, with
// bucket entries realized as B.
inline LipschitzReport verify_lipschitz(const FullFunction& f, const ValueDistance& dist, Dyadic constant) {
  LipschitzReport rep;
  std::vector<Point> pts;
  for (const auto& p : all_sequences(f.depth() + 1, f.branch() + 1)) pts.push_back(Point::constant(p, 0));
  std::vector<std::size_t> vals;
  for (const auto& x : pts) vals.push_back(f(x));
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      ++rep.pairs;
      Dyadic d = ultrametric_distance(pts[i], pts[j], f.depth() + 2).value;
      Rational dy = dist(vals[i], vals[j]);
      if (compare(dy, constant * d) == std::strong_ordering::greater) {
        rep.passed = false;
        rep.violation = std::pair{pts[i], pts[j]};
        return rep;
      }
    }
  return rep;
}

// g applied to the values of f; same depth, range no larger.
inline FullFunction compose_values(const std::function<std::size_t(std::size_t)>& g, std::size_t value_count,
                                   const FullFunction& f) {
  std::vector<std::size_t> table;
  for (auto v : f.table()) table.push_back(g(v));
  return FullFunction(f.depth(), f.branch(), std::move(table), value_count);
}

// log2 of a Lipschitz constant given as a rational; throws unless it is 2^l, l >= 0.
inline std::size_t lipschitz_shift(const Rational& constant) {
  if (constant <= 0) throw std::invalid_argument("Lipschitz constant must be positive");
  if (constant <= 1) {
    if (constant == Rational(1)) return 0;
    throw std::invalid_argument("Lipschitz constants below 1 are not used here");
  }
  if (constant.denominator() != 1) throw std::invalid_argument("Lipschitz constant is not dyadic");
  auto n = constant.numerator();
  if ((n & (n - 1)) != 0) throw std::invalid_argument("Lipschitz constant is not dyadic");
  std::size_t l = 0;
  while (n > 1) {
    n >>= 1;
    ++l;
  }
  return l;
}

// f ∘ f_h tabulated at depth m + l, where h has Lipschitz constant 2^l.
// Checked on the truncated grid: lh(h(s)) >= lh(s) - l, and h treats the two
// realizations B and B+1 of the bucket alike on the first m output entries.
inline FullFunction precompose_full(const SeqMap& h, const Rational& constant, const FullFunction& f) {
  std::size_t l = lipschitz_shift(constant);
  std::size_t depth = f.depth() + l;
  Nat b = f.branch();
  for (const auto& s : all_sequences_upto(depth, b + 1))
    if (h(s).size() + l < s.size()) throw std::invalid_argument("map shortens prefixes by more than log2 L");
  auto bucketed_out = [&](const FinSeq& p, Nat realize) {
    std::vector<Nat> v(p.begin(), p.end());
    for (auto& e : v)
      if (e == b) e = realize;
    FinSeq out = h(FinSeq(std::move(v))).prefix(f.depth());
    std::vector<Nat> w(out.begin(), out.end());
    for (auto& e : w) e = bucket(e, b);
    return FinSeq(std::move(w));
  };
  return FullFunction::tabulate(depth, b, f.value_count(), [&](const FinSeq& p) {
    FinSeq q = bucketed_out(p, b);
    if (bucketed_out(p, b + 1) != q) throw std::invalid_argument("map separates entries inside the bucket");
    return f.at_prefix(q);
  });
}

// Text form:
//   depth: 2
//   branch: 1
//   values: 3
//   [0,0] -> 2        one line per prefix over {0..branch}; `branch` is the bucket
inline std::string format_full(const FullFunction& f) {
  std::ostringstream out;
  out << "depth: " << f.depth() << "\nbranch: " << f.branch() << "\nvalues: " << f.value_count() << '\n';
  for (std::size_t i = 0; i < f.table().size(); ++i)
    out << to_string(detail::prefix_at(i, f.depth(), f.branch())) << " -> " << f.table()[i] << '\n';
  return out.str();
}

inline FullFunction parse_full(const std::string& text) {
  auto lines = content_lines(text);
  if (lines.size() < 3) throw ParseError("missing full-function header", lines.empty() ? 1 : lines.back().first, 1);
  auto header = [&](std::size_t i, std::string_view key) {
    Cursor c(lines[i].second, lines[i].first);
    if (!c.consume_word(key)) c.fail("expected '" + std::string(key) + ":'");
    c.expect(':');
    Nat v = c.natural();
    c.expect_end();
    return v;
  };
  auto depth = static_cast<std::size_t>(header(0, "depth"));
  Nat branch = header(1, "branch");
  auto values = static_cast<std::size_t>(header(2, "values"));
  if (depth == 0 || depth > 12 || branch == 0 || branch > 16) throw ParseError("header out of range", lines[0].first, 1);
  std::size_t n = detail::grid_size(depth, branch);
  std::vector<std::size_t> table(n);
  std::vector<bool> seen(n, false);
  for (std::size_t i = 3; i < lines.size(); ++i) {
    Cursor c(lines[i].second, lines[i].first);
    FinSeq p = parse_finseq(c);
    if (!c.consume_word("->")) c.fail("expected '->'");
    Nat v = c.natural();
    c.expect_end();
    if (p.size() != depth) c.fail("prefix length differs from depth");
    for (Nat e : p)
      if (e > branch) c.fail("prefix entry beyond the bucket symbol");
    if (v >= values) c.fail("value index beyond the value count");
    auto idx = detail::prefix_index(p, branch);
    if (seen[idx]) c.fail("duplicate prefix");
    seen[idx] = true;
    table[idx] = static_cast<std::size_t>(v);
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!seen[i]) throw ParseError("missing prefix " + to_string(detail::prefix_at(i, depth, branch)), lines.back().first, 1);
  return FullFunction(depth, branch, std::move(table), values);
}

}  // namespace baire
