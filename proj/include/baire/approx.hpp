#pragma once

// Approximation engines: uniform step approximation from ball preimages, and
// pointwise approximation of Baire-class-1 functions by full functions built
// from control functions over a scheme of open sets in the target.

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "baire/borel.hpp"
#include "baire/full.hpp"
#include "baire/seq.hpp"
#include "baire/sigma02.hpp"
#include "baire/text.hpp"

namespace baire {

inline Rational rational_abs_diff(const Rational& a, const Rational& b) { return a > b ? a - b : b - a; }

// Dense sequence <y_i> with an exact rational distance bounded by 1. Finite
// spaces are validated in full at construction; generated ones on request.
class CompMetricSpace {
 public:
  using Distance = std::function<Rational(std::size_t, std::size_t)>;
  using Label = std::function<std::string(std::size_t)>;

  static CompMetricSpace finite(std::vector<std::string> labels, std::vector<std::vector<Rational>> dist) {
    std::size_t n = labels.size();
    if (n == 0) throw std::invalid_argument("metric space without points");
    if (dist.size() != n) throw std::invalid_argument("distance matrix has the wrong size");
    for (const auto& row : dist)
      if (row.size() != n) throw std::invalid_argument("distance matrix has the wrong size");
    auto table = std::make_shared<const std::vector<std::vector<Rational>>>(std::move(dist));
    auto names = std::make_shared<const std::vector<std::string>>(std::move(labels));
    CompMetricSpace y([table](std::size_t i, std::size_t j) { return table->at(i).at(j); },
                      [names](std::size_t i) { return names->at(i); }, n);
    if (auto bad = y.check(n)) throw std::invalid_argument(*bad);
    return y;
  }

  // Points given as rationals in [0,1] with |a - b|.
  static CompMetricSpace on_line(const std::vector<Rational>& values) {
    std::vector<std::string> labels;
    std::vector<std::vector<Rational>> dist;
    for (const auto& a : values) {
      labels.push_back(to_string(a));
      dist.emplace_back();
      for (const auto& b : values) dist.back().push_back(rational_abs_diff(a, b));
    }
    auto y = finite(std::move(labels), std::move(dist));
    y.values_ = values;
    return y;
  }

  // {j/n : j = 0..n}
  static CompMetricSpace grid(std::size_t n) {
    std::vector<Rational> v;
    for (std::size_t j = 0; j <= n; ++j) v.emplace_back(static_cast<std::int64_t>(j), static_cast<std::int64_t>(n));
    return on_line(v);
  }

  // Dyadic rationals of [0,1]: 0, 1, 1/2, 1/4, 3/4, 1/8, ...
  static CompMetricSpace dyadic_unit_interval() {
    auto value = [](std::size_t i) -> Rational {
      if (i < 2) return Rational(static_cast<std::int64_t>(i));
      std::size_t m = i - 1;
      int level = 0;
      while ((std::size_t{1} << (level + 1)) <= m) ++level;
      auto pos = static_cast<std::int64_t>(m - (std::size_t{1} << level));
      return Rational(2 * pos + 1, std::int64_t{1} << (level + 1));
    };
    CompMetricSpace y([value](std::size_t i, std::size_t j) { return rational_abs_diff(value(i), value(j)); },
                      [value](std::size_t i) { return to_string(value(i)); }, std::nullopt);
    y.value_of_ = value;
    return y;
  }

  std::optional<std::size_t> size() const { return size_; }
  std::size_t limit(std::size_t bound) const { return size_ ? std::min(bound, *size_) : bound; }
  Rational dist(std::size_t i, std::size_t j) const { return dist_(i, j); }
  std::string label(std::size_t i) const { return label_(i); }

  // Numeric value of a point when the space sits on the line.
  std::optional<Rational> value(std::size_t i) const {
    if (!values_.empty()) return values_.at(i);
    if (value_of_) return value_of_(i);
    return std::nullopt;
  }

  // First violated metric axiom among the points below `bound`.
  std::optional<std::string> check(std::size_t bound) const {
    std::size_t n = limit(bound);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        Rational d = dist_(i, j);
        if (d < 0 || d > 1) return "distance outside [0,1] between " + label_(i) + " and " + label_(j);
        if (i == j && d != Rational(0)) return "nonzero self-distance at " + label_(i);
        if (d != dist_(j, i)) return "asymmetric distance between " + label_(i) + " and " + label_(j);
        for (std::size_t l = 0; l < n; ++l)
          if (d > dist_(i, l) + dist_(l, j))
            return "triangle inequality fails for " + label_(i) + ", " + label_(l) + ", " + label_(j);
      }
    return std::nullopt;
  }

 private:
  CompMetricSpace(Distance d, Label l, std::optional<std::size_t> n)
      : dist_(std::move(d)), label_(std::move(l)), size_(n) {}

  Distance dist_;
  Label label_;
  std::optional<std::size_t> size_;
  std::vector<Rational> values_;
  std::function<Rational(std::size_t)> value_of_;
};

// Radius of the ball constraint added at a node of length l: 2^-(l+2).
inline Dyadic scheme_radius(std::size_t parent_length) { return Dyadic::inv_pow2(parent_length + 2); }

// U_[] = Y, U_{s^i} = B(y_i, 2^-(lh(s)+2)) ∩ U_s with strict balls, each node
// represented by the dense points below the search bound that it contains.
// Nonemptiness is certified by a dense witness; "empty" means no witness found.
class OpenScheme {
 public:
  using Members = boost::dynamic_bitset<>;

  OpenScheme(CompMetricSpace y, std::size_t search_bound)
      : y_(std::move(y)), bound_(y_.limit(search_bound)), dist_(bound_ * bound_) {
    if (bound_ == 0) throw std::invalid_argument("search bound must be positive");
    for (std::size_t i = 0; i < bound_; ++i)
      for (std::size_t j = 0; j < bound_; ++j) dist_[i * bound_ + j] = y_.dist(i, j);
    Members all(bound_);
    all.set();
    memo_.emplace(FinSeq{}, std::make_shared<const Members>(std::move(all)));
  }

  OpenScheme(OpenScheme&& o) noexcept : y_(std::move(o.y_)), bound_(o.bound_), dist_(std::move(o.dist_)) {
    std::lock_guard lock(o.mu_);
    memo_ = std::move(o.memo_);
  }

  const CompMetricSpace& space() const { return y_; }
  std::size_t search_bound() const { return bound_; }
  const Rational& distance(std::size_t i, std::size_t j) const { return dist_[i * bound_ + j]; }

  std::shared_ptr<const Members> members(const FinSeq& s) const {
    std::lock_guard lock(mu_);
    return members_locked(s);
  }

  bool nonempty(const FinSeq& s) const { return members(s)->any(); }

  std::optional<std::size_t> witness(const FinSeq& s) const {
    auto m = members(s);
    if (m->none()) return std::nullopt;
    return m->find_first();
  }

  // Nonempty children j_0 < j_1 < ... below the search bound.
  std::vector<std::size_t> children(const FinSeq& s) const {
    std::vector<std::size_t> out;
    if (!nonempty(s)) return out;
    for (std::size_t j = 0; j < bound_; ++j)
      if (nonempty(s.append(j))) out.push_back(j);
    return out;
  }

  // Nonempty nodes of length <= depth, breadth first.
  std::vector<FinSeq> explore(std::size_t depth) const {
    std::vector<FinSeq> out{FinSeq{}};
    for (std::size_t i = 0; i < out.size(); ++i)
      if (out[i].size() < depth)
        for (auto j : children(out[i])) out.push_back(out[i].append(j));
    return out;
  }

  std::size_t memo_size() const {
    std::lock_guard lock(mu_);
    return memo_.size();
  }

 private:
  std::shared_ptr<const Members> members_locked(const FinSeq& s) const {
    if (auto it = memo_.find(s); it != memo_.end()) return it->second;
    FinSeq parent = s.prefix(s.size() - 1);
    auto up = members_locked(parent);
    Members m(bound_);
    Nat c = s.back();
    if (c < bound_) {
      Dyadic r = scheme_radius(parent.size());
      for (auto i = up->find_first(); i != Members::npos; i = up->find_next(i))
        if (compare(distance(i, c), r) == std::strong_ordering::less) m.set(i);
    }
    auto out = std::make_shared<const Members>(std::move(m));
    memo_.emplace(s, out);
    return out;
  }

  CompMetricSpace y_;
  std::size_t bound_;
  std::vector<Rational> dist_;
  mutable std::mutex mu_;
  mutable std::unordered_map<FinSeq, std::shared_ptr<const Members>, FinSeqHash> memo_;
};

inline OpenScheme build_open_scheme(CompMetricSpace y, std::size_t depth, std::size_t search_bound) {
  if (depth == 0) throw std::invalid_argument("scheme depth must be >= 1");
  OpenScheme scheme(std::move(y), search_bound);
  scheme.explore(depth);
  return scheme;
}

struct SchemeReport {
  std::size_t nodes = 0;
  std::vector<std::string> failures;
  std::vector<FinSeq> unpruned;  // nonempty nodes above the depth without a nonempty child
  bool passed() const { return failures.empty() && unpruned.empty(); }
};

// U_[] = Y, monotone along branches, children cover the node, diam(U_s) <= 2^-lh(s),
// all judged on the dense points below the search bound.
inline SchemeReport verify_scheme(const OpenScheme& scheme, std::size_t depth) {
  SchemeReport rep;
  auto nodes = scheme.explore(depth);
  rep.nodes = nodes.size();
  if (!scheme.members(FinSeq{})->all()) rep.failures.push_back("root misses dense points");
  for (const auto& s : nodes) {
    auto m = scheme.members(s);
    if (!s.empty() && !m->is_subset_of(*scheme.members(s.prefix(s.size() - 1))))
      rep.failures.push_back("node " + to_string(s) + " leaves its parent");
    Dyadic diam = Dyadic::inv_pow2(s.size());
    for (auto i = m->find_first(); i != OpenScheme::Members::npos; i = m->find_next(i))
      for (auto j = m->find_next(i); j != OpenScheme::Members::npos; j = m->find_next(j))
        if (compare(scheme.distance(i, j), diam) == std::strong_ordering::greater)
          rep.failures.push_back("node " + to_string(s) + " has diameter above " + to_string(diam));
    if (s.size() < depth) {
      auto kids = scheme.children(s);
      if (kids.empty()) rep.unpruned.push_back(s);
      OpenScheme::Members cover(scheme.search_bound());
      for (auto j : kids) cover |= *scheme.members(s.append(j));
      if (cover != *m) rep.failures.push_back("children of " + to_string(s) + " do not cover it");
    }
  }
  return rep;
}

// Baire-class-1 function into a finite space, given by reductions of its level
// sets f^-1({y_i}) to S. The reductions must treat all entries >= branch alike.
struct Baire1Spec {
  std::string name;
  CompMetricSpace space;
  Nat branch = 1;
  std::vector<Sigma02Set> levels;
  std::function<std::size_t(const Point&)> ground_truth;
};

class MissingReduction : public std::out_of_range {
 public:
  explicit MissingReduction(const FinSeq& s)
      : std::out_of_range("no reduction available for node " + to_string(s)), node_(s) {}
  const FinSeq& node() const { return node_; }

 private:
  FinSeq node_;
};

struct NodeOutsideTree {
  FinSeq prefix;
  FinSeq node;
};

// Run of the recursion on a prefix p of length k: node s_0 ⊂ ... ⊂ s_k.
struct ApproxRun {
  FinSeq node;
  std::vector<std::size_t> sigma;  // σ_{t_i}(p) at each step
  std::size_t value = 0;
  std::optional<NodeOutsideTree> outside;
};

class Baire1Approximation {
 public:
  Baire1Approximation(Baire1Spec spec, std::size_t scheme_depth = 40)
      : spec_(std::move(spec)), scheme_(spec_.space, spec_.space.size().value_or(0)), depth_(scheme_depth) {
    if (!spec_.space.size()) throw std::invalid_argument("approximation needs a finite target space");
    if (spec_.levels.size() != *spec_.space.size()) throw std::invalid_argument("one level set per target point");
    if (spec_.branch == 0) throw std::invalid_argument("branch must be >= 1");
  }

  const Baire1Spec& spec() const { return spec_; }
  const OpenScheme& scheme() const { return scheme_; }
  std::size_t scheme_depth() const { return depth_; }

  // Reduction of f^-1(U_s): the level set itself for a singleton, else the
  // union of the level sets of the points in U_s.
  Sigma02Set node_reduction(const FinSeq& s) const {
    if (s.size() > depth_) throw MissingReduction(s);
    auto m = scheme_.members(s);
    if (m->none()) throw MissingReduction(s);
    std::lock_guard lock(mu_);
    std::vector<std::size_t> labels;
    for (auto i = m->find_first(); i != OpenScheme::Members::npos; i = m->find_next(i)) labels.push_back(i);
    if (auto it = reductions_.find(labels); it != reductions_.end()) return it->second;
    Sigma02Set out = labels.size() == 1 ? spec_.levels[labels[0]] : union_of_levels(labels);
    reductions_.emplace(labels, out);
    return out;
  }

  // ψ_s over the reductions of the children s^j_0, s^j_1, ...
  std::shared_ptr<const ControlFunction> control(const FinSeq& s) const {
    if (s.size() >= depth_) throw MissingReduction(s);
    {
      std::lock_guard lock(mu_);
      if (auto it = controls_.find(s); it != controls_.end()) return it->second;
    }
    auto kids = scheme_.children(s);
    if (kids.empty()) throw MissingReduction(s);
    std::vector<SeqMap> family;
    for (auto j : kids) family.push_back(node_reduction(s.append(j)).reduction);
    auto psi = build_control(std::move(family), Schedule::round_robin(kids.size()));
    std::lock_guard lock(mu_);
    return controls_.emplace(s, psi).first->second;
  }

  std::vector<std::size_t> children(const FinSeq& s) const { return scheme_.children(s); }

  // s_0 = <j_min(σ_[](p), k)>, s_{i+1} = t_i ^ j_min(σ_{t_i}(p), k), value y_{s_k}.
  ApproxRun run(const FinSeq& p) const {
    std::size_t k = p.size();
    ApproxRun out;
    FinSeq t;
    for (std::size_t i = 0; i <= k; ++i) {
      auto kids = children(t);
      if (kids.empty()) {
        out.outside = NodeOutsideTree{p, t};
        break;
      }
      std::size_t sigma = control(t)->state(p).index;
      out.sigma.push_back(sigma);
      t = t.append(kids[std::min(sigma, k)]);
    }
    out.node = t;
    auto w = scheme_.witness(t);
    if (!w) {
      if (!out.outside) out.outside = NodeOutsideTree{p, t};
      out.value = 0;
    } else {
      out.value = *w;
    }
    return out;
  }

  ApproxRun run(const Point& x, std::size_t k) const { return run(x.prefix(k)); }

 private:
  Sigma02Set union_of_levels(const std::vector<std::size_t>& labels) const {
    std::vector<Sigma02Set> fam;
    for (auto i : labels) fam.push_back(spec_.levels[i]);
    return union_reduction(fam, Schedule::round_robin(fam.size()));
  }

  Baire1Spec spec_;
  OpenScheme scheme_;
  std::size_t depth_;
  mutable std::mutex mu_;
  mutable std::map<std::vector<std::size_t>, Sigma02Set> reductions_;
  mutable std::unordered_map<FinSeq, std::shared_ptr<const ControlFunction>, FinSeqHash> controls_;
};

struct Baire1Full {
  FullFunction function;
  std::vector<NodeOutsideTree> outside;
  std::size_t distinct_nodes = 0;
};

// f_k tabulated over the bucketed prefixes of length k; the bucket symbol is
// fed to the reductions as the entry `branch`.
inline Baire1Full baire1_to_full(const Baire1Approximation& a, std::size_t k) {
  if (k == 0) throw std::invalid_argument("approximants are tabulated from k = 1");
  std::vector<NodeOutsideTree> outside;
  std::set<FinSeq> nodes;
  auto f = FullFunction::tabulate(k, a.spec().branch, *a.spec().space.size(), [&](const FinSeq& p) {
    auto r = a.run(p);
    if (r.outside) outside.push_back(*r.outside);
    nodes.insert(r.node);
    return r.value;
  });
  return {std::move(f), std::move(outside), nodes.size()};
}

struct ConvergenceRow {
  std::size_t k = 0;
  ApproxRun run;
  Rational error;
  bool within = false;
};

struct ConvergenceSample {
  Point x;
  std::size_t truth = 0;
  std::vector<ConvergenceRow> rows;
  std::optional<std::size_t> m;  // empty: fails at M
};

struct ConvergenceReport {
  std::size_t n = 0;
  std::size_t horizon = 0;
  Dyadic threshold;
  std::vector<ConvergenceSample> samples;
  std::size_t failures() const {
    return static_cast<std::size_t>(std::count_if(samples.begin(), samples.end(), [](const auto& s) { return !s.m; }));
  }
};

// Least m with d(f_m'(x), f(x)) <= 2^-(n+1) for every tested m' in [m, M].
inline ConvergenceReport convergence_report(const Baire1Approximation& a, std::vector<std::size_t> ks,
                                            const std::vector<Point>& samples, std::size_t n, std::size_t horizon) {
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  if (!ks.empty() && ks.back() > horizon) throw std::invalid_argument("tested k beyond the horizon");
  ConvergenceReport rep{n, horizon, Dyadic::inv_pow2(n + 1), {}};
  const auto& y = a.spec().space;
  for (const auto& x : samples) {
    ConvergenceSample cs{x, a.spec().ground_truth(x), {}, std::nullopt};
    std::optional<std::size_t> last_bad;
    for (auto k : ks) {
      ConvergenceRow row{k, a.run(x, k), Rational(0), false};
      row.error = y.dist(row.run.value, cs.truth);
      row.within = compare(row.error, rep.threshold) != std::strong_ordering::greater;
      if (!row.within) last_bad = k;
      cs.rows.push_back(std::move(row));
    }
    if (!last_bad)
      cs.m = 0;
    else if (*last_bad < horizon)
      cs.m = *last_bad + 1;
    rep.samples.push_back(std::move(cs));
  }
  return rep;
}

// Step approximation: S^k_n = f^-1(B(y_n, 2^-(k+1))) given as codes.
using BallPreimages = std::function<BorelCode(std::size_t n, std::size_t k)>;

struct StepSpec {
  std::string name;
  CompMetricSpace space;
  std::size_t cover_bound = 0;  // n ranges below this
  unsigned level = 1;           // union children have Π-rank at most this
  BallPreimages preimage;
  std::function<std::size_t(const Point&)> ground_truth;
};

class CoverGap : public std::runtime_error {
 public:
  CoverGap(Point x, const std::string& why) : std::runtime_error(why + ": " + to_string(x)), x_(std::move(x)) {}
  const Point& point() const { return x_; }

 private:
  Point x_;
};

struct StepApproximation {
  std::size_t k = 0;
  std::vector<BorelCode> partition;  // Q^k_n

  std::size_t value(const Point& x, std::size_t budget = std::size_t{1} << 20) const {
    std::optional<std::size_t> hit;
    for (std::size_t n = 0; n < partition.size(); ++n) {
      auto v = eval_membership(partition[n], x, budget);
      if (v == Verdict::Unknown) throw CoverGap(x, "evaluation budget exhausted");
      if (v == Verdict::In) {
        if (hit) throw std::logic_error("partition pieces overlap at " + to_string(x));
        hit = n;
      }
    }
    if (!hit) throw CoverGap(x, "point lies in no piece");
    return *hit;
  }
};

inline StepApproximation step_approximation(const StepSpec& spec, std::size_t k) {
  std::vector<BorelCode> s;
  for (std::size_t n = 0; n < spec.cover_bound; ++n) s.push_back(spec.preimage(n, k));
  return {k, generalized_reduction(s, spec.level)};
}

struct StepErrorReport {
  std::size_t k = 0;
  Rational worst;
  std::size_t samples = 0;
  bool within_bound = true;  // d(f_k(x), f(x)) <= 2^-k everywhere
};

inline StepErrorReport step_error(const StepSpec& spec, const StepApproximation& approx, const std::vector<Point>& samples) {
  StepErrorReport rep{approx.k, Rational(0), samples.size(), true};
  Dyadic bound = Dyadic::inv_pow2(approx.k);
  for (const auto& x : samples) {
    Rational d = spec.space.dist(approx.value(x), spec.ground_truth(x));
    rep.worst = std::max(rep.worst, d);
    if (compare(d, bound) == std::strong_ordering::greater) rep.within_bound = false;
  }
  return rep;
}

// h_n = g_{n,n} for real-valued approximants.
using RealFn = std::function<Rational(const Point&)>;
using DoubleSequence = std::function<RealFn(std::size_t n, std::size_t m)>;

inline std::vector<RealFn> diagonal_limit(const DoubleSequence& g, std::size_t count) {
  std::vector<RealFn> h;
  for (std::size_t n = 0; n < count; ++n) h.push_back(g(n, n));
  return h;
}

struct DiagonalReport {
  std::size_t checks = 0;
  std::vector<std::string> failures;
  bool passed() const { return failures.empty(); }
};

// For each x and k <= max_k, with m the least index >= k+1 such that
// |f_m'(x) - f(x)| < 2^-(k+1) for m' in [m, horizon]:
// |h_m'(x) - f(x)| < 2^-m' + 2^-(k+1) <= 2^-k for m' in [m, horizon].
inline DiagonalReport verify_diagonal(const std::vector<RealFn>& h, const std::vector<RealFn>& fn, const RealFn& f,
                                      const std::vector<Point>& samples, std::size_t max_k) {
  DiagonalReport rep;
  std::size_t horizon = std::min(h.size(), fn.size());
  if (horizon == 0) throw std::invalid_argument("empty sequences");
  --horizon;
  for (const auto& x : samples) {
    Rational fx = f(x);
    for (std::size_t k = 0; k <= max_k; ++k) {
      Rational tight = Dyadic::inv_pow2(k + 1).to_rational();
      std::optional<std::size_t> m;
      for (std::size_t j = horizon + 1; j-- > k + 1;) {
        if (rational_abs_diff(fn[j](x), fx) >= tight) break;
        m = j;
      }
      if (!m) {
        rep.failures.push_back("no stable index for k=" + std::to_string(k) + " at " + to_string(x));
        continue;
      }
      for (std::size_t j = *m; j <= horizon; ++j) {
        ++rep.checks;
        Rational d = rational_abs_diff(h[j](x), fx);
        if (!(d < Dyadic::inv_pow2(j).to_rational() + tight) || d > Dyadic::inv_pow2(k).to_rational())
          rep.failures.push_back("estimate fails at m'=" + std::to_string(j) + ", k=" + std::to_string(k) + " at " +
                                 to_string(x));
      }
    }
  }
  return rep;
}

}  // namespace baire
