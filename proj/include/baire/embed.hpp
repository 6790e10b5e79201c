#pragma once

// Lusin schemes of balls over finite ultrametric spaces and the induced
// embedding h of a set of branches A ⊆ Baire space onto the space, with
// h Lipschitz-1 and h^-1 Lipschitz-2.

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "baire/approx.hpp"
#include "baire/seq.hpp"
#include "baire/text.hpp"

namespace baire {

class UltraSpace {
 public:
  // dist[i][j] in {0} ∪ {2^-n}; zero exactly on the diagonal.
  explicit UltraSpace(std::vector<std::vector<Dyadic>> dist) : dist_(std::move(dist)) {
    std::size_t n = dist_.size();
    if (n == 0) throw std::invalid_argument("ultrametric space without points");
    for (const auto& row : dist_)
      if (row.size() != n) throw std::invalid_argument("distance matrix has the wrong size");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const Dyadic& d = dist_[i][j];
        if (d > Dyadic::one()) throw std::invalid_argument("distance above 1 at " + pair_name(i, j));
        if (d.is_zero() != (i == j)) throw std::invalid_argument("distance zero iff equal fails at " + pair_name(i, j));
        if (d != dist_[j][i]) throw std::invalid_argument("asymmetric distance at " + pair_name(i, j));
        for (std::size_t l = 0; l < n; ++l)
          if (d > std::max(dist_[i][l], dist_[l][j]))
            throw std::invalid_argument("strong triangle inequality fails at " + pair_name(i, j) + " via " +
                                        std::to_string(l));
      }
  }

  std::size_t size() const { return dist_.size(); }
  const Dyadic& dist(std::size_t i, std::size_t j) const { return dist_[i][j]; }

  CompMetricSpace as_metric_space() const {
    std::vector<std::string> labels;
    std::vector<std::vector<Rational>> d(size(), std::vector<Rational>(size()));
    for (std::size_t i = 0; i < size(); ++i) {
      labels.push_back("x" + std::to_string(i));
      for (std::size_t j = 0; j < size(); ++j) d[i][j] = dist_[i][j].to_rational();
    }
    return CompMetricSpace::finite(std::move(labels), std::move(d));
  }

 private:
  static std::string pair_name(std::size_t i, std::size_t j) { return std::to_string(i) + "," + std::to_string(j); }
  std::vector<std::vector<Dyadic>> dist_;
};

// Text form: point count, then rows 1..n-1 of the lower triangle, row i
// listing d(i,0) .. d(i,i-1) as 0, 1 or 2^-n.
inline UltraSpace parse_ultra(const std::string& text) {
  auto lines = content_lines(text);
  if (lines.empty()) throw ParseError("missing point count", 1, 1);
  Cursor head(lines[0].second, lines[0].first);
  if (!head.consume_word("points")) head.fail("expected 'points:'");
  head.expect(':');
  auto n = static_cast<std::size_t>(head.natural());
  head.expect_end();
  if (n == 0 || n > 4096) head.fail("point count out of range");
  if (lines.size() != n) throw ParseError("expected " + std::to_string(n - 1) + " distance rows", lines.back().first, 1);
  std::vector<std::vector<Dyadic>> d(n, std::vector<Dyadic>(n));
  for (std::size_t i = 1; i < n; ++i) {
    Cursor c(lines[i].second, lines[i].first);
    for (std::size_t j = 0; j < i; ++j) d[i][j] = d[j][i] = parse_dyadic(c);
    c.expect_end();
  }
  try {
    return UltraSpace(std::move(d));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), lines.back().first, 1);
  }
}

inline std::string format_ultra(const UltraSpace& x) {
  std::ostringstream out;
  out << "points: " << x.size() << '\n';
  for (std::size_t i = 1; i < x.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const Dyadic& d = x.dist(i, j);
      out << (j ? " " : "") << (d == Dyadic::one() ? std::string("1") : "2^-" + std::to_string(-d.exponent()));
    }
    out << '\n';
  }
  return out.str();
}

// Random dendrogram: leaves get distinct random codes over a small alphabet,
// d(u,v) = 2^-g(lcp(u,v)) for a random strictly increasing g with g(0) >= 0.
inline UltraSpace random_dendrogram(std::mt19937_64& rng, std::size_t max_leaves = 32, std::size_t max_depth = 8) {
  if (max_leaves == 0 || max_depth == 0) throw std::invalid_argument("empty dendrogram requested");
  std::size_t n = 1 + rng() % max_leaves;
  std::size_t depth = 1 + rng() % max_depth;
  Nat alphabet = 2 + rng() % 2;
  std::size_t capacity = 1;
  for (std::size_t i = 0; i < depth && capacity < n; ++i) capacity *= alphabet;
  n = std::min(n, capacity);
  std::vector<std::vector<Nat>> codes;
  while (codes.size() < n) {
    std::vector<Nat> c(depth);
    for (auto& v : c) v = rng() % alphabet;
    if (std::find(codes.begin(), codes.end(), c) == codes.end()) codes.push_back(std::move(c));
  }
  std::vector<int> g(depth);
  g[0] = static_cast<int>(rng() % 2);
  for (std::size_t j = 1; j < depth; ++j) g[j] = g[j - 1] + 1 + static_cast<int>(rng() % 2);
  std::vector<std::vector<Dyadic>> d(n, std::vector<Dyadic>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      std::size_t l = 0;
      while (codes[i][l] == codes[j][l]) ++l;
      d[i][j] = Dyadic::pow2(-g[l]);
    }
  return UltraSpace(std::move(d));
}

// C_[] = X; a nonempty C_{s^i} is B(x_k, 2^-(lh(s)+1)) with x_k the least dense
// point of C_s not covered by C_{s^0}, ..., C_{s^(i-1)}. Balls are strict.
class LusinScheme {
 public:
  struct Node {
    std::optional<std::size_t> center;  // none at the root
    std::vector<std::size_t> members;
    std::size_t children = 0;
  };

  LusinScheme(UltraSpace x, std::size_t depth) : x_(std::move(x)), depth_(depth) {
    Node root;
    for (std::size_t i = 0; i < x_.size(); ++i) root.members.push_back(i);
    nodes_.emplace(FinSeq{}, std::move(root));
    std::vector<FinSeq> frontier{FinSeq{}};
    for (std::size_t level = 0; level < depth_; ++level) {
      std::vector<FinSeq> next;
      Dyadic r = Dyadic::inv_pow2(level + 1);
      for (const auto& s : frontier) {
        auto& node = nodes_.at(s);
        std::vector<bool> covered(x_.size(), false);
        std::vector<std::pair<FinSeq, Node>> kids;
        for (auto k : node.members) {
          if (covered[k]) continue;
          Node child{k, {}, 0};
          for (auto m : node.members)
            if (x_.dist(m, k) < r) {
              child.members.push_back(m);
              covered[m] = true;
            }
          kids.emplace_back(s.append(kids.size()), std::move(child));
        }
        node.children = kids.size();
        for (auto& [t, c] : kids) {
          next.push_back(t);
          nodes_.emplace(t, std::move(c));
        }
      }
      frontier = std::move(next);
    }
  }

  const UltraSpace& space() const { return x_; }
  std::size_t depth() const { return depth_; }
  const std::map<FinSeq, Node>& nodes() const { return nodes_; }

  const Node* node(const FinSeq& s) const {
    auto it = nodes_.find(s);
    return it == nodes_.end() ? nullptr : &it->second;
  }

  // Label at the end of the chain of a, once the ball is a single point.
  std::optional<std::size_t> embed_h(const FinSeq& a) const {
    if (a.size() > depth_) throw std::invalid_argument("branch longer than the scheme depth");
    const Node* n = node(a);
    if (!n || n->members.size() != 1) return std::nullopt;
    return n->members[0];
  }

  // The depth-long branch whose nodes contain the label.
  FinSeq invert_h(std::size_t label, std::size_t depth) const {
    if (label >= x_.size()) throw std::out_of_range("label outside the space");
    if (depth > depth_) throw std::invalid_argument("inverse requested beyond the scheme depth");
    FinSeq s;
    while (s.size() < depth) {
      const Node& n = nodes_.at(s);
      bool found = false;
      for (std::size_t i = 0; i < n.children && !found; ++i) {
        const auto& c = nodes_.at(s.append(i)).members;
        if (std::binary_search(c.begin(), c.end(), label)) {
          s = s.append(i);
          found = true;
        }
      }
      if (!found) throw std::logic_error("label falls out of the scheme at " + to_string(s));
    }
    return s;
  }

  // h^-1(x) as a point: below a singleton node the only child is 0.
  Point inverse_point(std::size_t label) const { return Point::constant(invert_h(label, depth_), 0); }

  // Least depth at which every label sits alone in its node.
  std::optional<std::size_t> separation_depth() const {
    for (std::size_t l = 0; l <= depth_; ++l) {
      bool all = true;
      for (const auto& [s, n] : nodes_)
        if (s.size() == l && n.members.size() > 1) all = false;
      if (all) return l;
    }
    return std::nullopt;
  }

 private:
  UltraSpace x_;
  std::size_t depth_;
  std::map<FinSeq, Node> nodes_;
};

inline LusinScheme build_lusin_scheme(UltraSpace x, std::size_t depth) { return LusinScheme(std::move(x), depth); }

// Conditions: C_[] = X; each nonempty C_s, s ≠ [], is exactly the ball
// B(center, 2^-lh(s)); C_{s^i} ⊆ C_s; diam(C_s) <= 2^-lh(s); children cover C_s.
inline std::vector<std::string> verify_lusin(const LusinScheme& scheme) {
  std::vector<std::string> bad;
  const auto& x = scheme.space();
  if (scheme.nodes().at(FinSeq{}).members.size() != x.size()) bad.push_back("root is not the whole space");
  for (const auto& [s, n] : scheme.nodes()) {
    Dyadic r = Dyadic::inv_pow2(s.size());
    if (!s.empty()) {
      std::vector<std::size_t> ball;
      for (std::size_t m = 0; m < x.size(); ++m)
        if (x.dist(m, *n.center) < r) ball.push_back(m);
      if (ball != n.members) bad.push_back("node " + to_string(s) + " is not a ball");
      const auto& up = scheme.nodes().at(s.prefix(s.size() - 1)).members;
      if (!std::includes(up.begin(), up.end(), n.members.begin(), n.members.end()))
        bad.push_back("node " + to_string(s) + " leaves its parent");
    }
    for (auto u : n.members)
      for (auto v : n.members)
        if (x.dist(u, v) > r) bad.push_back("node " + to_string(s) + " has diameter above " + to_string(r));
    if (s.size() < scheme.depth()) {
      std::vector<std::size_t> cover;
      for (std::size_t i = 0; i < n.children; ++i) {
        const auto& c = scheme.nodes().at(s.append(i)).members;
        cover.insert(cover.end(), c.begin(), c.end());
      }
      std::sort(cover.begin(), cover.end());
      if (cover != n.members) bad.push_back("children of " + to_string(s) + " do not partition it");
    }
  }
  return bad;
}

class SeparationFailure : public std::runtime_error {
 public:
  SeparationFailure(std::size_t u, std::size_t v)
      : std::runtime_error("labels " + std::to_string(u) + " and " + std::to_string(v) +
                           " are not separated at the scheme depth") {}
};

// d'(h^-1(u), h^-1(v))
inline Dyadic induced_ultrametric(const LusinScheme& scheme, std::size_t u, std::size_t v) {
  if (u == v) return Dyadic::zero();
  auto a = scheme.invert_h(u, scheme.depth());
  auto b = scheme.invert_h(v, scheme.depth());
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.entries()[i] != b.entries()[i]) return Dyadic::inv_pow2(i);
  throw SeparationFailure(u, v);
}

struct BiLipschitzReport {
  std::size_t pairs = 0;
  Rational max_forward;   // max d(h(a_u), h(a_v)) / d'(a_u, a_v), at most 1
  Rational max_backward;  // max d'(a_u, a_v) / d(u, v), at most 2
  std::vector<std::string> failures;
  bool passed() const { return failures.empty(); }
};

inline BiLipschitzReport verify_bilipschitz(const LusinScheme& scheme) {
  BiLipschitzReport rep;
  const auto& x = scheme.space();
  std::vector<FinSeq> branch;
  for (std::size_t u = 0; u < x.size(); ++u) {
    branch.push_back(scheme.invert_h(u, scheme.depth()));
    if (scheme.embed_h(branch.back()) != u) rep.failures.push_back("h(h^-1(" + std::to_string(u) + ")) differs");
  }
  for (std::size_t u = 0; u < x.size(); ++u)
    for (std::size_t v = u + 1; v < x.size(); ++v) {
      ++rep.pairs;
      Dyadic dp;
      try {
        dp = induced_ultrametric(scheme, u, v);
      } catch (const SeparationFailure& e) {
        rep.failures.push_back(e.what());
        continue;
      }
      Rational dprime = dp.to_rational();
      Rational d = x.dist(u, v).to_rational();
      rep.max_forward = std::max(rep.max_forward, d / dprime);
      rep.max_backward = std::max(rep.max_backward, dprime / d);
      if (d > dprime) rep.failures.push_back("h expands the pair " + std::to_string(u) + "," + std::to_string(v));
      if (dprime > Rational(2) * d)
        rep.failures.push_back("h^-1 expands the pair " + std::to_string(u) + "," + std::to_string(v) + " beyond 2");
    }
  return rep;
}

// Approximants of a Baire-class-1 function on Baire space carried to the
// space through h^-1: f_n(u) = g_n(h^-1(u)).
struct TransferReport {
  std::vector<std::size_t> ks;
  std::vector<std::vector<std::size_t>> values;  // values[k index][label]
  std::vector<std::string> fullness_failures;    // pairs closer than 2^-k with different values
  ConvergenceReport convergence;
  bool passed() const { return fullness_failures.empty() && convergence.failures() == 0; }
};

inline TransferReport transfer_through_embedding(const Baire1Approximation& a, const LusinScheme& scheme,
                                                 std::size_t max_full_k, std::size_t n, std::size_t horizon) {
  TransferReport rep;
  const auto& x = scheme.space();
  std::vector<Point> pts;
  for (std::size_t u = 0; u < x.size(); ++u) pts.push_back(scheme.inverse_point(u));
  for (std::size_t k = 1; k <= max_full_k; ++k) {
    auto g = baire1_to_full(a, k).function;
    std::vector<std::size_t> vals;
    for (const auto& p : pts) vals.push_back(g(p));
    Dyadic r = Dyadic::inv_pow2(k);
    for (std::size_t u = 0; u < x.size(); ++u)
      for (std::size_t v = u + 1; v < x.size(); ++v)
        if (x.dist(u, v) < r && vals[u] != vals[v])
          rep.fullness_failures.push_back("k=" + std::to_string(k) + " separates " + std::to_string(u) + "," +
                                          std::to_string(v));
    rep.ks.push_back(k);
    rep.values.push_back(std::move(vals));
  }
  std::vector<std::size_t> all;
  for (std::size_t k = 1; k <= horizon; ++k) all.push_back(k);
  rep.convergence = convergence_report(a, all, pts, n, horizon);
  return rep;
}

}  // namespace baire
