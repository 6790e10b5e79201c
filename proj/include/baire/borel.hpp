#pragma once

// Borel codes over cylinders of Baire space, syntactic rank tags, three-valued
// membership, and the partition constructions built on them.
//
// Grammar (text form in parentheses):
//   Basic s         (basic [0,1])     the cylinder N_s
//   Union c...      (union c...)      finitely presented countable union
//   FUnion c...     (funion c...)     finite union; keeps the children's level
//   Complement c    (compl c)
// The text form also accepts (inter a b ...) and (diff a b) which expand to
// De Morgan forms over funion and compl.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "baire/seq.hpp"
#include "baire/text.hpp"

namespace baire {

class MalformedFamily : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class RankTooHigh : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class BorelCode {
 public:
  enum class Kind { Basic, Union, FUnion, Complement };

  static BorelCode basic(FinSeq s) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Basic;
    n->seq = std::move(s);
    return BorelCode(std::move(n));
  }
  static BorelCode union_of(std::vector<BorelCode> children) { return make_union(Kind::Union, std::move(children)); }
  static BorelCode funion(std::vector<BorelCode> children) { return make_union(Kind::FUnion, std::move(children)); }
  static BorelCode complement(BorelCode c) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Complement;
    n->children.push_back(std::move(c));
    return BorelCode(std::move(n));
  }

  static BorelCode whole() { return basic({}); }
  static BorelCode empty() { return complement(whole()); }

  Kind kind() const { return node_->kind; }
  const FinSeq& seq() const { return node_->seq; }
  const std::vector<BorelCode>& children() const { return node_->children; }
  const BorelCode& child() const { return node_->children.front(); }

  std::size_t node_count() const {
    std::size_t n = 1;
    for (const auto& c : children()) n += c.node_count();
    return n;
  }

  friend bool operator==(const BorelCode& a, const BorelCode& b) {
    if (a.node_ == b.node_) return true;
    return a.kind() == b.kind() && a.seq() == b.seq() && a.children() == b.children();
  }

 private:
  struct Node {
    Kind kind = Kind::Basic;
    FinSeq seq;
    std::vector<BorelCode> children;
  };

  explicit BorelCode(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static BorelCode make_union(Kind k, std::vector<BorelCode> children) {
    if (children.empty()) throw std::invalid_argument("union with no children");
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->children = std::move(children);
    return BorelCode(std::move(n));
  }

  std::shared_ptr<const Node> node_;
};

// a ∩ b ∩ ... as the complement of a finite union of complements.
inline BorelCode intersection(std::vector<BorelCode> parts) {
  if (parts.empty()) return BorelCode::whole();
  if (parts.size() == 1) return parts.front();
  std::vector<BorelCode> negated;
  for (auto& p : parts) negated.push_back(BorelCode::complement(std::move(p)));
  return BorelCode::complement(BorelCode::funion(std::move(negated)));
}

inline BorelCode intersection(BorelCode a, BorelCode b) { return intersection(std::vector<BorelCode>{a, b}); }

// a \ b, always in the shape Complement(FUnion(Complement(a), b)).
inline BorelCode difference(BorelCode a, BorelCode b) {
  return BorelCode::complement(BorelCode::funion({BorelCode::complement(std::move(a)), std::move(b)}));
}

// Recognizes the shape produced by `difference`.
inline std::optional<std::pair<BorelCode, BorelCode>> match_difference(const BorelCode& c) {
  if (c.kind() != BorelCode::Kind::Complement) return std::nullopt;
  const auto& u = c.child();
  if (u.kind() != BorelCode::Kind::FUnion || u.children().size() != 2) return std::nullopt;
  if (u.children()[0].kind() != BorelCode::Kind::Complement) return std::nullopt;
  return std::pair{u.children()[0].child(), u.children()[1]};
}

// Least syntactic levels: the code is Σ⁰_sigma and Π⁰_pi.
struct ClassTag {
  unsigned sigma = 1;
  unsigned pi = 1;
  bool clopen() const { return sigma == 1 && pi == 1; }
  friend bool operator==(const ClassTag&, const ClassTag&) = default;
};

inline ClassTag classify(const BorelCode& c) {
  switch (c.kind()) {
    case BorelCode::Kind::Basic:
      return {1, 1};
    case BorelCode::Kind::Complement: {
      auto t = classify(c.child());
      return {t.pi, t.sigma};
    }
    case BorelCode::Kind::Union: {
      unsigned s = 1;
      for (const auto& ch : c.children()) {
        auto t = classify(ch);
        s = std::max(s, std::min(t.sigma, t.pi + 1));
      }
      return {s, s + 1};
    }
    case BorelCode::Kind::FUnion: {
      ClassTag out;
      for (const auto& ch : c.children()) {
        auto t = classify(ch);
        out.sigma = std::max(out.sigma, t.sigma);
        out.pi = std::max(out.pi, t.pi);
      }
      return out;
    }
  }
  return {};
}

enum class Verdict { In, Out, Unknown };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::In: return "In";
    case Verdict::Out: return "Out";
    case Verdict::Unknown: return "Unknown";
  }
  return "?";
}

namespace detail {

inline Verdict eval_node(const BorelCode& c, const Point& x, std::size_t& budget) {
  if (budget == 0) return Verdict::Unknown;
  --budget;
  switch (c.kind()) {
    case BorelCode::Kind::Basic: {
      const auto& s = c.seq();
      for (std::size_t i = 0; i < s.size(); ++i)
        if (x.at(i) != s[i]) return Verdict::Out;
      return Verdict::In;
    }
    case BorelCode::Kind::Complement: {
      auto v = eval_node(c.child(), x, budget);
      if (v == Verdict::Unknown) return v;
      return v == Verdict::In ? Verdict::Out : Verdict::In;
    }
    default: {
      bool unknown = false;
      for (const auto& ch : c.children()) {
        auto v = eval_node(ch, x, budget);
        if (v == Verdict::In) return Verdict::In;
        unknown = unknown || v == Verdict::Unknown;
      }
      return unknown ? Verdict::Unknown : Verdict::Out;
    }
  }
}

}  // namespace detail

inline constexpr std::size_t kDefaultEvalBudget = std::size_t{1} << 20;

// Kleene evaluation; `budget` caps the number of visited nodes.
inline Verdict eval_membership(const BorelCode& c, const Point& x, std::size_t budget = kDefaultEvalBudget) {
  return detail::eval_node(c, x, budget);
}

// Longest cylinder in the code.
inline std::size_t code_depth(const BorelCode& c) {
  if (c.kind() == BorelCode::Kind::Basic) return c.seq().size();
  std::size_t d = 0;
  for (const auto& ch : c.children()) d = std::max(d, code_depth(ch));
  return d;
}

// Least B such that every cylinder entry is < B (at least 1).
inline Nat code_branch(const BorelCode& c) {
  if (c.kind() == BorelCode::Kind::Basic) {
    Nat b = 1;
    for (Nat v : c.seq()) b = std::max(b, v + 1);
    return b;
  }
  Nat b = 1;
  for (const auto& ch : c.children()) b = std::max(b, code_branch(ch));
  return b;
}

// Points representing every class of the truncated prefix grid: heads over
// {0..B} (B standing for the bucket) of length `depth`. Membership in a code
// whose cylinders have entries < B and length <= depth is constant on classes.
inline std::vector<Point> bucket_grid(std::size_t depth, Nat branch) {
  std::vector<Point> out;
  for (const auto& s : all_sequences(depth, branch + 1)) out.push_back(Point::constant(s, 0));
  return out;
}

inline constexpr std::size_t kEmptinessGridCap = std::size_t{1} << 16;

// nullopt when the bucket grid is too large or evaluation ran out of budget.
inline std::optional<bool> decide_empty(const BorelCode& c, Nat branch, std::size_t depth) {
  if (code_branch(c) > branch || code_depth(c) > depth) return std::nullopt;
  double size = std::pow(static_cast<double>(branch + 1), static_cast<double>(depth));
  if (size > static_cast<double>(kEmptinessGridCap)) return std::nullopt;
  for (const auto& x : bucket_grid(depth, branch)) {
    auto v = eval_membership(c, x);
    if (v == Verdict::Unknown) return std::nullopt;
    if (v == Verdict::In) return false;
  }
  return true;
}

inline std::optional<bool> decide_empty(const BorelCode& c) { return decide_empty(c, code_branch(c), code_depth(c)); }

// P_0 = C_0, P_n = C_n \ (C_0 ∪ ... ∪ C_{n-1}).
inline std::vector<BorelCode> disjointify(const std::vector<BorelCode>& family) {
  std::vector<BorelCode> out;
  for (std::size_t n = 0; n < family.size(); ++n) {
    if (n == 0) {
      out.push_back(family[0]);
      continue;
    }
    std::vector<BorelCode> earlier(family.begin(), family.begin() + static_cast<std::ptrdiff_t>(n));
    out.push_back(difference(family[n], BorelCode::funion(std::move(earlier))));
  }
  return out;
}

// Members of a family given as unions: Union/FUnion contribute their children,
// a cylinder stands for itself.
inline std::vector<BorelCode> union_children(const BorelCode& c) {
  switch (c.kind()) {
    case BorelCode::Kind::Union:
    case BorelCode::Kind::FUnion:
      return c.children();
    case BorelCode::Kind::Basic:
      return {c};
    default:
      throw MalformedFamily("family member is not presented as a union");
  }
}

inline std::vector<std::vector<BorelCode>> union_presentations(const std::vector<BorelCode>& family, unsigned xi) {
  std::vector<std::vector<BorelCode>> out;
  for (const auto& c : family) {
    auto ch = union_children(c);
    for (const auto& p : ch)
      if (classify(p).pi > xi) throw MalformedFamily("union child above the requested level");
    out.push_back(std::move(ch));
  }
  return out;
}

// Q_n = ∪_m (P_{n,m} \ ∪{P_{n',m'} : <n',m'> < <n,m>}).
inline std::vector<BorelCode> generalized_reduction(const std::vector<BorelCode>& family, unsigned xi) {
  auto pres = union_presentations(family, xi);
  std::map<Nat, BorelCode> by_code;
  for (std::size_t n = 0; n < pres.size(); ++n)
    for (std::size_t m = 0; m < pres[n].size(); ++m) by_code.emplace(pair(n, m), pres[n][m]);
  std::vector<BorelCode> out;
  for (std::size_t n = 0; n < pres.size(); ++n) {
    std::vector<BorelCode> pieces;
    for (std::size_t m = 0; m < pres[n].size(); ++m) {
      Nat code = pair(n, m);
      std::vector<BorelCode> earlier;
      for (auto it = by_code.begin(); it != by_code.end() && it->first < code; ++it) earlier.push_back(it->second);
      if (earlier.empty())
        pieces.push_back(pres[n][m]);
      else
        pieces.push_back(difference(pres[n][m], BorelCode::funion(std::move(earlier))));
    }
    out.push_back(BorelCode::union_of(std::move(pieces)));
  }
  return out;
}

struct TwoPiRefinement {
  std::vector<BorelCode> pieces;     // each R \ ∪(earlier R's)
  std::vector<std::size_t> parent;   // partition index of each piece
  std::vector<bool> undecided;       // emptiness could not be decided; piece kept
  std::size_t skipped = 0;           // pieces decided empty
};

// Flattens R_<n,m> = P_{n,m} in pairing order and keeps the nonempty
// differences R_j \ ∪_{l<j} R_l.
inline TwoPiRefinement refine_to_two_pi(const std::vector<BorelCode>& partition, unsigned xi) {
  auto pres = union_presentations(partition, xi);
  std::map<Nat, std::pair<std::size_t, BorelCode>> flat;
  for (std::size_t n = 0; n < pres.size(); ++n)
    for (std::size_t m = 0; m < pres[n].size(); ++m) flat.emplace(pair(n, m), std::pair{n, pres[n][m]});
  TwoPiRefinement out;
  std::vector<BorelCode> earlier;
  for (const auto& [code, entry] : flat) {
    const auto& [parent, r] = entry;
    BorelCode before = earlier.empty() ? BorelCode::empty() : BorelCode::funion(earlier);
    BorelCode piece = difference(r, before);
    bool first = out.pieces.empty() && out.skipped == 0;
    earlier.push_back(r);
    std::optional<bool> empty;
    if (!first) empty = decide_empty(piece);
    if (empty && *empty) {
      ++out.skipped;
      continue;
    }
    out.pieces.push_back(std::move(piece));
    out.parent.push_back(parent);
    out.undecided.push_back(!first && !empty);
  }
  return out;
}

struct LeveledPiece {
  BorelCode code;
  unsigned level = 0;  // Π-level of the piece; 0 marks a clopen piece at the base case
};

namespace detail {

inline BorelCode negate(const BorelCode& c) {
  if (c.kind() == BorelCode::Kind::Complement) return c.child();
  return BorelCode::complement(c);
}

inline constexpr std::size_t kDistributeCap = 4096;

// Codes whose union is c, each as low as the syntax allows.
inline std::vector<BorelCode> as_union(const BorelCode& c) {
  switch (c.kind()) {
    case BorelCode::Kind::Basic:
      return {c};
    case BorelCode::Kind::Union:
      return c.children();
    case BorelCode::Kind::FUnion: {
      std::vector<BorelCode> out;
      for (const auto& ch : c.children()) {
        auto sub = as_union(ch);
        out.insert(out.end(), sub.begin(), sub.end());
      }
      return out;
    }
    case BorelCode::Kind::Complement: {
      const auto& y = c.child();
      if (y.kind() == BorelCode::Kind::Complement) return as_union(y.child());
      if (y.kind() != BorelCode::Kind::FUnion) return {c};
      // ¬(a ∪ b ∪ ...) = ¬a ∩ ¬b ∩ ...: distribute the intersection over the
      // union presentations of the ¬a.
      std::vector<std::vector<BorelCode>> factors;
      std::size_t total = 1;
      for (const auto& ch : y.children()) {
        factors.push_back(as_union(negate(ch)));
        total *= factors.back().size();
        if (total > kDistributeCap) return {c};
      }
      std::vector<BorelCode> out;
      std::vector<std::size_t> idx(factors.size(), 0);
      for (std::size_t t = 0; t < total; ++t) {
        std::vector<BorelCode> parts;
        for (std::size_t f = 0; f < factors.size(); ++f) parts.push_back(factors[f][idx[f]]);
        BorelCode term = intersection(std::move(parts));
        auto e = decide_empty(term);
        if (!(e && *e)) out.push_back(std::move(term));
        for (std::size_t f = 0; f < factors.size(); ++f) {
          if (++idx[f] < factors[f].size()) break;
          idx[f] = 0;
        }
      }
      if (out.empty()) out.push_back(BorelCode::empty());
      return out;
    }
  }
  return {c};
}

inline std::vector<LeveledPiece> pi_below(const std::vector<BorelCode>& children, unsigned xi) {
  std::vector<LeveledPiece> out;
  if (xi == 1) {
    for (const auto& ch : children)
      if (!classify(ch).clopen()) throw RankTooHigh("level-1 partition needs clopen pieces");
    for (auto& p : disjointify(children)) {
      auto e = decide_empty(p);
      if (e && *e) continue;
      out.push_back({std::move(p), 0});
    }
    return out;
  }
  for (const auto& ch : children)
    if (classify(ch).pi >= xi) throw RankTooHigh("union child at or above the partition level");
  for (std::size_t n = 0; n < children.size(); ++n) {
    const auto& p = children[n];
    if (n == 0) {
      auto e = decide_empty(p);
      if (!(e && *e)) out.push_back({p, classify(p).pi});
      continue;
    }
    std::vector<BorelCode> earlier(children.begin(), children.begin() + static_cast<std::ptrdiff_t>(n));
    auto rest = as_union(BorelCode::complement(BorelCode::funion(std::move(earlier))));
    bool all_clopen = std::all_of(rest.begin(), rest.end(), [](const BorelCode& r) { return classify(r).clopen(); });
    unsigned nu = 1;
    if (!all_clopen)
      for (const auto& r : rest) nu = std::max(nu, classify(r).pi + 1);
    if (nu >= xi) throw MalformedFamily("member is not presented through lower-level codes");
    for (auto& d : pi_below(rest, nu)) {
      BorelCode piece = intersection(p, d.code);
      auto e = decide_empty(piece);
      if (e && *e) continue;
      out.push_back({piece, std::max(classify(p).pi, classify(piece).pi)});
    }
  }
  return out;
}

}  // namespace detail

// Disjoint pieces of Π-level below xi whose union is c.
inline std::vector<LeveledPiece> pi_below_partition(const BorelCode& c, unsigned xi) {
  if (xi < 1) throw std::invalid_argument("pi_below_partition: level must be >= 1");
  if (c.kind() == BorelCode::Kind::Complement) throw MalformedFamily("code is not presented as a union");
  auto out = detail::pi_below(union_children(c), xi);
  for (auto& piece : out)
    if (xi > 1) piece.level = classify(piece.code).pi;
  return out;
}

// ∪_n (preimages[n] ∩ partition[n]).
inline BorelCode glue_preimages(const std::vector<BorelCode>& partition, const std::vector<BorelCode>& preimages) {
  if (partition.size() != preimages.size()) throw std::invalid_argument("glue_preimages: length mismatch");
  if (partition.empty()) throw std::invalid_argument("glue_preimages: empty partition");
  std::vector<BorelCode> cells;
  for (std::size_t n = 0; n < partition.size(); ++n) cells.push_back(intersection(preimages[n], partition[n]));
  if (cells.size() == 1) return cells.front();
  return BorelCode::funion(std::move(cells));
}

// ∪_{m<M} ∪_{n<K} ∩_{n<=k<K} f_k^{-1}(closed ball m). Cutting the intersection
// at K enlarges each term; the bounds on m and n shrink the union.
inline BorelCode limit_preimage_code(const std::map<std::pair<std::size_t, std::size_t>, BorelCode>& ball_preimages,
                                     std::size_t M, std::size_t K) {
  if (M == 0 || K == 0) throw std::invalid_argument("limit_preimage_code: bounds must be >= 1");
  std::vector<BorelCode> terms;
  for (std::size_t m = 0; m < M; ++m)
    for (std::size_t n = 0; n < K; ++n) {
      std::vector<BorelCode> parts;
      for (std::size_t k = n; k < K; ++k) {
        auto it = ball_preimages.find({m, k});
        if (it == ball_preimages.end())
          throw std::out_of_range("missing ball preimage (" + std::to_string(m) + "," + std::to_string(k) + ")");
        parts.push_back(it->second);
      }
      terms.push_back(intersection(std::move(parts)));
    }
  if (terms.size() == 1) return terms.front();
  return BorelCode::union_of(std::move(terms));
}

// ---- text form ----

inline BorelCode parse_code(Cursor& c) {
  c.expect('(');
  std::string head = c.word();
  auto rest = [&] {
    std::vector<BorelCode> out;
    while (true) {
      c.skip_space();
      if (c.peek() == ')') break;
      out.push_back(parse_code(c));
    }
    c.expect(')');
    return out;
  };
  if (head == "basic") {
    FinSeq s = parse_finseq(c);
    c.expect(')');
    return BorelCode::basic(std::move(s));
  }
  std::size_t line = c.line(), col = c.column();
  auto kids = rest();
  auto need = [&](bool ok, const char* what) {
    if (!ok) throw ParseError(what, line, col);
  };
  if (head == "union" || head == "funion" || head == "inter") {
    need(!kids.empty(), "expected at least one child");
    if (head == "union") return BorelCode::union_of(std::move(kids));
    if (head == "funion") return BorelCode::funion(std::move(kids));
    return intersection(std::move(kids));
  }
  if (head == "compl") {
    need(kids.size() == 1, "compl takes exactly one child");
    return BorelCode::complement(kids[0]);
  }
  if (head == "diff") {
    need(kids.size() == 2, "diff takes exactly two children");
    return difference(kids[0], kids[1]);
  }
  throw ParseError("unknown code form '" + head + "'", line, col);
}

inline BorelCode parse_code(std::string_view text) {
  return parse_whole<BorelCode>(text, [](Cursor& c) { return parse_code(c); });
}

// Whitespace-separated sequence of codes; '#' starts a comment to end of line.
inline std::vector<BorelCode> parse_codes(const std::string& text) {
  std::string stripped;
  bool comment = false;
  for (char ch : text) {
    if (ch == '#') comment = true;
    if (ch == '\n') comment = false;
    stripped.push_back(comment ? ' ' : ch);
  }
  Cursor c(stripped);
  std::vector<BorelCode> out;
  c.skip_space();
  while (!c.at_end()) {
    out.push_back(parse_code(c));
    c.skip_space();
  }
  return out;
}

inline std::string to_string(const BorelCode& c) {
  switch (c.kind()) {
    case BorelCode::Kind::Basic:
      return "(basic " + to_string(c.seq()) + ")";
    case BorelCode::Kind::Complement:
      return "(compl " + to_string(c.child()) + ")";
    default: {
      std::string out = c.kind() == BorelCode::Kind::Union ? "(union" : "(funion";
      for (const auto& ch : c.children()) out += " " + to_string(ch);
      return out + ")";
    }
  }
}

}  // namespace baire
