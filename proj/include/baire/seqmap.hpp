#pragma once

// Continuous functions on Baire space presented as monotone prefix maps
// phi : finite sequences -> finite sequences, with f_phi(x) = U_n phi(x|n).

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "baire/seq.hpp"
#include "baire/text.hpp"

namespace baire {

// Length-preserving transducer: one output symbol per input symbol.
struct Mealy {
  std::uint64_t initial = 0;
  std::function<std::pair<std::uint64_t, Nat>(std::uint64_t, Nat)> step;

  FinSeq run(const FinSeq& s) const {
    std::vector<Nat> out;
    out.reserve(s.size());
    std::uint64_t q = initial;
    for (Nat v : s) {
      auto [next, o] = step(q, v);
      out.push_back(o);
      q = next;
    }
    return FinSeq(std::move(out));
  }
};

class ViolationFound : public std::runtime_error {
 public:
  ViolationFound(FinSeq s, FinSeq t)
      : std::runtime_error("monotonicity violated between " + to_string(s) + " and " + to_string(t)),
        s_(std::move(s)),
        t_(std::move(t)) {}
  const FinSeq& shorter() const { return s_; }
  const FinSeq& longer() const { return t_; }

 private:
  FinSeq s_, t_;
};

class IncoherentOracle : public std::runtime_error {
 public:
  IncoherentOracle(FinSeq s, FinSeq t)
      : std::runtime_error("oracle values incomparable at " + to_string(s) + " and " + to_string(t)),
        s_(std::move(s)),
        t_(std::move(t)) {}
  const FinSeq& shorter() const { return s_; }
  const FinSeq& longer() const { return t_; }

 private:
  FinSeq s_, t_;
};

class SeqMap {
 public:
  enum class Kind { Table, Builtin, Composite, Custom };
  // How a table map answers outside its tabulated domain: from the longest
  // tabulated prefix p of s, either return table(p) (Freeze) or table(p)
  // followed by the rest of s (Copy).
  enum class Extension { Freeze, Copy };
  using Rule = std::function<FinSeq(const FinSeq&)>;

  SeqMap() = default;

  static SeqMap identity() {
    return builtin("identity", {}, Mealy{0, [](std::uint64_t q, Nat v) { return std::pair{q, v}; }});
  }

  // Built-in rules are monotone by construction; the bounds are nominal.
  static SeqMap builtin(std::string name, std::vector<Nat> params, Mealy mealy) {
    SeqMap m;
    m.kind_ = Kind::Builtin;
    m.name_ = std::move(name);
    m.params_ = std::move(params);
    auto shared = std::make_shared<const Mealy>(std::move(mealy));
    m.mealy_ = shared;
    m.rule_ = [shared](const FinSeq& s) { return shared->run(s); };
    m.certified_ = true;
    m.length_preserving_ = true;
    return m;
  }

  static SeqMap builtin_rule(std::string name, std::vector<Nat> params, Rule rule, bool length_preserving) {
    SeqMap m;
    m.kind_ = Kind::Builtin;
    m.name_ = std::move(name);
    m.params_ = std::move(params);
    m.rule_ = std::move(rule);
    m.certified_ = true;
    m.length_preserving_ = length_preserving;
    return m;
  }

  // Rule assembled from certified parts (control functions, compositions).
  static SeqMap derived(std::string name, Rule rule, bool length_preserving) {
    SeqMap m;
    m.kind_ = Kind::Composite;
    m.name_ = std::move(name);
    m.rule_ = std::move(rule);
    m.certified_ = true;
    m.length_preserving_ = length_preserving;
    return m;
  }

  // Arbitrary procedure; nothing is assumed about it until validated.
  static SeqMap custom(std::string name, Rule rule, std::size_t depth, Nat branch, bool length_preserving = false) {
    SeqMap m;
    m.kind_ = Kind::Custom;
    m.name_ = std::move(name);
    m.rule_ = std::move(rule);
    m.depth_ = depth;
    m.branch_ = branch;
    m.length_preserving_ = length_preserving;
    return m;
  }

  // The table must cover every sequence of length <= depth with entries < branch.
  static SeqMap table(std::map<FinSeq, FinSeq> entries, std::size_t depth, Nat branch, Extension ext) {
    for (const auto& s : all_sequences_upto(depth, branch))
      if (!entries.count(s)) throw std::invalid_argument("table map missing entry for " + to_string(s));
    for (const auto& [s, t] : entries) {
      bool in_domain = s.size() <= depth && std::all_of(s.begin(), s.end(), [&](Nat v) { return v < branch; });
      if (!in_domain) throw std::invalid_argument("table entry outside declared domain: " + to_string(s));
    }
    SeqMap m;
    m.kind_ = Kind::Table;
    m.depth_ = depth;
    m.branch_ = branch;
    m.extension_ = ext;
    auto shared = std::make_shared<const std::map<FinSeq, FinSeq>>(std::move(entries));
    m.table_ = shared;
    m.rule_ = [shared, depth, branch, ext](const FinSeq& s) {
      std::size_t p = 0;
      while (p < s.size() && p < depth && s[p] < branch) ++p;
      FinSeq out = shared->at(s.prefix(p));
      if (ext == Extension::Copy)
        for (std::size_t i = p; i < s.size(); ++i) out.push_back(s[i]);
      return out;
    };
    bool lp = ext == Extension::Copy;
    for (const auto& [s, t] : *shared) lp = lp && s.size() == t.size();
    m.length_preserving_ = lp;
    return m;
  }

  FinSeq operator()(const FinSeq& s) const {
    if (!rule_) throw std::logic_error("SeqMap: empty rule");
    return rule_(s);
  }

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  const std::vector<Nat>& params() const { return params_; }
  std::size_t declared_depth() const { return depth_; }
  Nat declared_branch() const { return branch_; }
  Extension extension() const { return extension_; }
  bool certified_by_construction() const { return certified_; }
  bool length_preserving() const { return length_preserving_; }
  const Mealy* mealy() const { return mealy_.get(); }
  const std::map<FinSeq, FinSeq>* table_entries() const { return table_.get(); }

  // Bounds beyond which validation is not meaningful; built-ins have none.
  bool bounded() const { return kind_ == Kind::Table || kind_ == Kind::Custom; }

  friend SeqMap compose(const SeqMap& phi, const SeqMap& psi);

 private:
  Kind kind_ = Kind::Custom;
  std::string name_;
  std::vector<Nat> params_;
  Rule rule_;
  std::size_t depth_ = 0;
  Nat branch_ = 0;
  Extension extension_ = Extension::Freeze;
  bool certified_ = false;
  bool length_preserving_ = false;
  std::shared_ptr<const Mealy> mealy_;
  std::shared_ptr<const std::map<FinSeq, FinSeq>> table_;
};

struct MonotoneReport {
  bool certified = false;
  std::size_t checked = 0;
  std::optional<std::pair<FinSeq, FinSeq>> violation;
};

// Exhaustive prefix-preservation check over sequences of length <= depth with
// entries < branch. One-step extensions suffice since the prefix order is
// generated by them.
inline MonotoneReport validate_monotone(const SeqMap& phi, std::size_t depth, Nat branch) {
  if (phi.bounded() && (depth > phi.declared_depth() || branch > phi.declared_branch()))
    throw std::invalid_argument("validate_monotone: domain exceeds declared bounds");
  MonotoneReport rep;
  std::vector<FinSeq> level{FinSeq{}};
  for (std::size_t len = 0; len < depth; ++len) {
    std::vector<FinSeq> next;
    for (const auto& s : level) {
      FinSeq ps = phi(s);
      for (Nat i = 0; i < branch; ++i) {
        FinSeq t = s.append(i);
        ++rep.checked;
        if (!ps.is_prefix_of(phi(t))) {
          rep.violation = std::pair{s, t};
          return rep;
        }
        next.push_back(std::move(t));
      }
    }
    level = std::move(next);
  }
  rep.certified = true;
  return rep;
}

inline void require_monotone(const SeqMap& phi, std::size_t depth, Nat branch) {
  auto rep = validate_monotone(phi, depth, branch);
  if (rep.violation) throw ViolationFound(rep.violation->first, rep.violation->second);
}

struct EvalResult {
  std::optional<FinSeq> value;  // nullopt: budget exhausted before n outputs appeared
  std::size_t inputs_read = 0;
  bool diverged() const { return !value.has_value(); }
};

// First n entries of f_phi(x), reading at most `budget` input entries.
inline EvalResult induced_eval(const SeqMap& phi, const Point& x, std::size_t n, std::size_t budget) {
  FinSeq input;
  for (std::size_t m = 0;; ++m) {
    FinSeq out = phi(input);
    if (out.size() >= n) return {out.prefix(n), m};
    if (m >= budget) return {std::nullopt, m};
    input.push_back(x.at(m));
  }
}

// s -> psi(phi(s))
inline SeqMap compose(const SeqMap& phi, const SeqMap& psi) {
  SeqMap m;
  m.kind_ = SeqMap::Kind::Composite;
  m.name_ = "compose";
  m.depth_ = phi.depth_;
  m.branch_ = phi.branch_;
  m.certified_ = phi.certified_ && psi.certified_;
  m.length_preserving_ = phi.length_preserving_ && psi.length_preserving_;
  m.rule_ = [phi, psi](const FinSeq& s) { return psi(phi(s)); };
  if (phi.mealy_ && psi.mealy_) {
    auto a = phi.mealy_;
    auto b = psi.mealy_;
    // Product states are packed as (qa << 32) | qb.
    m.mealy_ = std::make_shared<const Mealy>(Mealy{
        (a->initial << 32) | b->initial, [a, b](std::uint64_t q, Nat v) {
          std::uint64_t qa = q >> 32, qb = q & 0xffffffffULL;
          auto [na, oa] = a->step(qa, v);
          auto [nb, ob] = b->step(qb, oa);
          if (na > 0xffffffffULL || nb > 0xffffffffULL) throw std::overflow_error("compose: state overflow");
          return std::pair{(na << 32) | nb, ob};
        }});
  }
  return m;
}

// Canonical map from a certified guarantee oracle g (f(N_s) inside N_{g(s)}):
// phi(s) = g(s) truncated to length lh(s).
inline SeqMap seqmap_from_prefix_oracle(std::function<FinSeq(const FinSeq&)> g, std::size_t depth, Nat branch) {
  auto domain = all_sequences_upto(depth, branch);
  std::map<FinSeq, FinSeq> cache;
  for (const auto& t : domain) cache.emplace(t, g(t));
  for (const auto& t : domain)
    for (std::size_t n = 0; n < t.size(); ++n) {
      FinSeq s = t.prefix(n);
      if (!cache.at(s).comparable(cache.at(t))) throw IncoherentOracle(s, t);
    }
  auto rule = [g](const FinSeq& s) {
    FinSeq gs = g(s);
    return gs.prefix(std::min(gs.size(), s.size()));
  };
  SeqMap m = SeqMap::custom("prefix-oracle", rule, depth, branch);
  require_monotone(m, depth, branch);
  return m;
}

}  // namespace baire
