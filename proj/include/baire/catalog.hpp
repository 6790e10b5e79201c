#pragma once

// Shipped examples for the approximation engines, looked up by name, and the
// text form of a Baire-class-1 function given by its level-set reductions.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "baire/approx.hpp"
#include "baire/builtins.hpp"
#include "baire/seqmap_io.hpp"

namespace baire {

namespace detail {

// Label whose level-set ground truth holds; the level sets must partition.
inline std::function<std::size_t(const Point&)> truth_from_levels(const std::vector<Sigma02Set>& levels) {
  std::vector<PointPredicate> truths;
  for (const auto& l : levels) {
    if (!l.ground_truth) throw std::invalid_argument("level set without a decidable ground truth");
    truths.push_back(*l.ground_truth);
  }
  return [truths](const Point& x) {
    std::optional<std::size_t> hit;
    for (std::size_t i = 0; i < truths.size(); ++i)
      if (truths[i](x)) {
        if (hit) throw std::logic_error("level sets overlap at " + to_string(x));
        hit = i;
      }
    if (!hit) throw std::logic_error("no level set contains " + to_string(x));
    return *hit;
  };
}

inline Baire1Spec spec_from_levels(std::string name, CompMetricSpace y, Nat branch, std::vector<Sigma02Set> levels) {
  auto truth = truth_from_levels(levels);
  return {std::move(name), std::move(y), branch, std::move(levels), std::move(truth)};
}

}  // namespace detail

inline std::vector<std::string> baire1_catalog() { return {"constant", "nozero", "zerocount", "firstzero"}; }

inline Baire1Spec baire1_spec(const std::string& name) {
  using detail::spec_from_levels;
  if (name == "constant")
    return spec_from_levels(name, CompMetricSpace::on_line({Rational(0), Rational(1)}), 1,
                            {sigma02_builtin("full"), sigma02_builtin("empty")});
  // Indicator of the closed set of points without a zero.
  if (name == "nozero")
    return spec_from_levels(name, CompMetricSpace::on_line({Rational(0), Rational(1)}), 1,
                            {sigma02_builtin("haszero"), sigma02_builtin("nozero")});
  // min(#zeros, 4) / 4 on the grid {j/8}.
  if (name == "zerocount") {
    std::vector<Sigma02Set> levels;
    for (Nat j = 0; j <= 8; ++j) {
      if (j % 2 == 1)
        levels.push_back(sigma02_builtin("empty"));
      else if (j < 8)
        levels.push_back(sigma02_builtin("zero_count_eq", {j / 2}));
      else
        levels.push_back(sigma02_builtin("zero_count_ge", {4}));
    }
    return spec_from_levels(name, CompMetricSpace::grid(8), 1, std::move(levels));
  }
  // 2^-i for a first zero at i < 4, 1/16 for a later first zero, 0 without zeros.
  if (name == "firstzero") {
    std::vector<Rational> pts;
    std::vector<Sigma02Set> levels;
    for (Nat i = 0; i < 4; ++i) {
      pts.push_back(Rational(1, std::int64_t{1} << i));
      levels.push_back(sigma02_builtin("first_zero_in", {i, i + 1}));
    }
    pts.push_back(Rational(1, 16));
    levels.push_back(sigma02_builtin("first_zero_from", {4}));
    pts.push_back(Rational(0));
    levels.push_back(sigma02_builtin("nozero"));
    return spec_from_levels(name, CompMetricSpace::on_line(pts), 1, std::move(levels));
  }
  throw std::invalid_argument("unknown Baire-1 example: " + name);
}

// Text form:
//   name: example
//   points: 0 1/2 1          rationals in [0,1], distance |a - b|
//   branch: 1
//   level 0: nozero          one builtin set per point
inline Baire1Spec parse_baire1_spec(const std::string& text) {
  auto lines = content_lines(text);
  std::string name = "file";
  std::vector<Rational> pts;
  std::optional<Nat> branch;
  std::map<std::size_t, std::pair<std::size_t, Sigma02Set>> levels;
  bool have_points = false;
  for (const auto& [no, line] : lines) {
    Cursor c(line, no);
    std::string key = c.word();
    if (key == "name") {
      c.expect(':');
      name = c.word();
      c.expect_end();
    } else if (key == "points") {
      c.expect(':');
      while (!(c.skip_space(), c.at_end())) {
        Rational q = parse_rational(c);
        if (q < 0 || q > 1) c.fail("point outside [0,1]");
        pts.push_back(q);
      }
      if (pts.empty()) c.fail("no points");
      have_points = true;
    } else if (key == "branch") {
      c.expect(':');
      branch = c.natural();
      if (*branch == 0) c.fail("branch must be >= 1");
      c.expect_end();
    } else if (key == "level") {
      auto i = static_cast<std::size_t>(c.natural());
      c.expect(':');
      std::string builtin = c.word();
      std::vector<Nat> params;
      while (!(c.skip_space(), c.at_end())) params.push_back(c.natural());
      if (levels.count(i)) c.fail("duplicate level");
      try {
        levels.emplace(i, std::pair{no, sigma02_builtin(builtin, params)});
      } catch (const std::invalid_argument& e) {
        c.fail(e.what());
      }
    } else {
      c.fail("unknown key '" + key + "'");
    }
  }
  std::size_t last = lines.empty() ? 1 : lines.back().first;
  if (!have_points) throw ParseError("missing points", last, 1);
  if (!branch) throw ParseError("missing branch", last, 1);
  std::vector<Sigma02Set> ordered;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    auto it = levels.find(i);
    if (it == levels.end()) throw ParseError("missing level " + std::to_string(i), last, 1);
    ordered.push_back(it->second.second);
  }
  if (levels.size() != pts.size()) throw ParseError("level index beyond the points", levels.rbegin()->second.first, 1);
  return detail::spec_from_levels(name, CompMetricSpace::on_line(pts), *branch, std::move(ordered));
}

// A catalog name, or a path to a file in the text form above.
inline Baire1Spec load_baire1_spec(const std::string& name_or_path) {
  for (const auto& n : baire1_catalog())
    if (n == name_or_path) return baire1_spec(n);
  return parse_baire1_spec(read_file(name_or_path));
}

namespace detail {

inline BorelCode cyl(FinSeq s) { return BorelCode::basic(std::move(s)); }

// Cells of the tree {[0,0],[0,1],[0]rest,[1,0],[1,1],[1]rest,[]rest} and the
// value (in sixteenths) on each.
struct TreeCell {
  BorelCode code;
  std::int64_t sixteenths;
};

inline std::vector<TreeCell> tree_cells() {
  auto rest = [](FinSeq s) {
    return difference(cyl(s), BorelCode::funion({cyl(s.append(0)), cyl(s.append(1))}));
  };
  return {{cyl({0, 0}), 0}, {cyl({0, 1}), 3}, {rest({0}), 5}, {cyl({1, 0}), 8},
          {cyl({1, 1}), 9}, {rest({1}), 13},  {rest({}), 16}};
}

inline std::int64_t tree_value(const Point& x) {
  static const std::int64_t table[2][3] = {{0, 3, 5}, {8, 9, 13}};
  if (x.at(0) >= 2) return 16;
  return table[x.at(0)][std::min<Nat>(x.at(1), 2)];
}

}  // namespace detail

inline std::vector<std::string> step_catalog() { return {"step-constant", "step-indicator", "step-tree"}; }

inline StepSpec step_spec(const std::string& name) {
  using detail::cyl;
  auto two = CompMetricSpace::on_line({Rational(0), Rational(1)});
  if (name == "step-constant") {
    return {name, two, 2, 1,
            [](std::size_t n, std::size_t) {
              return BorelCode::union_of({n == 0 ? BorelCode::whole() : BorelCode::empty()});
            },
            [](const Point&) { return std::size_t{0}; }};
  }
  // Indicator of A = (N_[0] \ N_[0,0]) ∪ N_[1].
  if (name == "step-indicator") {
    auto a = BorelCode::union_of({difference(cyl({0}), cyl({0, 0})), cyl({1})});
    auto not_a = BorelCode::union_of(
        {cyl({0, 0}), difference(BorelCode::whole(), BorelCode::funion({cyl({0}), cyl({1})}))});
    return {name, two, 2, 1, [a, not_a](std::size_t n, std::size_t) { return n == 0 ? not_a : a; },
            [](const Point& x) { return std::size_t{x.at(0) == 1 || (x.at(0) == 0 && x.at(1) != 0)}; }};
  }
  if (name == "step-tree") {
    auto cells = detail::tree_cells();
    return {name, CompMetricSpace::grid(16), 17, 1,
            [cells](std::size_t n, std::size_t k) {
              std::vector<BorelCode> in;
              Rational r = Dyadic::inv_pow2(k + 1).to_rational();
              for (const auto& c : cells)
                if (rational_abs_diff(Rational(c.sixteenths, 16), Rational(static_cast<std::int64_t>(n), 16)) < r)
                  in.push_back(c.code);
              if (in.empty()) in.push_back(BorelCode::empty());
              return BorelCode::union_of(std::move(in));
            },
            [](const Point& x) { return static_cast<std::size_t>(detail::tree_value(x)); }};
  }
  throw std::invalid_argument("unknown step example: " + name);
}

// Continuous f_n(x) = min(#zeros in x|n, 4)/4 converging to f(x) = min(#zeros, 4)/4,
// with uniform approximants g_{n,m} = f_n + 2^-(m+1) [x(m) = 0].
struct TwoStageExample {
  std::vector<RealFn> fn;
  RealFn f;
  DoubleSequence g;
};

inline TwoStageExample two_stage_example(std::size_t count) {
  auto fn_at = [](std::size_t n) -> RealFn {
    return [n](const Point& x) {
      std::int64_t c = 0;
      for (std::size_t i = 0; i < n; ++i) c += x.at(i) == 0;
      return Rational(std::min<std::int64_t>(c, 4), 4);
    };
  };
  TwoStageExample ex;
  for (std::size_t n = 0; n < count; ++n) ex.fn.push_back(fn_at(n));
  ex.f = [](const Point& x) {
    auto c = x.count_of(0);
    return Rational(c ? std::min<std::int64_t>(static_cast<std::int64_t>(*c), 4) : 4, 4);
  };
  ex.g = [fn_at](std::size_t n, std::size_t m) -> RealFn {
    auto base = fn_at(n);
    return [base, m](const Point& x) {
      return base(x) + (x.at(m) == 0 ? Dyadic::inv_pow2(m + 1).to_rational() : Rational(0));
    };
  };
  return ex;
}

}  // namespace baire
