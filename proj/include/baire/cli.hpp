#pragma once

// Subcommands of the command-line front end as plain functions from options
// to {exit status, report, summary}. Reports are tab-separated lines under a
// versioned header; '#' lines are comments.

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "baire/catalog.hpp"
#include "baire/embed.hpp"
#include "baire/family_io.hpp"
#include "baire/grid_check.hpp"

namespace baire::cli {

enum Status : int { kOk = 0, kInputError = 1, kVerificationFailed = 2 };

struct Outcome {
  int status = kOk;
  std::string report;
  std::string summary;
};

class Report {
 public:
  explicit Report(const std::string& command) { out_ << "# baire-report v1 " << command << '\n'; }

  void comment(const std::string& text) { out_ << "# " << text << '\n'; }

  template <typename... T>
  void row(const T&... fields) {
    bool first = true;
    ((out_ << (first ? "" : "\t") << cell(fields), first = false), ...);
    out_ << '\n';
  }

  std::string str() const { return out_.str(); }

 private:
  template <typename T>
  static std::string cell(const T& v) {
    if constexpr (std::is_same_v<T, bool>)
      return v ? "yes" : "no";
    else if constexpr (std::is_arithmetic_v<T>)
      return std::to_string(v);
    else if constexpr (std::is_convertible_v<T, std::string>)
      return std::string(v);
    else
      return to_string(v);
  }

  std::ostringstream out_;
};

// Points come from inline text, a file (one per line), and seeded random
// draws, in that order.
struct PointSource {
  std::vector<std::string> inline_points;
  std::string file;
  std::size_t random = 0;
  std::uint64_t seed = 1;
  Nat alphabet = 4;
};

inline Point random_point(std::mt19937_64& rng, Nat alphabet, std::size_t max_head = 8, std::size_t max_period = 3) {
  auto draw = [&](std::uint64_t bound) { return static_cast<Nat>(rng() % bound); };
  std::vector<Nat> head(draw(max_head + 1));
  for (auto& v : head) v = draw(alphabet);
  if (draw(2) == 0) return Point::constant(FinSeq(std::move(head)), draw(alphabet));
  std::vector<Nat> cyc(1 + draw(max_period));
  for (auto& v : cyc) v = draw(alphabet);
  return Point::periodic(FinSeq(std::move(head)), std::move(cyc));
}

inline std::vector<Point> collect_points(const PointSource& src) {
  std::vector<Point> out;
  for (const auto& p : src.inline_points) out.push_back(parse_point(p));
  if (!src.file.empty()) {
    auto more = load_points(src.file);
    out.insert(out.end(), more.begin(), more.end());
  }
  std::mt19937_64 rng(src.seed);
  for (std::size_t i = 0; i < src.random; ++i) out.push_back(random_point(rng, src.alphabet));
  if (out.empty()) throw std::invalid_argument("no sample points given");
  return out;
}

// "1..5", "2,4,8" or a mix such as "1..3,6".
inline std::vector<std::size_t> parse_ks(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    Cursor c(part);
    auto lo = static_cast<std::size_t>(c.natural());
    std::size_t hi = lo;
    c.skip_space();
    if (c.consume('.')) {
      c.expect('.');
      hi = static_cast<std::size_t>(c.natural());
    }
    c.expect_end();
    if (lo == 0 || hi < lo || hi > 4096) c.fail("k must be a range within 1..4096");
    for (std::size_t k = lo; k <= hi; ++k) out.push_back(k);
  }
  if (out.empty()) throw ParseError("empty k list", 1, 1);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline std::string format_codes(const std::vector<BorelCode>& codes) {
  std::string out;
  for (const auto& c : codes) out += to_string(c) + '\n';
  return out;
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

// ---- control-trace ----

struct ControlTraceOptions {
  std::vector<std::string> family;
  std::string schedule;  // overrides the family's own schedule when set
  PointSource points;
  std::size_t horizon = 64;
  bool trace = false;
};

inline Outcome control_trace(const ControlTraceOptions& o) {
  if (o.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  auto fam = load_family(o.family);
  std::string sched_text = o.schedule.empty() ? fam.schedule : o.schedule;
  Schedule schedule = parse_schedule(sched_text, fam.members.size());
  auto u = union_reduction(fam.members, schedule);
  const auto& phi = *u.control;
  auto pts = collect_points(o.points);

  Report rep("control-trace");
  std::string names;
  for (const auto& n : fam.names) names += (names.empty() ? "" : ",") + n;
  rep.comment("family " + names + " schedule " + sched_text + " horizon " + std::to_string(o.horizon));

  std::vector<std::optional<PointPredicate>> truths;
  for (const auto& m : fam.members) truths.push_back(m.ground_truth);
  std::optional<UnionReport> checked;
  if (fam.all_truths()) checked = verify_union(phi, fam.members, pts, o.horizon);

  rep.row("sample", "point", "status", "m", "index", "position", "member", "ok");
  std::size_t stable = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    auto sp = stabilizing_point(phi, pts[i], o.horizon, truths);
    if (sp.status != Stability::NotStableAtHorizon) ++stable;
    std::string member = "?", ok = "?";
    if (checked) {
      member = checked->rows[i].member ? "yes" : "no";
      ok = checked->rows[i].ok ? "yes" : "no";
    }
    rep.row(i, pts[i], to_string(sp.status), sp.m, sp.state.index, sp.state.position, member, ok);
    if (o.trace) {
      auto tr = state_trace(phi, pts[i], o.horizon);
      FinSeq star = phi.star(pts[i].prefix(o.horizon));
      for (std::size_t n = 0; n < tr.size(); ++n)
        rep.row("trace", i, n, tr[n].index, tr[n].position, n == 0 ? std::string("-") : std::to_string(star[n - 1]));
    }
  }
  Outcome out;
  std::size_t failures = checked ? checked->failures : 0;
  out.status = failures ? kVerificationFailed : kOk;
  out.report = rep.str();
  out.summary = "control-trace: " + std::to_string(pts.size()) + " samples, " + std::to_string(stable) + " stable, " +
                (checked ? std::to_string(failures) + " equivalence failures" : std::string("no ground truth to check")) +
                "\n";
  return out;
}

// ---- approx-run ----

struct ApproxRunOptions {
  std::string spec;  // catalog name or spec file
  std::string ks = "1..5";
  std::size_t n = 3;
  std::size_t horizon = 24;
  PointSource points;
  std::size_t scheme_depth = 40;
  std::size_t full_max = 6;  // tabulate and check approximants up to this k
  std::size_t full_k = 0;
  std::string full_out;
};

inline Outcome step_run(const ApproxRunOptions& o, const std::vector<std::size_t>& ks, const std::vector<Point>& pts) {
  auto spec = step_spec(o.spec);
  Report rep("approx-run");
  rep.comment("step " + spec.name);
  rep.row("k", "sample", "point", "value", "truth", "error", "within");
  std::size_t bad = 0;
  std::size_t gaps = 0;
  for (auto k : ks) {
    auto approx = step_approximation(spec, k);
    Dyadic bound = Dyadic::inv_pow2(k);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      std::size_t truth = spec.ground_truth(pts[i]);
      try {
        std::size_t v = approx.value(pts[i]);
        Rational e = spec.space.dist(v, truth);
        bool within = compare(e, bound) != std::strong_ordering::greater;
        bad += !within;
        rep.row(k, i, pts[i], spec.space.label(v), spec.space.label(truth), e, within);
      } catch (const CoverGap& g) {
        ++gaps;
        rep.row(k, i, pts[i], "unknown", spec.space.label(truth), "-", "unknown");
      }
    }
  }
  Outcome out;
  out.status = bad ? kVerificationFailed : kOk;
  out.report = rep.str();
  out.summary = "approx-run " + spec.name + ": " + std::to_string(pts.size()) + " samples, " + std::to_string(bad) +
                " beyond 2^-k, " + std::to_string(gaps) + " unresolved\n";
  return out;
}

inline Outcome approx_run(const ApproxRunOptions& o) {
  auto ks = parse_ks(o.ks);
  if (o.horizon < 1 || o.scheme_depth < 1) throw std::invalid_argument("limits must be >= 1");
  auto steps = step_catalog();
  bool step = std::find(steps.begin(), steps.end(), o.spec) != steps.end();
  PointSource src = o.points;
  if (src.inline_points.empty() && src.file.empty() && src.random == 0) src.random = 50;
  auto pts = collect_points(src);
  if (step) return step_run(o, ks, pts);

  Baire1Approximation a(load_baire1_spec(o.spec), o.scheme_depth);
  const auto& y = a.spec().space;
  if (ks.back() > o.horizon) throw std::invalid_argument("k beyond the horizon");
  Report rep("approx-run");
  rep.comment("spec " + a.spec().name + " n " + std::to_string(o.n) + " horizon " + std::to_string(o.horizon));

  std::size_t problems = 0;
  rep.row("full", "k", "depth", "constant", "values", "bound", "nodes", "outside");
  for (auto k : ks) {
    if (k > o.full_max) break;
    auto full = baire1_to_full(a, k);
    std::set<std::size_t> used(full.function.table().begin(), full.function.table().end());
    double bound = std::pow(static_cast<double>(k + 1), static_cast<double>(k + 1));
    bool over = static_cast<double>(used.size()) > bound;
    problems += over + full.outside.size();
    rep.row("full", k, full.function.depth(), full_constant(full.function.depth()), used.size(),
            static_cast<std::uint64_t>(bound), full.distinct_nodes, full.outside.size());
  }
  if (o.full_k) {
    auto full = baire1_to_full(a, o.full_k);
    if (!o.full_out.empty()) write_file(o.full_out, format_full(full.function));
  }

  std::vector<std::size_t> tested = ks;
  tested.push_back(o.horizon);
  auto conv = convergence_report(a, tested, pts, o.n, o.horizon);
  rep.row("sample", "k", "point", "node", "value", "truth", "error", "within");
  for (std::size_t i = 0; i < conv.samples.size(); ++i) {
    const auto& s = conv.samples[i];
    for (const auto& r : s.rows)
      rep.row("sample", r.k, s.x, r.run.node, y.label(r.run.value), y.label(s.truth), r.error, r.within);
    rep.row("settle", i, s.x, s.m ? std::to_string(*s.m) : std::string("fails-at-horizon"));
  }
  problems += conv.failures();
  Outcome out;
  out.status = problems ? kVerificationFailed : kOk;
  out.report = rep.str();
  out.summary = "approx-run " + a.spec().name + ": " + std::to_string(pts.size()) + " samples, " +
                std::to_string(conv.failures()) + " convergence failures, threshold " + to_string(conv.threshold) +
                "\n";
  return out;
}

// ---- partition-refine and reduce-family ----

struct PartitionOptions {
  std::string codes;  // file of codes
  std::string mode = "two-pi";  // two-pi or pi-below; reduce for reduce-family
  unsigned xi = 1;
  std::size_t grid_depth = 3;
  Nat grid_branch = 3;
  std::size_t budget = kDefaultEvalBudget;
  std::string out;  // pieces file
};

inline Outcome partition_refine(const PartitionOptions& o) {
  if (o.xi < 1) throw std::invalid_argument("level must be >= 1");
  auto codes = parse_codes(read_file(o.codes));
  if (codes.empty()) throw std::invalid_argument("no codes in " + o.codes);
  std::string cmd = o.mode == "reduce" ? "reduce-family" : "partition-refine";
  Report rep(cmd);
  rep.comment("mode " + o.mode + " xi " + std::to_string(o.xi) + " grid " + std::to_string(o.grid_depth) + "/" +
              std::to_string(o.grid_branch));
  auto grid = standard_grid(o.grid_depth, o.grid_branch);
  std::vector<BorelCode> pieces, containers;
  std::vector<std::string> tags;
  std::size_t shape_failures = 0;
  PieceCheck total;
  auto absorb = [&](const PieceCheck& c) {
    total.points += c.points;
    total.evaluations += c.evaluations;
    total.unknown += c.unknown;
    total.contradictions += c.contradictions;
    total.notes.insert(total.notes.end(), c.notes.begin(), c.notes.end());
  };

  rep.row("piece", "index", "source", "level", "flag", "code");
  if (o.mode == "reduce") {
    pieces = generalized_reduction(codes, o.xi);
    containers = codes;
    for (std::size_t i = 0; i < pieces.size(); ++i)
      rep.row("piece", i, i, classify(pieces[i]).pi, "-", pieces[i]);
    absorb(check_pieces(pieces, containers, BorelCode::funion(codes), grid, o.budget));
  } else if (o.mode == "two-pi") {
    auto r = refine_to_two_pi(codes, o.xi);
    pieces = r.pieces;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      containers.push_back(codes[r.parent[i]]);
      bool shape = two_pi_shape(pieces[i], o.xi);
      shape_failures += !shape;
      rep.row("piece", i, r.parent[i], classify(pieces[i]).pi,
              !shape ? "bad-shape" : (r.undecided[i] ? "undecided" : "-"), pieces[i]);
    }
    rep.comment("skipped " + std::to_string(r.skipped) + " empty pieces");
    absorb(check_pieces(pieces, containers, BorelCode::funion(codes), grid, o.budget));
  } else if (o.mode == "pi-below") {
    for (std::size_t c = 0; c < codes.size(); ++c) {
      auto lp = pi_below_partition(codes[c], o.xi);
      std::vector<BorelCode> mine;
      for (const auto& p : lp) {
        bool level_ok = o.xi == 1 ? p.level == 0 : p.level < o.xi;
        shape_failures += !level_ok;
        rep.row("piece", pieces.size(), c, p.level, level_ok ? "-" : "bad-level", p.code);
        pieces.push_back(p.code);
        mine.push_back(p.code);
      }
      if (mine.empty()) mine.push_back(BorelCode::empty());
      absorb(check_pieces(mine, std::vector<BorelCode>(mine.size(), codes[c]), codes[c], grid, o.budget));
    }
  } else {
    throw std::invalid_argument("unknown mode '" + o.mode + "'");
  }
  rep.row("check", "points", "evaluations", "unknown", "contradictions", "shape-failures");
  rep.row("check", total.points, total.evaluations, total.unknown, total.contradictions, shape_failures);
  for (const auto& n : total.notes) rep.comment(n);
  if (!o.out.empty()) write_file(o.out, format_codes(pieces));

  Outcome out;
  out.status = total.contradictions || shape_failures ? kVerificationFailed : kOk;
  out.report = rep.str();
  out.summary = cmd + ": " + std::to_string(pieces.size()) + " pieces, " + std::to_string(total.contradictions) +
                " contradictions, " + std::to_string(total.unknown) + "/" + std::to_string(total.evaluations) +
                " unknown\n";
  return out;
}

// ---- embed ----

struct EmbedOptions {
  std::string space;  // ultrametric file; empty with random_seed set draws one
  std::optional<std::uint64_t> random_seed;
  std::size_t max_leaves = 32;
  std::size_t depth = 20;
  bool verify = false;
  std::string transfer;  // Baire-1 spec carried through h^-1
  std::size_t n = 3;
  std::size_t horizon = 24;
  std::size_t full_max = 5;
  std::string space_out;
};

inline Outcome embed(const EmbedOptions& o) {
  if (o.depth < 1) throw std::invalid_argument("depth must be >= 1");
  std::optional<UltraSpace> x;
  if (!o.space.empty()) {
    x = parse_ultra(read_file(o.space));
  } else if (o.random_seed) {
    std::mt19937_64 rng(*o.random_seed);
    x = random_dendrogram(rng, o.max_leaves);
  } else {
    throw std::invalid_argument("embed needs --space or --random");
  }
  if (!o.space_out.empty()) write_file(o.space_out, format_ultra(*x));
  auto scheme = build_lusin_scheme(*x, o.depth);
  auto sep = scheme.separation_depth();

  Report rep("embed");
  rep.comment("labels " + std::to_string(x->size()) + " depth " + std::to_string(o.depth) + " separation " +
              (sep ? std::to_string(*sep) : std::string("none")));
  rep.row("label", "index", "branch");
  std::size_t show = sep ? std::max<std::size_t>(*sep, 1) : o.depth;
  for (std::size_t u = 0; u < x->size(); ++u) rep.row("label", u, scheme.invert_h(u, show));

  std::size_t problems = 0;
  std::string summary = "embed: " + std::to_string(x->size()) + " labels";
  if (o.verify) {
    auto lusin = verify_lusin(scheme);
    auto bl = verify_bilipschitz(scheme);
    rep.row("pair", "u", "v", "d", "d-induced");
    for (std::size_t u = 0; u < x->size(); ++u)
      for (std::size_t v = u + 1; v < x->size(); ++v) {
        std::string dp = "unseparated";
        try {
          dp = to_string(induced_ultrametric(scheme, u, v));
        } catch (const SeparationFailure&) {
        }
        rep.row("pair", u, v, x->dist(u, v), dp);
      }
    rep.row("bilipschitz", "pairs", "max-forward", "max-backward", "failures");
    rep.row("bilipschitz", bl.pairs, bl.max_forward, bl.max_backward, bl.failures.size());
    for (const auto& f : lusin) rep.comment("scheme: " + f);
    for (const auto& f : bl.failures) rep.comment("bilipschitz: " + f);
    problems += lusin.size() + bl.failures.size();
    summary += ", max ratios " + to_string(bl.max_forward) + " / " + to_string(bl.max_backward) + ", " +
               std::to_string(lusin.size() + bl.failures.size()) + " failures";
  }
  if (!o.transfer.empty()) {
    Baire1Approximation a(load_baire1_spec(o.transfer));
    auto t = transfer_through_embedding(a, scheme, o.full_max, o.n, o.horizon);
    rep.row("transfer", "k", "values");
    for (std::size_t i = 0; i < t.ks.size(); ++i) {
      std::string vals;
      for (auto v : t.values[i]) vals += (vals.empty() ? "" : ",") + std::to_string(v);
      rep.row("transfer", t.ks[i], vals);
    }
    for (const auto& f : t.fullness_failures) rep.comment("fullness: " + f);
    problems += t.fullness_failures.size() + t.convergence.failures();
    summary += ", transfer " + std::string(t.passed() ? "passed" : "failed");
  }
  Outcome out;
  out.status = problems ? kVerificationFailed : kOk;
  out.report = rep.str();
  out.summary = summary + "\n";
  return out;
}

// ---- eval-code ----

struct EvalOptions {
  std::vector<std::string> codes;  // inline codes
  std::string codes_file;
  PointSource points;
  std::size_t budget = kDefaultEvalBudget;
};

inline Outcome eval_code(const EvalOptions& o) {
  std::vector<BorelCode> codes;
  for (const auto& c : o.codes) codes.push_back(parse_code(c));
  if (!o.codes_file.empty()) {
    auto more = parse_codes(read_file(o.codes_file));
    codes.insert(codes.end(), more.begin(), more.end());
  }
  if (codes.empty()) throw std::invalid_argument("no codes given");
  auto pts = collect_points(o.points);
  Report rep("eval-code");
  rep.row("code", "point", "verdict");
  std::size_t counts[3] = {0, 0, 0};
  for (std::size_t c = 0; c < codes.size(); ++c)
    for (const auto& x : pts) {
      auto v = eval_membership(codes[c], x, o.budget);
      ++counts[static_cast<int>(v)];
      rep.row(c, x, to_string(v));
    }
  return {kOk, rep.str(),
          "eval-code: " + std::to_string(counts[0]) + " in, " + std::to_string(counts[1]) + " out, " +
              std::to_string(counts[2]) + " unknown\n"};
}

// Runs a subcommand, turning input errors into status 1.
template <typename F>
Outcome guarded(F&& f) {
  try {
    return f();
  } catch (const ParseError& e) {
    return {kInputError, "", std::string("parse error: ") + e.what() + "\n"};
  } catch (const std::exception& e) {
    return {kInputError, "", std::string("error: ") + e.what() + "\n"};
  }
}

}  // namespace baire::cli
