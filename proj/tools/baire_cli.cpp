#include <iostream>

#include <CLI11.hpp>

#include "baire/cli.hpp"

using namespace baire::cli;

namespace {

void add_points(CLI::App* app, PointSource& p) {
  app->add_option("--point", p.inline_points, "Sample point, e.g. [1]~const(1) or [0]~per(1,2)");
  app->add_option("--points", p.file, "File with one point per line")->check(CLI::ExistingFile);
  app->add_option("--samples", p.random, "Number of seeded random sample points");
  app->add_option("--seed", p.seed, "Seed for random samples");
  app->add_option("--alphabet", p.alphabet, "Entries of random samples lie below this")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Baire space toolkit: control functions, Baire-1 approximations, partitions, embeddings"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string out_path;
  app.add_option("-o,--out", out_path, "Write the report to this file instead of stdout");

  ControlTraceOptions ct;
  auto* c1 = app.add_subcommand("control-trace", "Run the control function of a family of reductions on points");
  c1->add_option("--family", ct.family, "Family directory (*.map plus optional schedule) or map files")->required();
  c1->add_option("--schedule", ct.schedule, "rr, stair, or 'custom [prefix] [cycle]'");
  c1->add_option("--horizon", ct.horizon, "Prefix length examined")->check(CLI::PositiveNumber);
  c1->add_flag("--trace", ct.trace, "Also list the state and output entry at every prefix length");
  add_points(c1, ct.points);

  ApproxRunOptions ar;
  auto* c2 = app.add_subcommand("approx-run", "Approximate a Baire-1 function by full functions and check convergence");
  c2->add_option("--spec", ar.spec, "Example name or spec file (step-* names run step approximations)")->required();
  c2->add_option("--k", ar.ks, "Approximation indices, e.g. 1..5 or 1,3,5");
  c2->add_option("--n", ar.n, "Convergence threshold 2^-(n+1)");
  c2->add_option("--horizon", ar.horizon, "Largest index checked for convergence")->check(CLI::PositiveNumber);
  c2->add_option("--scheme-depth", ar.scheme_depth, "Depth of the ball scheme on the target")->check(CLI::PositiveNumber);
  c2->add_option("--full-max", ar.full_max, "Tabulate and check approximants up to this k");
  c2->add_option("--full-k", ar.full_k, "Approximant written with --full-out");
  c2->add_option("--full-out", ar.full_out, "File receiving the tabulated approximant");
  add_points(c2, ar.points);

  PartitionOptions pr;
  auto* c3 = app.add_subcommand("partition-refine", "Refine a partition into 2-Pi pieces or pieces of lower Pi-level");
  c3->add_option("--codes", pr.codes, "File of codes")->required()->check(CLI::ExistingFile);
  c3->add_option("--mode", pr.mode, "two-pi or pi-below")->check(CLI::IsMember({"two-pi", "pi-below"}));
  c3->add_option("--xi", pr.xi, "Level")->check(CLI::PositiveNumber);
  c3->add_option("--grid-depth", pr.grid_depth, "Head length of the check grid");
  c3->add_option("--grid-branch", pr.grid_branch, "Largest head entry of the check grid");
  c3->add_option("--budget", pr.budget, "Evaluation budget per membership query")->check(CLI::PositiveNumber);
  c3->add_option("--pieces-out", pr.out, "File receiving the piece codes");

  PartitionOptions rf;
  rf.mode = "reduce";
  auto* c4 = app.add_subcommand("reduce-family", "Shrink a family to disjoint members with the same union");
  c4->add_option("--codes", rf.codes, "File of codes, each a union")->required()->check(CLI::ExistingFile);
  c4->add_option("--xi", rf.xi, "Pi-level bound of the union children")->check(CLI::PositiveNumber);
  c4->add_option("--grid-depth", rf.grid_depth, "Head length of the check grid");
  c4->add_option("--grid-branch", rf.grid_branch, "Largest head entry of the check grid");
  c4->add_option("--budget", rf.budget, "Evaluation budget per membership query")->check(CLI::PositiveNumber);
  c4->add_option("--pieces-out", rf.out, "File receiving the reduced codes");

  EmbedOptions em;
  auto* c5 = app.add_subcommand("embed", "Embed a finite ultrametric space into Baire space");
  c5->add_option("--space", em.space, "Ultrametric space file")->check(CLI::ExistingFile);
  c5->add_option("--random", em.random_seed, "Draw a random dendrogram space with this seed");
  c5->add_option("--max-leaves", em.max_leaves, "Leaf bound for --random")->check(CLI::PositiveNumber);
  c5->add_option("--depth", em.depth, "Scheme depth")->check(CLI::PositiveNumber);
  c5->add_flag("--verify", em.verify, "Check the scheme conditions and the Lipschitz bounds");
  c5->add_option("--transfer", em.transfer, "Carry the approximants of this Baire-1 example through the embedding");
  c5->add_option("--n", em.n, "Convergence threshold 2^-(n+1) for --transfer");
  c5->add_option("--horizon", em.horizon, "Convergence horizon for --transfer")->check(CLI::PositiveNumber);
  c5->add_option("--space-out", em.space_out, "File receiving the space");

  EvalOptions ev;
  auto* c6 = app.add_subcommand("eval-code", "Decide membership of points in coded sets");
  c6->add_option("--code", ev.codes, "Code, e.g. '(basic [0])'");
  c6->add_option("--codes", ev.codes_file, "File of codes")->check(CLI::ExistingFile);
  c6->add_option("--budget", ev.budget, "Evaluation budget per query")->check(CLI::PositiveNumber);
  add_points(c6, ev.points);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  Outcome r;
  if (*c1) r = guarded([&] { return control_trace(ct); });
  if (*c2) r = guarded([&] { return approx_run(ar); });
  if (*c3) r = guarded([&] { return partition_refine(pr); });
  if (*c4) r = guarded([&] { return partition_refine(rf); });
  if (*c5) r = guarded([&] { return embed(em); });
  if (*c6) r = guarded([&] { return eval_code(ev); });

  if (r.status == kInputError) {
    std::cerr << r.summary;
    return r.status;
  }
  if (out_path.empty()) {
    std::cout << r.report;
    std::cerr << r.summary;
  } else {
    auto w = guarded([&] {
      write_file(out_path, r.report);
      return Outcome{};
    });
    if (w.status) {
      std::cerr << w.summary;
      return w.status;
    }
    std::cout << r.summary;
  }
  return r.status;
}
