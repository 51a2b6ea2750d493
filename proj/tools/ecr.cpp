// Command-line front end: build systems (m1 / m2 / poisson / custom file),
// run the solvers, verify the numeric identities, benchmark preprocessing.

#include <CLI11.hpp>

#include "ecr_cli/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Direct solver for separable block-tridiagonal systems"};
  app.require_subcommand(1);

  ecr::cli::RunConfig config;

  auto add_common = [&](CLI::App* cmd, bool with_system) {
    cmd->add_option("--matrix", config.matrix, "matrix kind: m1, m2, poisson, file")
        ->check(CLI::IsMember({"m1", "m2", "poisson", "file"}));
    cmd->add_option("--matrix-file", config.matrix_file,
                    "JSON system file for --matrix file");
    cmd->add_option("--k", config.k, "level count (n = 2^k - 1 blocks)");
    cmd->add_option("--kappa", config.kappa, "bisection stopping width");
    cmd->add_option("--threads", config.threads,
                    "worker threads (0: ECR_THREADS env, default 1)");
    cmd->add_option("--out", config.report_out, "report JSON path (default stdout)");
    if (with_system) cmd->add_option("--m", config.m, "block order");
  };

  auto* solve = app.add_subcommand("solve", "solve a system and report residuals");
  add_common(solve, true);
  solve->add_option("--b-matrix", config.b_matrix,
                    "B block matrix kind (same, m1, m2, laplace4)")
      ->check(CLI::IsMember({"same", "m1", "m2", "laplace4"}));
  solve->add_option("--seed", config.seed, "right-hand-side RNG seed");
  solve->add_flag("--certify", config.certify,
                  "enforce admissibility conditions and emit error bounds");
  solve->add_option("--zeros", config.zeros_in, "load cached zero table");
  solve->add_option("--zeros-out", config.zeros_out, "write the zero table used");
  solve->add_option("--solution-out", config.solution_out, "write the solution JSON");

  auto* zeros = app.add_subcommand("build-zeros", "precompute and cache zero tables");
  add_common(zeros, false);
  zeros->add_option("--zeros-out,--table-out", config.zeros_out,
                    "zero table path (default zeros.json)");

  auto* verify = app.add_subcommand("verify", "run the numeric identity checks");
  add_common(verify, true);
  verify->add_option("--b-matrix", config.b_matrix,
                     "B block matrix kind (same, m1, m2, laplace4)")
      ->check(CLI::IsMember({"same", "m1", "m2", "laplace4"}));
  verify->add_option("--samples", config.samples, "sample points per identity check");

  auto* bench = app.add_subcommand("bench", "time zero-table construction");
  add_common(bench, false);
  bench->add_option("--sizes", config.bench_sizes,
                    "block counts to benchmark (each 2^k - 1)")
      ->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  config.command = app.get_subcommands().front()->get_name();
  return ecr::cli::run(config);
}
