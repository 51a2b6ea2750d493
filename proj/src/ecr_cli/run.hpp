#pragma once

// Command pipeline behind the `ecr` tool: builds the requested system, runs
// the selected solver or verification sweep, and emits a machine-readable
// JSON report with a stable field set (absent measurements are explicit
// nulls).

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "ecr_cli/builders.hpp"

namespace ecr::cli {

struct RunConfig {
  std::string command;            // build-zeros | solve | verify | bench
  std::string matrix = "m1";      // m1 | m2 | poisson | file
  std::string b_matrix = "same";  // same | m1 | m2 | laplace4
  int k = 3;
  Index m = 8;
  double kappa = unit_roundoff<double>();
  bool certify = false;
  std::uint64_t seed = 0;
  int threads = 0;  // 0: ECR_THREADS env, else 1
  int samples = 10;
  std::string matrix_file;
  std::string zeros_in;
  std::string zeros_out;
  std::string report_out;
  std::string solution_out;
  std::vector<Index> bench_sizes = {7, 15, 31, 63};
};

/// Executes the configured command, filling the report. Returns the process
/// exit code: 0 success, 2 certification-condition violation, 1 solver or
/// input error.
int run_command(const RunConfig& config, nlohmann::json& report);

/// run_command plus report emission to config.report_out (stdout when empty).
int run(const RunConfig& config);

}  // namespace ecr::cli
