#include "ecr_cli/run.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "ecr/classic_cr.hpp"
#include "ecr/verify.hpp"
#include "ecr/zero_table_io.hpp"

namespace ecr::cli {
namespace {

using nlohmann::json;

json num_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

json base_report(const RunConfig& c) {
  json r;
  r["config"] = {
      {"command", c.command},
      {"matrix", c.matrix},
      {"b_matrix", c.b_matrix},
      {"k", c.k},
      {"m", c.m},
      {"kappa", c.kappa},
      {"certify", c.certify},
      {"seed", c.seed},
      {"threads", c.threads},
      {"samples", c.samples},
      {"paths",
       {{"matrix_file", c.matrix_file},
        {"zeros_in", c.zeros_in},
        {"zeros_out", c.zeros_out},
        {"solution_out", c.solution_out}}},
  };
  r["timings_ms"] = {{"build_zeros", nullptr},
                     {"reduce", nullptr},
                     {"back_substitute", nullptr},
                     {"total", nullptr}};
  r["residual_rel"] = nullptr;
  r["bounds"] = {{"C1", nullptr},
                 {"C2", nullptr},
                 {"C3", nullptr},
                 {"Q_max", nullptr},
                 {"xi", nullptr}};
  r["checks"] = {{"main_identity", nullptr},
                 {"det_lemma", nullptr},
                 {"appendix", nullptr},
                 {"conditions", nullptr},
                 {"zero_structure", nullptr}};
  r["certified"] = nullptr;
  r["solution_hash"] = nullptr;
  r["mob"] = {{"pivot_ops", nullptr},
              {"sturm_evaluations", nullptr},
              {"bisection_steps", nullptr}};
  r["bench"] = nullptr;
  r["error"] = nullptr;
  return r;
}

std::string hash_string(std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct Inputs {
  TridiagonalMatrix<double> Rn;
  TridiagonalMatrix<double> B;
  int k = 0;
  Index m = 0;
};

Inputs make_inputs(const RunConfig& c) {
  Inputs in;
  if (c.matrix == "file") {
    auto sysm = load_system_file(c.matrix_file);
    in.Rn = sysm.Rn;
    in.B = sysm.B;
    in.m = in.B.order();
    const auto np1 = static_cast<std::uint64_t>(in.Rn.order()) + 1;
    if (!std::has_single_bit(np1))
      throw std::invalid_argument("matrix file: Rn order must be 2^k - 1");
    in.k = std::countr_zero(np1);
  } else {
    const Index n = (Index(1) << c.k) - 1;
    in.Rn = build_named(c.matrix, n);
    in.B = build_named(c.b_matrix == "same" ? c.matrix : c.b_matrix, c.m);
    in.k = c.k;
    in.m = c.m;
  }
  return in;
}

void write_solution(const std::string& path, const DenseMatrix<double>& x) {
  json j;
  j["m"] = x.rows();
  j["n"] = x.cols();
  json cols = json::array();
  for (Index i = 0; i < x.cols(); ++i)
    cols.push_back(std::vector<double>(x.col(i).begin(), x.col(i).end()));
  j["columns"] = std::move(cols);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write solution file '" + path + "'");
  out << j.dump(2) << "\n";
}

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

int cmd_solve_poisson(const RunConfig& c, json& report) {
  PoissonBlockSystem<double> sys;
  sys.m = c.m;
  sys.k = c.k;
  sys.g = random_rhs(c.m, sys.rows(), c.seed);
  const double t0 = now_ms();
  const DenseMatrix<double> u = cr_solve(sys);
  const double t1 = now_ms();
  report["residual_rel"] = num_or_null(poisson_residual(sys, u));
  report["timings_ms"]["total"] = t1 - t0;
  report["solution_hash"] = hash_string(solution_hash(u));
  if (!c.solution_out.empty()) write_solution(c.solution_out, u);
  return 0;
}

int cmd_solve(const RunConfig& c, json& report) {
  if (c.matrix == "poisson") return cmd_solve_poisson(c, report);
  const Inputs in = make_inputs(c);
  SeparableSystem<double> sys{in.B, in.Rn, random_rhs(in.m, in.Rn.order(), c.seed)};

  SolveOptions<double> opts;
  opts.kappa = c.kappa;
  opts.certify = c.certify;
  opts.threads = resolve_threads(c.threads);
  MobStats mob;
  SolveTimings timings;
  opts.mob_stats = &mob;
  opts.timings = &timings;

  ZeroTable<double> cached;
  if (!c.zeros_in.empty()) {
    std::ifstream zin(c.zeros_in);
    if (!zin) throw std::runtime_error("cannot open zeros file '" + c.zeros_in + "'");
    json zj;
    try {
      zj = json::parse(zin);
    } catch (const json::parse_error& e) {
      throw std::runtime_error("parse error in '" + c.zeros_in + "': " + e.what());
    }
    cached = zero_table_from_json<double>(zj);
    if (cached.levels() != in.k)
      throw std::invalid_argument("zeros file level count does not match k");
    opts.zeros = &cached;
  }

  const double t0 = now_ms();
  try {
    auto [sol, err] = solve(sys, opts);
    const double t1 = now_ms();
    report["residual_rel"] = num_or_null(err.residual_rel);
    report["timings_ms"]["build_zeros"] = timings.build_zeros_ms;
    report["timings_ms"]["reduce"] = timings.reduce_ms;
    report["timings_ms"]["back_substitute"] = timings.back_substitute_ms;
    report["timings_ms"]["total"] = t1 - t0;
    report["mob"]["pivot_ops"] = mob.pivot_ops;
    report["mob"]["sturm_evaluations"] = mob.sturm_evaluations;
    report["mob"]["bisection_steps"] = mob.bisection_steps;
    report["solution_hash"] = hash_string(solution_hash(sol.x));
    if (c.certify) {
      report["bounds"]["C1"] = num_or_null(err.bound_C1);
      report["bounds"]["C2"] = num_or_null(err.bound_C2);
      report["bounds"]["C3"] = num_or_null(err.bound_C3);
      report["bounds"]["Q_max"] = num_or_null(err.bound_Q_max);
      report["bounds"]["xi"] = num_or_null(err.bound_xi);
      report["checks"]["conditions"] = err.conditions_ok;
      report["certified"] = err.certified;
    }
    if (!c.solution_out.empty()) write_solution(c.solution_out, sol.x);
    if (!c.zeros_out.empty()) {
      const auto table =
          opts.zeros ? cached : build_zero_table(in.Rn, in.k, c.kappa);
      std::ofstream zout(c.zeros_out);
      if (!zout)
        throw std::runtime_error("cannot write zeros file '" + c.zeros_out + "'");
      zout << zero_table_to_json(table).dump(2) << "\n";
    }
    return 0;
  } catch (const ConditionViolationError& e) {
    report["checks"]["conditions"] = false;
    report["certified"] = false;
    report["error"] = e.what();
    return 2;
  }
}

int cmd_build_zeros(const RunConfig& c, json& report) {
  const Inputs in = make_inputs(c);
  MobStats mob;
  const double t0 = now_ms();
  const auto table = build_zero_table(in.Rn, in.k, c.kappa, &mob,
                                      resolve_threads(c.threads));
  const double t1 = now_ms();
  report["timings_ms"]["build_zeros"] = t1 - t0;
  report["timings_ms"]["total"] = t1 - t0;
  report["mob"]["pivot_ops"] = mob.pivot_ops;
  report["mob"]["sturm_evaluations"] = mob.sturm_evaluations;
  report["mob"]["bisection_steps"] = mob.bisection_steps;
  const std::string out = c.zeros_out.empty() ? "zeros.json" : c.zeros_out;
  std::ofstream zout(out);
  if (!zout) throw std::runtime_error("cannot write zeros file '" + out + "'");
  zout << zero_table_to_json(table).dump(2) << "\n";
  return 0;
}

int cmd_verify(const RunConfig& c, json& report) {
  if (c.matrix == "poisson")
    throw std::invalid_argument("verify: use matrix kinds m1, m2 or file");
  const Inputs in = make_inputs(c);
  const double t0 = now_ms();

  const auto table = build_zero_table(in.Rn, in.k, c.kappa, nullptr,
                                      resolve_threads(c.threads));
  const auto structure = verify::check_zero_structure(table);

  const auto xs_main = verify::samples_away_from(
      verify::main_identity_avoid(in.Rn, in.k), -3.0, -0.01, c.samples);
  const double main_disc = verify::check_main_identity(in.Rn, in.k, xs_main);
  const double det_disc = verify::check_det_lemma(in.Rn);
  const auto xs_app = verify::samples_away_from(verify::appendix_avoid(in.Rn),
                                                -3.0, -0.01, c.samples);
  const double app_disc = verify::check_appendix_identities(in.Rn, xs_app);
  const auto cond = check_conditions(in.B, in.Rn);

  report["checks"]["main_identity"] = num_or_null(main_disc);
  report["checks"]["det_lemma"] = num_or_null(det_disc);
  report["checks"]["appendix"] = num_or_null(app_disc);
  report["checks"]["conditions"] = cond.ok();
  report["checks"]["zero_structure"] = structure.ok();
  report["timings_ms"]["total"] = now_ms() - t0;

  const bool pass = main_disc <= 1e-9 && det_disc <= 1e-9 && app_disc <= 1e-9 &&
                    structure.ok() && cond.ok();
  return pass ? 0 : 1;
}

int cmd_bench(const RunConfig& c, json& report) {
  if (c.matrix == "poisson" || c.matrix == "file")
    throw std::invalid_argument("bench: use matrix kinds m1 or m2");
  json runs = json::array();
  std::vector<double> log_n, log_ops;
  const double t0 = now_ms();
  for (const Index n : c.bench_sizes) {
    const auto np1 = static_cast<std::uint64_t>(n) + 1;
    if (!std::has_single_bit(np1))
      throw std::invalid_argument("bench: sizes must be of the form 2^k - 1");
    const int k = std::countr_zero(np1);
    const auto Rn = build_named(c.matrix, n);
    MobStats mob;
    const double s0 = now_ms();
    (void)build_zero_table(Rn, k, c.kappa, &mob, resolve_threads(c.threads));
    const double s1 = now_ms();
    runs.push_back({{"n", n},
                    {"pivot_ops", mob.pivot_ops},
                    {"wall_ms", s1 - s0}});
    log_n.push_back(std::log(static_cast<double>(n)));
    log_ops.push_back(std::log(static_cast<double>(mob.pivot_ops)));
  }
  // least-squares slope of log(ops) against log(n)
  const auto sz = static_cast<double>(log_n.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < log_n.size(); ++i) {
    sx += log_n[i];
    sy += log_ops[i];
    sxx += log_n[i] * log_n[i];
    sxy += log_n[i] * log_ops[i];
  }
  const double slope = (sz * sxy - sx * sy) / (sz * sxx - sx * sx);
  report["bench"] = {{"runs", runs}, {"fit_exponent", slope}};
  report["timings_ms"]["total"] = now_ms() - t0;
  return 0;
}

}  // namespace

int run_command(const RunConfig& c, json& report) {
  report = base_report(c);
  try {
    if (c.k < 1 || c.m < 1 || c.kappa < 0)
      throw std::invalid_argument("require k >= 1, m >= 1, kappa >= 0");
    if (c.command == "solve") return cmd_solve(c, report);
    if (c.command == "build-zeros") return cmd_build_zeros(c, report);
    if (c.command == "verify") return cmd_verify(c, report);
    if (c.command == "bench") return cmd_bench(c, report);
    throw std::invalid_argument("unknown command '" + c.command + "'");
  } catch (const ConditionViolationError&) {
    throw;  // handled in cmd_solve
  } catch (const std::exception& e) {
    report["error"] = e.what();
    return 1;
  }
}

int run(const RunConfig& config) {
  json report;
  const int code = run_command(config, report);
  if (config.report_out.empty()) {
    std::cout << report.dump(2) << std::endl;
  } else {
    std::ofstream out(config.report_out);
    if (!out) {
      std::cerr << "cannot write report file '" << config.report_out << "'\n";
      return 1;
    }
    out << report.dump(2) << "\n";
  }
  return code;
}

}  // namespace ecr::cli
