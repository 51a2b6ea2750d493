#pragma once

// Three-phase extended cyclic reduction for (B (x) I + I (x) Rn) X = Y with
// blocks A_i = a_i I, B_i = B + b_i I, C_i = c_i I. All matrix-polynomial
// applications are realized as chained shifted tridiagonal solves driven by
// the zero tables; no matrix-matrix product is ever formed.

#include <bit>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <type_traits>

#include "ecr/error_bounds.hpp"
#include "ecr/parallel.hpp"
#include "ecr/zero_table.hpp"

namespace ecr {

/// Per-thread scratch for chain applications: pivot array plus one delta
/// vector, sized to the block order once and reused across blocks in a level.
template <typename Scalar>
struct ChainWorkspace {
  Vector<Scalar> pivots;
  Vector<Scalar> delta;

  void ensure(Index m) {
    if (pivots.size() != m) {
      pivots.resize(m);
      delta.resize(m);
    }
  }
};

/// The paired part of a rational chain: z_1 = b, then for each pair
/// (theta_j, phi_j) solve (B - theta_j I) delta = (theta_j - phi_j) z_j and
/// set z_{j+1} = z_j + delta. A pair with theta_j = phi_j is skipped outright,
/// leaving z bitwise unchanged.
template <typename Scalar>
void apply_paired_part_inplace(const TridiagonalMatrix<Scalar>& B,
                               const PairedChain<Scalar>& chain,
                               Eigen::Ref<Vector<Scalar>> z,
                               ChainWorkspace<Scalar>& ws) {
  ws.ensure(B.order());
  for (const auto& [theta, phi] : chain.pairs) {
    if (theta == phi) continue;
    ws.delta = (theta - phi) * z;
    solve_shifted_inplace<Scalar>(B, theta, ws.delta, ws.pivots);
    z += ws.delta;
  }
}

/// Applies (B_i^(r))^{-1} D b for the chain built at (r, i): the paired part,
/// one final solve with the unpaired largest zero, and the leading-coefficient
/// sign.
template <typename Scalar>
void apply_rational_chain_inplace(const TridiagonalMatrix<Scalar>& B,
                                  const PairedChain<Scalar>& chain,
                                  Eigen::Ref<Vector<Scalar>> z,
                                  ChainWorkspace<Scalar>& ws) {
  apply_paired_part_inplace(B, chain, z, ws);
  solve_shifted_inplace<Scalar>(B, chain.final_shift, z, ws.pivots);
  if (chain.negate) z = -z;
}

template <typename Scalar>
Vector<Scalar> apply_rational_chain(const TridiagonalMatrix<Scalar>& B,
                                    const PairedChain<Scalar>& chain,
                                    const Vector<Scalar>& b) {
  ChainWorkspace<Scalar> ws;
  Vector<Scalar> z = b;
  apply_rational_chain_inplace<Scalar>(B, chain, z, ws);
  return z;
}

/// Interleaved scaled inverse chain: x_0 = b, then for j = 1..L solve
/// (B - xi_{L-j+1} I) x_j = factors_j x_{j-1}, consuming the most negative
/// zero first. Scalar products are woven between the solves so neither the
/// coupling product nor the inverse factors accumulate alone.
template <typename Scalar>
void apply_scaled_inverse_chain_inplace(const TridiagonalMatrix<Scalar>& B,
                                        const Vector<Scalar>& xi,
                                        const Vector<Scalar>& factors,
                                        Eigen::Ref<Vector<Scalar>> z,
                                        ChainWorkspace<Scalar>& ws) {
  if (xi.size() != factors.size())
    throw LengthMismatchError("apply_scaled_inverse_chain: length mismatch");
  ws.ensure(B.order());
  const Index L = xi.size();
  for (Index j = 0; j < L; ++j) {
    z *= factors[j];
    solve_shifted_inplace<Scalar>(B, xi[L - 1 - j], z, ws.pivots);
  }
}

template <typename Scalar>
Vector<Scalar> apply_scaled_inverse_chain(const TridiagonalMatrix<Scalar>& B,
                                          const Vector<Scalar>& xi,
                                          const Vector<Scalar>& factors,
                                          const Vector<Scalar>& b) {
  ChainWorkspace<Scalar> ws;
  Vector<Scalar> z = b;
  apply_scaled_inverse_chain_inplace<Scalar>(B, xi, factors, z, ws);
  return z;
}

/// Separable block-tridiagonal system: symmetric B of order m, coupling
/// matrix Rn of order n = 2^k - 1, right-hand side blocks as columns of an
/// m x n matrix.
template <typename Scalar = double>
struct SeparableSystem {
  TridiagonalMatrix<Scalar> B;
  TridiagonalMatrix<Scalar> Rn;
  DenseMatrix<Scalar> rhs;  // column i-1 holds y_i

  int levels() const {
    const Index n = Rn.order();
    const auto np1 = static_cast<std::uint64_t>(n) + 1;
    if (!std::has_single_bit(np1))
      throw std::invalid_argument("SeparableSystem: n is not 2^k - 1");
    return std::countr_zero(np1);
  }

  void validate() const {
    (void)levels();
    if (rhs.rows() != B.order() || rhs.cols() != Rn.order())
      throw std::invalid_argument("SeparableSystem: rhs shape mismatch");
  }
};

template <typename Scalar = double>
struct Solution {
  DenseMatrix<Scalar> x;  // column i-1 holds x_i
  Scalar residual_rel = std::numeric_limits<Scalar>::quiet_NaN();
};

/// Reduction working state: current level and the vectors p_i; at level r the
/// active entries are the multiples of 2^r, while odd multiples of lower
/// levels retain their last value for the back-substitution phase.
template <typename Scalar = double>
struct ReductionState {
  int level = 0;
  DenseMatrix<Scalar> p;
};

template <typename Scalar>
struct EcrTables {
  ZeroTable<Scalar> zeros;
  CouplingCoefficients<Scalar> coupling;
};

template <typename Scalar>
EcrTables<Scalar> build_tables(const TridiagonalMatrix<Scalar>& Rn, int k,
                               Scalar kappa = unit_roundoff<Scalar>(),
                               MobStats* stats = nullptr, int threads = 1) {
  return {build_zero_table(Rn, k, kappa, stats, threads), build_coupling(Rn, k)};
}

/// ||(B (x) I + I (x) Rn) X - Y||_2 / ||Y||_2 over the stacked block vectors.
template <typename Scalar>
Scalar relative_residual(const SeparableSystem<Scalar>& sys,
                         const DenseMatrix<Scalar>& X) {
  const Index n = sys.Rn.order();
  Scalar num2 = 0;
  for (Index i = 1; i <= n; ++i) {
    Vector<Scalar> r = apply(sys.B, X.col(i - 1)) + sys.Rn.b(i) * X.col(i - 1) -
                       sys.rhs.col(i - 1);
    if (i > 1) r += sys.Rn.a(i) * X.col(i - 2);
    if (i < n) r += sys.Rn.c(i) * X.col(i);
    num2 += r.squaredNorm();
  }
  const Scalar den2 = sys.rhs.squaredNorm();
  if (den2 == Scalar(0)) return num2 == Scalar(0) ? Scalar(0) : std::numeric_limits<Scalar>::infinity();
  using std::sqrt;
  return sqrt(num2 / den2);
}

namespace detail {

// Higher-precision counterpart of Scalar for chain-error measurement.
template <typename Scalar>
using Wide = std::conditional_t<(sizeof(Scalar) < sizeof(long double)), long double, Scalar>;

/// Measures, during a certified solve, the forward error of every chain
/// application against the same chain evaluated in extended precision, and
/// compares it with the composed bound (delta = 0).
template <typename Scalar>
struct ChainCertifier {
  using W = Wide<Scalar>;

  TridiagonalMatrix<W> B_wide;
  ErrorModel<Scalar> em;
  std::mutex mu;
  Scalar max_rational_ratio = 0;
  Scalar max_scaled_ratio = 0;
  bool all_within = true;

  explicit ChainCertifier(const TridiagonalMatrix<Scalar>& B, ErrorModel<Scalar> model)
      : B_wide(B.template cast<W>()), em(model) {}

  void rational(const PairedChain<Scalar>& chain, const Vector<Scalar>& b,
                const Vector<Scalar>& z_pairs) {
    if (chain.pairs.empty()) return;
    std::lock_guard<std::mutex> lock(mu);
    Vector<W> z = b.template cast<W>();
    ChainWorkspace<W> ws;
    apply_paired_part_inplace<W>(B_wide, chain.template cast<W>(), z, ws);
    const Scalar measured =
        static_cast<Scalar>((z - z_pairs.template cast<W>()).norm());
    const Scalar bound = rational_chain_bound(chain.zeros(), b.norm(), em);
    note(measured, bound, max_rational_ratio);
  }

  void scaled(const Vector<Scalar>& xi, const Vector<Scalar>& factors,
              const Vector<Scalar>& b, const Vector<Scalar>& w_out) {
    if (xi.size() == 0) return;
    std::lock_guard<std::mutex> lock(mu);
    Vector<W> z = b.template cast<W>();
    ChainWorkspace<W> ws;
    apply_scaled_inverse_chain_inplace<W>(B_wide, xi.template cast<W>().eval(),
                                          factors.template cast<W>().eval(), z, ws);
    const Scalar measured = static_cast<Scalar>((z - w_out.template cast<W>()).norm());
    const Scalar bound = scaled_chain_bound(xi, factors, b.norm(), em);
    note(measured, bound, max_scaled_ratio);
  }

 private:
  void note(Scalar measured, Scalar bound, Scalar& slot) {
    if (bound > Scalar(0)) {
      slot = std::max(slot, measured / bound);
      if (measured > bound) all_within = false;
    } else if (measured > Scalar(0)) {
      all_within = false;
    }
  }
};

/// One neighbor term alpha_i^(r) (B_{i-2^{r-1}}^{(r-1)})^{-1} v (side = -1) or
/// gamma_i^(r) (B_{i+2^{r-1}}^{(r-1)})^{-1} v (side = +1). The 2^r - 1
/// interleaved couplings run through the chain; the remaining nearest coupling
/// (a_i resp. c_i) and the level-(r-1) leading sign are applied afterward.
template <typename Scalar>
Vector<Scalar> neighbor_term(const SeparableSystem<Scalar>& sys,
                             const EcrTables<Scalar>& tables, int r, Index i,
                             int side, const Vector<Scalar>& v,
                             ChainWorkspace<Scalar>& ws,
                             ChainCertifier<Scalar>* cert) {
  const auto& Rn = sys.Rn;
  if (r == 0) return (side < 0 ? Rn.a(i) : Rn.c(i)) * v;

  const Index half = Index(1) << (r - 1);
  const Index span = (Index(1) << r) - 1;
  const Vector<Scalar>& xi = tables.zeros.at(r - 1, i + side * half);
  Vector<Scalar> factors(span);
  if (side < 0)
    for (Index j = 0; j < span; ++j) factors[j] = Rn.a(i - span + j);
  else
    for (Index j = 0; j < span; ++j) factors[j] = Rn.c(i + 1 + j);

  Vector<Scalar> w = v;
  apply_scaled_inverse_chain_inplace<Scalar>(sys.B, xi, factors, w, ws);
  if (cert) cert->scaled(xi, factors, v, w);
  w *= (side < 0 ? Rn.a(i) : Rn.c(i));
  if ((r - 1) % 2 == 1) w = -w;
  return w;
}

template <typename Scalar>
void rational_apply(const SeparableSystem<Scalar>& sys, const EcrTables<Scalar>& tables,
                    int r, Index i, Eigen::Ref<Vector<Scalar>> z,
                    ChainWorkspace<Scalar>& ws, ChainCertifier<Scalar>* cert) {
  const PairedChain<Scalar> chain = rational_chain_for(tables.zeros, r, i);
  if (cert) {
    const Vector<Scalar> b = z;
    apply_paired_part_inplace<Scalar>(sys.B, chain, z, ws);
    cert->rational(chain, b, z);
    solve_shifted_inplace<Scalar>(sys.B, chain.final_shift, z, ws.pivots);
    if (chain.negate) z = -z;
  } else {
    apply_rational_chain_inplace<Scalar>(sys.B, chain, z, ws);
  }
}

}  // namespace detail

/// Reduction phase: starting from p_i^(0) = y_i, for r = 0..k-2 forms
/// q_j^(r) = (B_j^(r))^{-1} D_j p_j^(r) at the odd multiples j of 2^r, then
/// p_i^(r+1) = [alpha-term + gamma-term] - p_i^(r) at the multiples i of
/// 2^{r+1}. Distinct blocks within a level are independent.
template <typename Scalar>
void reduce(const SeparableSystem<Scalar>& sys, const EcrTables<Scalar>& tables,
            ReductionState<Scalar>& state, int threads = 1,
            detail::ChainCertifier<Scalar>* cert = nullptr) {
  const int k = sys.levels();
  const Index n = sys.Rn.order();
  const Index m = sys.B.order();
  threads = resolve_threads(threads);
  DenseMatrix<Scalar>& P = state.p;

  for (int r = 0; r + 2 <= k; ++r) {
    const Index step = Index(1) << r;
    const Index odd_count = (n + 1) / (2 * step);

    DenseMatrix<Scalar> Q(m, odd_count);
    parallel_for(0, odd_count, threads, [&](long t) {
      thread_local ChainWorkspace<Scalar> ws;
      const Index i = (2 * t + 1) * step;
      Q.col(t) = P.col(i - 1);
      detail::rational_apply<Scalar>(sys, tables, r, i, Q.col(t), ws, cert);
    });

    const Index even_count = odd_count - 1;
    parallel_for(1, even_count + 1, threads, [&](long s) {
      thread_local ChainWorkspace<Scalar> ws;
      const Index i = 2 * s * step;
      const Vector<Scalar> left = detail::neighbor_term<Scalar>(
          sys, tables, r, i, -1, Q.col(s - 1), ws, cert);
      const Vector<Scalar> right = detail::neighbor_term<Scalar>(
          sys, tables, r, i, +1, Q.col(s), ws, cert);
      P.col(i - 1) = (left + right) - P.col(i - 1);
    });
    state.level = r + 1;
  }
}

/// Back-substitution phase: for r = k-1..0 and every odd multiple i of 2^r,
/// x_i = (B_i^(r))^{-1} D_i [p_i^(r) - alpha-term x_{i-2^r} - gamma-term
/// x_{i+2^r}], with x_0 = x_{n+1} = 0 and boundary neighbor terms dropped
/// (their coupling products vanish through a_1 = c_n = 0).
template <typename Scalar>
Solution<Scalar> back_substitute(const SeparableSystem<Scalar>& sys,
                                 const EcrTables<Scalar>& tables,
                                 const ReductionState<Scalar>& state, int threads = 1,
                                 detail::ChainCertifier<Scalar>* cert = nullptr) {
  const int k = sys.levels();
  const Index n = sys.Rn.order();
  const Index m = sys.B.order();
  threads = resolve_threads(threads);
  const DenseMatrix<Scalar>& P = state.p;

  Solution<Scalar> sol;
  sol.x = DenseMatrix<Scalar>::Zero(m, n);
  DenseMatrix<Scalar>& X = sol.x;

  for (int r = k - 1; r >= 0; --r) {
    const Index step = Index(1) << r;
    const Index odd_count = (n + 1) / (2 * step);
    parallel_for(0, odd_count, threads, [&](long t) {
      thread_local ChainWorkspace<Scalar> ws;
      const Index i = (2 * t + 1) * step;
      Vector<Scalar> rhs = P.col(i - 1);
      if (i - step >= 1)
        rhs -= detail::neighbor_term<Scalar>(sys, tables, r, i, -1,
                                             X.col(i - step - 1), ws, cert);
      if (i + step <= n)
        rhs -= detail::neighbor_term<Scalar>(sys, tables, r, i, +1,
                                             X.col(i + step - 1), ws, cert);
      detail::rational_apply<Scalar>(sys, tables, r, i, rhs, ws, cert);
      X.col(i - 1) = rhs;
    });
  }
  sol.residual_rel = relative_residual(sys, X);
  return sol;
}

struct SolveTimings {
  double build_zeros_ms = 0;
  double reduce_ms = 0;
  double back_substitute_ms = 0;
};

template <typename Scalar = double>
struct SolveOptions {
  Scalar kappa = unit_roundoff<Scalar>();
  bool certify = false;
  int threads = 1;
  const ZeroTable<Scalar>* zeros = nullptr;  ///< reuse cached preprocessing
  MobStats* mob_stats = nullptr;
  SolveTimings* timings = nullptr;
};

template <typename Scalar>
ConditionDiagnostics<Scalar> check_conditions(const SeparableSystem<Scalar>& sys,
                                              const ErrorModel<Scalar>& em = {}) {
  return check_conditions(sys.B, sys.Rn, em);
}

namespace detail {

/// Aggregate bound constants over every chain the solve consumes.
template <typename Scalar>
void fill_bound_constants(const SeparableSystem<Scalar>& sys,
                          const EcrTables<Scalar>& tables,
                          const ConditionDiagnostics<Scalar>& cond,
                          const ErrorModel<Scalar>& em, ErrorReport<Scalar>& report) {
  const int k = sys.levels();
  Scalar c1 = 0, c2 = 0, c3 = 0, qmax = 0;
  bool any_scaled = false, any_q = false;

  for_each_table_entry(k, [&](int r, Index i) {
    const Vector<Scalar>& mu = tables.zeros.at(r, i);
    if (r > 0) c1 = std::max(c1, chain_C1(mu));
    if (cond.b_symmetric)
      for (Index j = 0; j < mu.size(); ++j) {
        qmax = std::max(qmax, bound_Q(cond.b_lambda_max, cond.b_lambda_min, mu[j], em));
        any_q = true;
      }
  });

  // scaled chains appear at levels r >= 1 around every even multiple of 2^r
  // (reduction) and every interior odd multiple (back-substitution)
  const Index n = sys.Rn.order();
  for (int r = 1; r < k; ++r) {
    const Index step = Index(1) << r;
    const Index half = step / 2;
    const Index span = step - 1;
    for (Index i = step; i <= n; i += step) {
      for (int side : {-1, +1}) {
        if (side < 0 && i - step < 1) continue;
        if (side > 0 && i + step > n) continue;
        const Vector<Scalar>& xi = tables.zeros.at(r - 1, i + side * half);
        Vector<Scalar> factors(span);
        if (side < 0)
          for (Index j = 0; j < span; ++j) factors[j] = sys.Rn.a(i - span + j);
        else
          for (Index j = 0; j < span; ++j) factors[j] = sys.Rn.c(i + 1 + j);
        c2 = std::max(c2, chain_C2(xi, factors));
        c3 = std::max(c3, chain_C3(xi));
        any_scaled = true;
      }
    }
  }

  report.bound_C1 = c1;
  if (any_scaled) {
    report.bound_C2 = c2;
    report.bound_C3 = c3;
  }
  if (any_q) report.bound_Q_max = qmax;
  if (cond.b_symmetric && cond.b_lambda_min > Scalar(0)) {
    const Scalar kappa2 = cond.b_lambda_max / cond.b_lambda_min;
    if (g_of_u(em.u) * kappa2 < Scalar(1)) report.bound_xi = bound_xi(kappa2, em);
  }
}

}  // namespace detail

/// Full pipeline: preprocessing (zero tables by bisection), reduction,
/// back-substitution. The report always carries the measured relative
/// residual; in certification mode the system must satisfy the admissibility
/// conditions (ConditionViolationError otherwise), every chain application is
/// measured against its forward-error bound, and `certified` records the
/// verdict.
template <typename Scalar>
std::pair<Solution<Scalar>, ErrorReport<Scalar>> solve(
    const SeparableSystem<Scalar>& sys, const SolveOptions<Scalar>& opts = {}) {
  sys.validate();
  const int k = sys.levels();
  ErrorReport<Scalar> report;
  ErrorModel<Scalar> em;

  std::unique_ptr<detail::ChainCertifier<Scalar>> cert;
  if (opts.certify) {
    report.diagnostics = check_conditions(sys, em);
    report.conditions_ok = report.diagnostics.ok();
    if (!report.conditions_ok)
      throw ConditionViolationError("solve: certification conditions violated");
    cert = std::make_unique<detail::ChainCertifier<Scalar>>(sys.B, em);
  }

  const auto tick = [] { return std::chrono::steady_clock::now(); };
  const auto ms = [](auto t0, auto t1) {
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
  };

  auto t0 = tick();
  EcrTables<Scalar> tables;
  if (opts.zeros) {
    tables.zeros = *opts.zeros;
    tables.coupling = build_coupling(sys.Rn, k);
  } else {
    tables = build_tables(sys.Rn, k, opts.kappa, opts.mob_stats, opts.threads);
  }
  auto t1 = tick();

  ReductionState<Scalar> state{0, sys.rhs};
  reduce(sys, tables, state, opts.threads, cert.get());
  auto t2 = tick();
  Solution<Scalar> sol = back_substitute(sys, tables, state, opts.threads, cert.get());
  auto t3 = tick();
  if (opts.timings) {
    opts.timings->build_zeros_ms = ms(t0, t1);
    opts.timings->reduce_ms = ms(t1, t2);
    opts.timings->back_substitute_ms = ms(t2, t3);
  }
  report.residual_rel = sol.residual_rel;

  if (opts.certify) {
    detail::fill_bound_constants(sys, tables, report.diagnostics, em, report);
    report.max_rational_error_ratio = cert->max_rational_ratio;
    report.max_scaled_error_ratio = cert->max_scaled_ratio;
    report.certified = report.conditions_ok && cert->all_within &&
                       std::isfinite(report.residual_rel);
  }
  return {std::move(sol), report};
}

}  // namespace ecr
