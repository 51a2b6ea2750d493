#pragma once

// Dense oracles and numeric identity checks: Kronecker assembly with dense LU,
// a cyclic-Jacobi eigensolver independent of the bisection code, the scalar
// level-polynomial recurrence cross-checked against window determinants, the
// determinant lemma and its two appendix variants, and the principal-submatrix
// determinant lower bound.

#include <Eigen/Dense>

#include <vector>

#include "ecr/ecr_solver.hpp"

namespace ecr::verify {

inline constexpr double kTinyScale = 1e-300;

/// Dense assembly of the separable operator: diagonal blocks B + b_i I,
/// off-diagonal blocks a_i I and c_i I.
template <typename Scalar>
DenseMatrix<Scalar> assemble_dense(const SeparableSystem<Scalar>& sys) {
  const Index m = sys.B.order();
  const Index n = sys.Rn.order();
  DenseMatrix<Scalar> M = DenseMatrix<Scalar>::Zero(m * n, m * n);
  const DenseMatrix<Scalar> Bd = sys.B.dense();
  const DenseMatrix<Scalar> Id = DenseMatrix<Scalar>::Identity(m, m);
  for (Index i = 1; i <= n; ++i) {
    M.block((i - 1) * m, (i - 1) * m, m, m) = Bd + sys.Rn.b(i) * Id;
    if (i > 1) M.block((i - 1) * m, (i - 2) * m, m, m) = sys.Rn.a(i) * Id;
    if (i < n) M.block((i - 1) * m, i * m, m, m) = sys.Rn.c(i) * Id;
  }
  return M;
}

/// Oracle solve of the full system by partially pivoted dense elimination.
template <typename Scalar>
Solution<Scalar> dense_kron_solve(const SeparableSystem<Scalar>& sys,
                                  Index size_cap = 4096) {
  sys.validate();
  const Index m = sys.B.order();
  const Index n = sys.Rn.order();
  if (m * n > size_cap)
    throw std::invalid_argument("dense_kron_solve: system exceeds size cap");
  const DenseMatrix<Scalar> M = assemble_dense(sys);
  Vector<Scalar> b(m * n);
  for (Index i = 0; i < n; ++i) b.segment(i * m, m) = sys.rhs.col(i);
  Eigen::PartialPivLU<DenseMatrix<Scalar>> lu(M);
  Vector<Scalar> x = lu.solve(b);
  const Scalar back = (M * x - b).norm();
  const Scalar scale = b.norm() + M.cwiseAbs().maxCoeff() * x.norm();
  if (!x.allFinite() || !(back <= Scalar(1e-4) * scale + Scalar(kTinyScale)))
    throw SingularMatrixError("dense_kron_solve: elimination broke down");
  Solution<Scalar> sol;
  sol.x.resize(m, n);
  for (Index i = 0; i < n; ++i) sol.x.col(i) = x.segment(i * m, m);
  sol.residual_rel = relative_residual(sys, sol.x);
  return sol;
}

/// Ascending eigenvalues of a symmetric tridiagonal matrix by cyclic Jacobi
/// rotations on the densified matrix, run until the off-diagonal Frobenius
/// norm drops below tol_factor * ||T||_F.
template <typename Scalar>
Vector<Scalar> dense_eigen(const TridiagonalMatrix<Scalar>& T,
                           Scalar tol_factor = Scalar(1e-15), int max_sweeps = 64) {
  using std::abs;
  using std::sqrt;
  if (!T.symmetric()) throw std::invalid_argument("dense_eigen: matrix not symmetric");
  if (T.order() > 256) throw std::invalid_argument("dense_eigen: order > 256");
  DenseMatrix<Scalar> A = T.dense();
  const Index q = A.rows();
  const Scalar target = tol_factor * A.norm() + Scalar(kTinyScale);

  auto off_norm = [&] {
    Scalar s = 0;
    for (Index i = 0; i < q; ++i)
      for (Index j = i + 1; j < q; ++j) s += A(i, j) * A(i, j);
    return sqrt(2 * s);
  };

  int sweep = 0;
  while (off_norm() > target) {
    if (++sweep > max_sweeps)
      throw NoConvergenceError("dense_eigen: Jacobi sweep cap exceeded");
    for (Index p = 0; p < q; ++p)
      for (Index r = p + 1; r < q; ++r) {
        if (A(p, r) == Scalar(0)) continue;
        const Scalar theta = (A(r, r) - A(p, p)) / (2 * A(p, r));
        const Scalar t = (theta >= Scalar(0) ? Scalar(1) : Scalar(-1)) /
                         (abs(theta) + sqrt(theta * theta + 1));
        const Scalar c = 1 / sqrt(t * t + 1);
        const Scalar s = t * c;
        for (Index j = 0; j < q; ++j) {
          const Scalar ajp = A(j, p), ajr = A(j, r);
          A(j, p) = c * ajp - s * ajr;
          A(j, r) = s * ajp + c * ajr;
        }
        for (Index j = 0; j < q; ++j) {
          const Scalar apj = A(p, j), arj = A(r, j);
          A(p, j) = c * apj - s * arj;
          A(r, j) = s * apj + c * arj;
        }
      }
  }
  Vector<Scalar> eigs = A.diagonal();
  std::sort(eigs.begin(), eigs.end());
  return eigs;
}

/// prod_j (B - zeros_j I) as a dense matrix, optionally negated.
template <typename Scalar>
DenseMatrix<Scalar> dense_shifted_product(const TridiagonalMatrix<Scalar>& B,
                                          const Vector<Scalar>& zeros,
                                          bool negate = false) {
  const Index m = B.order();
  DenseMatrix<Scalar> P = DenseMatrix<Scalar>::Identity(m, m);
  const DenseMatrix<Scalar> Bd = B.dense();
  const DenseMatrix<Scalar> Id = DenseMatrix<Scalar>::Identity(m, m);
  for (Index j = 0; j < zeros.size(); ++j) P = (Bd - zeros[j] * Id) * P;
  return negate ? DenseMatrix<Scalar>(-P) : P;
}

/// Dense-route evaluation of the chain operator (B_i^(r))^{-1} D b: form both
/// polynomial matrices explicitly and run one dense LU solve.
template <typename Scalar>
Vector<Scalar> dense_rational_apply(const TridiagonalMatrix<Scalar>& B,
                                    const PairedChain<Scalar>& chain,
                                    const Vector<Scalar>& b) {
  Vector<Scalar> lambda(static_cast<Index>(chain.pairs.size()));
  for (std::size_t j = 0; j < chain.pairs.size(); ++j)
    lambda[static_cast<Index>(j)] = chain.pairs[j].second;
  const DenseMatrix<Scalar> N = dense_shifted_product(B, chain.zeros(), chain.negate);
  const DenseMatrix<Scalar> P = dense_shifted_product(B, lambda);
  return Eigen::PartialPivLU<DenseMatrix<Scalar>>(N).solve((P * b).eval());
}

/// Dense-route evaluation of the paired part alone (no final solve, no sign).
template <typename Scalar>
Vector<Scalar> dense_paired_apply(const TridiagonalMatrix<Scalar>& B,
                                  const PairedChain<Scalar>& chain,
                                  const Vector<Scalar>& b) {
  Vector<Scalar> theta(static_cast<Index>(chain.pairs.size()));
  Vector<Scalar> phi(static_cast<Index>(chain.pairs.size()));
  for (std::size_t j = 0; j < chain.pairs.size(); ++j) {
    theta[static_cast<Index>(j)] = chain.pairs[j].first;
    phi[static_cast<Index>(j)] = chain.pairs[j].second;
  }
  const DenseMatrix<Scalar> N = dense_shifted_product(B, theta);
  const DenseMatrix<Scalar> P = dense_shifted_product(B, phi);
  return Eigen::PartialPivLU<DenseMatrix<Scalar>>(N).solve((P * b).eval());
}

namespace detail {

template <typename Scalar>
Scalar identity_discrepancy(Scalar lhs1, Scalar lhs2, Scalar rhs) {
  using std::abs;
  const Scalar scale = std::max(
      {abs(lhs1), abs(lhs2), abs(rhs), Scalar(kTinyScale)});
  return abs(lhs1 - lhs2 - rhs) / scale;
}

}  // namespace detail

/// Values of the scalar level polynomials at x for every level r = 0..k-1 and
/// every multiple of 2^r, computed bottom-up through the level recurrence
/// (level -1 factors are 1).
template <typename Scalar>
std::vector<std::map<Index, Scalar>> scalar_level_values(
    const TridiagonalMatrix<Scalar>& Rn, int k, Scalar x) {
  const Index n = Rn.order();
  std::vector<std::map<Index, Scalar>> val(k);
  for (Index i = 1; i <= n; ++i) val[0][i] = x + Rn.b(i);
  for (int r = 1; r < k; ++r) {
    const Index step = Index(1) << r;
    const Index half = step / 2;
    const Index quarter = step / 4;  // 0 at r = 1; level-(-1) factors below are 1
    for (Index i = step; i <= n; i += step) {
      const Scalar vm = val[r - 1].at(i - half);
      const Scalar v0 = val[r - 1].at(i);
      const Scalar vp = val[r - 1].at(i + half);
      Scalar f_pq = 1, f_m3q = 1, f_mq = 1, f_p3q = 1, D = 1;
      if (r >= 2) {
        f_pq = val[r - 2].at(i + quarter);
        f_mq = val[r - 2].at(i - quarter);
        f_m3q = val[r - 2].at(i - 3 * quarter);
        f_p3q = val[r - 2].at(i + 3 * quarter);
        D = f_mq * f_pq;
      }
      const Scalar t1 =
          coupling_alpha(Rn, r - 1, i) * coupling_gamma(Rn, r - 1, i - half) *
          f_pq * f_m3q * vp;
      const Scalar t3 = coupling_alpha(Rn, r - 1, i + half) *
                        coupling_gamma(Rn, r - 1, i) * f_mq * f_p3q * vm;
      val[r][i] = (t1 - vm * v0 * vp + t3) / D;
    }
  }
  return val;
}

/// Worst relative discrepancy between the recurrence-evaluated level
/// polynomial and (-1)^r det(xI + Rn[window]) over all levels, all block
/// indices and all sample points. Samples must stay away from the window
/// spectra (see main_identity_avoid).
template <typename Scalar>
Scalar check_main_identity(const TridiagonalMatrix<Scalar>& Rn, int k,
                           const std::vector<Scalar>& x_samples) {
  using std::abs;
  const Index n = Rn.order();
  Scalar worst = 0;
  for (const Scalar x : x_samples) {
    const auto val = scalar_level_values(Rn, k, x);
    for (int r = 0; r < k; ++r) {
      const Index step = Index(1) << r;
      const Scalar sign = (r % 2 == 1) ? Scalar(-1) : Scalar(1);
      for (Index i = step; i <= n; i += step) {
        const Scalar det_route =
            sign * detgtri_shifted_plus(Rn.window(window_for(r, i, n)), x);
        const Scalar recur = val[r].at(i);
        const Scalar scale =
            std::max({abs(recur), abs(det_route), Scalar(kTinyScale)});
        worst = std::max(worst, abs(recur - det_route) / scale);
      }
    }
  }
  return worst;
}

/// det(F_{q-1}) det(L_q) - det(F_q) det(L_{q-1}) = prod a_{i+1} c_i, where F_k
/// is the leading k x k window and L_k drops the first row and column.
template <typename Scalar>
Scalar check_det_lemma(const TridiagonalMatrix<Scalar>& Rn) {
  const Index q = Rn.order();
  if (q < 2) throw std::invalid_argument("check_det_lemma: order < 2");
  const auto det = [&](Index lo, Index hi) {
    return detgtri(Rn.window({lo, hi}), ZeroPivotPolicy::Perturb);
  };
  const Scalar lhs1 = det(1, q - 1) * det(2, q);
  const Scalar lhs2 = det(1, q) * (q >= 3 ? det(2, q - 1) : Scalar(1));
  Scalar rhs = 1;
  for (Index i = 1; i <= q - 1; ++i) rhs *= Rn.a(i + 1) * Rn.c(i);
  return detail::identity_discrepancy(lhs1, lhs2, rhs);
}

/// Both appendix determinant identities checked at the sampled points: the
/// level-(t-1) factor against its end-trimmed windows on each side. Returns
/// the worst relative discrepancy (0 when the order admits no valid window).
template <typename Scalar>
Scalar check_appendix_identities(const TridiagonalMatrix<Scalar>& Rn,
                                 const std::vector<Scalar>& x_samples) {
  const Index n = Rn.order();
  auto det = [&](Scalar x, Index lo, Index hi) -> Scalar {
    if (lo > hi) return Scalar(1);  // empty window
    return detgtri_shifted_plus(Rn.window({lo, hi}), x);
  };
  Scalar worst = 0;
  for (int t = 2; (Index(1) << (t + 1)) <= n + 1; ++t) {
    const Index span = Index(1) << t;  // 2^t
    const Index half = span / 2;       // 2^{t-1}
    for (Index i = span; i + span - 1 <= n; i += span) {
      for (const Scalar x : x_samples) {
        {  // left identity
          const Scalar f_half = det(x, i - span + 1, i - 1);
          const Scalar hat_q = det(x, i - half + 1, i - 2);
          const Scalar f_q = det(x, i - half + 1, i - 1);
          const Scalar hat_half = det(x, i - span + 1, i - 2);
          Scalar rhs = det(x, i - span + 1, i - half - 1);  // f at i - 3*2^{t-2}
          for (Index j = i - half; j <= i - 2; ++j) rhs *= Rn.a(j + 1) * Rn.c(j);
          worst = std::max(worst, detail::identity_discrepancy(
                                      f_half * hat_q, f_q * hat_half, -rhs));
        }
        {  // right identity
          const Scalar f_half = det(x, i + 1, i + span - 1);
          const Scalar til_q = det(x, i + 2, i + half - 1);
          const Scalar f_q = det(x, i + 1, i + half - 1);
          const Scalar til_half = det(x, i + 2, i + span - 1);
          Scalar rhs = det(x, i + half + 1, i + span - 1);  // f at i + 3*2^{t-2}
          for (Index j = i + 1; j <= i + half - 1; ++j) rhs *= Rn.a(j + 1) * Rn.c(j);
          worst = std::max(worst, detail::identity_discrepancy(
                                      f_half * til_q, f_q * til_half, -rhs));
        }
      }
    }
  }
  return worst;
}

/// Deterministically picks `count` points in [lo, hi] keeping the largest
/// possible distance from the values in `avoid`.
template <typename Scalar>
std::vector<Scalar> samples_away_from(std::vector<Scalar> avoid, Scalar lo, Scalar hi,
                                      int count) {
  using std::abs;
  std::sort(avoid.begin(), avoid.end());
  const int grid = std::max(64 * count, 256);
  std::vector<std::pair<Scalar, Scalar>> scored;  // (-distance, x)
  for (int j = 0; j < grid; ++j) {
    const Scalar x = lo + (hi - lo) * (Scalar(j) + Scalar(0.5)) / Scalar(grid);
    Scalar d = std::numeric_limits<Scalar>::max();
    auto it = std::lower_bound(avoid.begin(), avoid.end(), x);
    if (it != avoid.end()) d = std::min(d, abs(*it - x));
    if (it != avoid.begin()) d = std::min(d, abs(*std::prev(it) - x));
    scored.emplace_back(-d, x);
  }
  std::sort(scored.begin(), scored.end());
  std::vector<Scalar> out;
  const Scalar min_spacing = (hi - lo) / Scalar(4 * count);
  for (const auto& [negd, x] : scored) {
    bool ok = true;
    for (const Scalar y : out)
      if (abs(y - x) < min_spacing) ok = false;
    if (ok) out.push_back(x);
    if (static_cast<int>(out.size()) == count) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Negated spectra of every level window, the avoid-list for
/// check_main_identity sample points.
template <typename Scalar>
std::vector<Scalar> main_identity_avoid(const TridiagonalMatrix<Scalar>& Rn, int k) {
  const Index n = Rn.order();
  const TridiagonalMatrix<Scalar> S =
      Rn.symmetric() ? Rn : symmetrize_similarity(Rn).matrix;
  std::vector<Scalar> avoid;
  for (int r = 0; r < k; ++r) {
    const Index step = Index(1) << r;
    for (Index i = step; i <= n; i += step) {
      const Vector<Scalar> eigs = eigenvalues_bisect(
          S.window(window_for(r, i, n)), EigenRequest<Scalar>::all(Scalar(1e-10)));
      for (Index j = 0; j < eigs.size(); ++j) avoid.push_back(-eigs[j]);
    }
  }
  return avoid;
}

/// Negated spectra of every window consumed by check_appendix_identities.
template <typename Scalar>
std::vector<Scalar> appendix_avoid(const TridiagonalMatrix<Scalar>& Rn) {
  const Index n = Rn.order();
  const TridiagonalMatrix<Scalar> S =
      Rn.symmetric() ? Rn : symmetrize_similarity(Rn).matrix;
  std::vector<Scalar> avoid;
  auto add = [&](Index lo, Index hi) {
    if (lo > hi) return;
    const Vector<Scalar> eigs = eigenvalues_bisect(
        S.window({lo, hi}), EigenRequest<Scalar>::all(Scalar(1e-10)));
    for (Index j = 0; j < eigs.size(); ++j) avoid.push_back(-eigs[j]);
  };
  for (int t = 2; (Index(1) << (t + 1)) <= n + 1; ++t) {
    const Index span = Index(1) << t;
    const Index half = span / 2;
    for (Index i = span; i + span - 1 <= n; i += span) {
      add(i - span + 1, i - 1);
      add(i - half + 1, i - 2);
      add(i - half + 1, i - 1);
      add(i - span + 1, i - 2);
      add(i - span + 1, i - half - 1);
      add(i + 1, i + span - 1);
      add(i + 2, i + half - 1);
      add(i + 1, i + half - 1);
      add(i + 2, i + span - 1);
      add(i + half + 1, i + span - 1);
    }
  }
  return avoid;
}

/// Outcome of the principal-submatrix determinant lower bound check.
template <typename Scalar>
struct DetBoundCheck {
  bool hypothesis_ok = false;  ///< ratio condition along the window
  bool bound_ok = false;       ///< det > b_t prod |a_i| / relax (strict)
  Scalar det = 0;
  Scalar rhs = 0;
};

/// Checks det(window) > b_t prod_{i=t+1}^{r} |a_i| / relax on a symmetric
/// window of order >= 3, reporting separately whether the theorem's ratio
/// hypothesis (with |a_t| taken as b_t) holds along the window.
template <typename Scalar>
DetBoundCheck<Scalar> check_m2_det_bound(const TridiagonalMatrix<Scalar>& M,
                                         const SubmatrixWindow& w,
                                         Scalar relax = Scalar(1)) {
  using std::abs;
  if (w.size() < 3)
    throw std::invalid_argument("check_m2_det_bound: window order < 3");
  DetBoundCheck<Scalar> out;
  out.hypothesis_ok = true;
  Scalar prev = M.b(w.lo);
  for (Index kk = w.lo; kk < w.hi; ++kk) {
    const Scalar an = abs(M.a(kk + 1));
    if (!(M.b(kk + 1) / an - an / abs(prev) > Scalar(1))) {
      out.hypothesis_ok = false;
      break;
    }
    prev = an;
  }
  out.det = detgtri(M.window(w), ZeroPivotPolicy::Perturb);
  out.rhs = M.b(w.lo);
  for (Index i = w.lo + 1; i <= w.hi; ++i) out.rhs *= abs(M.a(i));
  out.rhs /= relax;
  out.bound_ok = out.det > out.rhs;
  return out;
}

/// Structural properties of a zero table: strict simplicity of every entry,
/// Sturm dominance |lambda_l| > |mu_l| between each level and the merged
/// product zeros below it, the pairing inequality
/// |mu_{l+1} - lambda_l|/|mu_{l+1}| + |mu_l|/|mu_{l+1}| < 1, and the
/// telescoping product bound prod(1 + |mu_{l+1} - lambda_l|/|mu_{l+1}|) <=
/// |mu_L|/|mu_1|.
struct ZeroStructureCheck {
  bool strictly_descending = true;
  bool sturm_dominance = true;
  bool pairing_inequality = true;
  bool telescoping = true;
  long entries_checked = 0;

  bool ok() const {
    return strictly_descending && sturm_dominance && pairing_inequality && telescoping;
  }
};

template <typename Scalar>
ZeroStructureCheck check_zero_structure(const ZeroTable<Scalar>& table) {
  using std::abs;
  ZeroStructureCheck out;
  for (const auto& [key, mu] : table.entries()) {
    ++out.entries_checked;
    for (Index j = 0; j + 1 < mu.size(); ++j)
      if (!(mu[j] > mu[j + 1])) out.strictly_descending = false;

    const auto [r, i] = key;
    if (r == 0) continue;
    const Index half = Index(1) << (r - 1);
    if (!table.contains(r - 1, i - half) || !table.contains(r - 1, i + half)) continue;
    const Vector<Scalar> lambda =
        merge_product_zeros(table.at(r - 1, i - half), table.at(r - 1, i + half));
    if (lambda.size() + 1 != mu.size()) {
      out.sturm_dominance = false;
      continue;
    }
    Scalar telescoped = 1;
    for (Index l = 0; l < lambda.size(); ++l) {
      if (!(abs(lambda[l]) > abs(mu[l]))) out.sturm_dominance = false;
      const Scalar ratio = abs(mu[l + 1] - lambda[l]) / abs(mu[l + 1]);
      if (!(ratio + abs(mu[l]) / abs(mu[l + 1]) < Scalar(1)))
        out.pairing_inequality = false;
      telescoped *= 1 + ratio;
    }
    const Scalar cap = abs(mu[mu.size() - 1]) / abs(mu[0]);
    if (!(telescoped <= cap * (1 + Scalar(1e-12)))) out.telescoping = false;
  }
  return out;
}

/// Measured forward error of the paired part of a chain against the same
/// chain evaluated in extended precision, with its composed bound (delta = 0).
template <typename Scalar>
struct ChainErrorSample {
  Scalar measured = 0;
  Scalar bound = 0;
};

template <typename Scalar>
ChainErrorSample<Scalar> measure_rational_chain(const TridiagonalMatrix<Scalar>& B,
                                                const PairedChain<Scalar>& chain,
                                                const Vector<Scalar>& b,
                                                const ErrorModel<Scalar>& em = {}) {
  using W = ecr::detail::Wide<Scalar>;
  ChainWorkspace<Scalar> ws;
  Vector<Scalar> z = b;
  apply_paired_part_inplace<Scalar>(B, chain, z, ws);

  ChainWorkspace<W> wws;
  Vector<W> zw = b.template cast<W>();
  apply_paired_part_inplace<W>(B.template cast<W>(), chain.template cast<W>(), zw, wws);

  ChainErrorSample<Scalar> out;
  out.measured = static_cast<Scalar>((zw - z.template cast<W>()).norm());
  out.bound = rational_chain_bound(chain.zeros(), b.norm(), em);
  return out;
}

template <typename Scalar>
ChainErrorSample<Scalar> measure_scaled_chain(const TridiagonalMatrix<Scalar>& B,
                                              const Vector<Scalar>& xi,
                                              const Vector<Scalar>& factors,
                                              const Vector<Scalar>& b,
                                              const ErrorModel<Scalar>& em = {}) {
  using W = ecr::detail::Wide<Scalar>;
  const Vector<Scalar> z = apply_scaled_inverse_chain(B, xi, factors, b);
  ChainWorkspace<W> wws;
  Vector<W> zw = b.template cast<W>();
  apply_scaled_inverse_chain_inplace<W>(B.template cast<W>(),
                                        xi.template cast<W>().eval(),
                                        factors.template cast<W>().eval(), zw, wws);
  ChainErrorSample<Scalar> out;
  out.measured = static_cast<Scalar>((zw - z.template cast<W>()).norm());
  out.bound = scaled_chain_bound(xi, factors, b.norm(), em);
  return out;
}

}  // namespace ecr::verify
