#pragma once

// Per-level zero tables: for every reduction level r and block index i the
// sorted zeros of the level-r matrix polynomial, obtained as negated
// eigenvalues of the principal submatrix of the coupling matrix on the
// corresponding index window. Also the paired-shift chains built from them.

#include <bit>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ecr/parallel.hpp"
#include "ecr/tridiagonal.hpp"

namespace ecr {

/// Window [max(1, i - (2^r - 1)), min(n, i + (2^r - 1))] for block index i at
/// level r. Indices consumed by the solver always yield the full interior
/// width 2^{r+1} - 1; clipping is defensive.
inline SubmatrixWindow window_for(int r, Index i, Index n) {
  if (r < 0) throw IndexOutOfGridError("window_for: negative level");
  const Index step = Index(1) << r;
  if (i < step || i > n || i % step != 0)
    throw IndexOutOfGridError("window_for: index " + std::to_string(i) +
                              " invalid at level " + std::to_string(r));
  const Index half = step - 1;
  return {std::max<Index>(1, i - half), std::min<Index>(n, i + half)};
}

/// Map (level r, block index i) -> strictly descending zeros of the level-r
/// matrix polynomial at i (negative reals for conditioned inputs). Entries are
/// stored for every odd multiple of 2^r, the footprint consumed by the
/// reduction and back-substitution phases.
template <typename Scalar = double>
class ZeroTable {
 public:
  using Key = std::pair<int, Index>;

  ZeroTable() = default;
  ZeroTable(int levels, Index n) : levels_(levels), n_(n) {}

  int levels() const { return levels_; }
  Index n() const { return n_; }

  bool contains(int r, Index i) const { return entries_.count({r, i}) > 0; }

  const Vector<Scalar>& at(int r, Index i) const {
    auto it = entries_.find({r, i});
    if (it == entries_.end())
      throw IndexOutOfGridError("ZeroTable: no entry (" + std::to_string(r) + ", " +
                                std::to_string(i) + ")");
    return it->second;
  }

  void set(int r, Index i, Vector<Scalar> zeros) {
    entries_[{r, i}] = std::move(zeros);
  }

  const std::map<Key, Vector<Scalar>>& entries() const { return entries_; }

 private:
  int levels_ = 0;
  Index n_ = 0;
  std::map<Key, Vector<Scalar>> entries_;
};

/// Scalar couplings alpha_i^(r) = prod_{j=i-2^r+1}^{i} a_j and
/// gamma_i^(r) = prod_{j=i}^{i+2^r-1} c_j, with a_1 = c_n = 0 so windows that
/// touch the grid boundary couple through zero.
template <typename Scalar = double>
struct CouplingCoefficients {
  using Key = std::pair<int, Index>;
  std::map<Key, Scalar> alpha;
  std::map<Key, Scalar> gamma;

  Scalar alpha_at(int r, Index i) const { return alpha.at({r, i}); }
  Scalar gamma_at(int r, Index i) const { return gamma.at({r, i}); }
};

template <typename Scalar>
Scalar coupling_alpha(const TridiagonalMatrix<Scalar>& Rn, int r, Index i) {
  Scalar p = 1;
  for (Index j = i - (Index(1) << r) + 1; j <= i; ++j) p *= Rn.a(j);
  return p;
}

template <typename Scalar>
Scalar coupling_gamma(const TridiagonalMatrix<Scalar>& Rn, int r, Index i) {
  Scalar p = 1;
  for (Index j = i; j <= i + (Index(1) << r) - 1; ++j) p *= Rn.c(j);
  return p;
}

/// Couplings for every multiple of 2^r at each level r = 0..k-1.
template <typename Scalar>
CouplingCoefficients<Scalar> build_coupling(const TridiagonalMatrix<Scalar>& Rn, int k) {
  CouplingCoefficients<Scalar> cc;
  const Index n = Rn.order();
  for (int r = 0; r < k; ++r) {
    const Index step = Index(1) << r;
    for (Index i = step; i <= n; i += step) {
      cc.alpha[{r, i}] = coupling_alpha(Rn, r, i);
      cc.gamma[{r, i}] = coupling_gamma(Rn, r, i);
    }
  }
  return cc;
}

/// Calls fn(r, i) for every zero-table entry the three phases consume:
/// levels r = 0..k-1, i an odd multiple of 2^r.
template <typename Fn>
void for_each_table_entry(int k, Fn&& fn) {
  const Index n = (Index(1) << k) - 1;
  for (int r = 0; r < k; ++r) {
    const Index step = Index(1) << r;
    for (Index i = step; i <= n; i += 2 * step) fn(r, i);
  }
}

/// Builds the zero table for a coupling matrix Rn with n = 2^k - 1 by
/// bisection on each required window: entries are the negated eigenvalues of
/// Rn[window], descending. Each entry is computed directly from Rn, never from
/// the level recurrence, so no error accumulates across levels. Nonsymmetric
/// but symmetrizable input is symmetrized once up front (windows of the
/// similarity transform are similarity transforms of the windows).
template <typename Scalar>
ZeroTable<Scalar> build_zero_table(const TridiagonalMatrix<Scalar>& Rn, int k,
                                   Scalar kappa = unit_roundoff<Scalar>(),
                                   MobStats* stats = nullptr, int threads = 1) {
  const Index n = Rn.order();
  if (k < 1 || n != (Index(1) << k) - 1)
    throw std::invalid_argument("build_zero_table: order != 2^k - 1");
  const TridiagonalMatrix<Scalar> S =
      Rn.symmetric() ? Rn : symmetrize_similarity(Rn).matrix;

  std::vector<std::pair<int, Index>> keys;
  for_each_table_entry(k, [&](int r, Index i) { keys.emplace_back(r, i); });

  std::vector<Vector<Scalar>> results(keys.size());
  std::vector<MobStats> local_stats(keys.size());
  parallel_for(0, static_cast<long>(keys.size()), resolve_threads(threads), [&](long idx) {
    auto [r, i] = keys[idx];
    const auto w = window_for(r, i, n);
    // eigenvalues ascend, so their negation is already descending
    results[idx] = -eigenvalues_bisect(S.window(w), EigenRequest<Scalar>::all(kappa),
                                       &local_stats[idx]);
  });

  ZeroTable<Scalar> table(k, n);
  for (std::size_t idx = 0; idx < keys.size(); ++idx)
    table.set(keys[idx].first, keys[idx].second, std::move(results[idx]));
  if (stats)
    for (const auto& s : local_stats) {
      stats->pivot_ops += s.pivot_ops;
      stats->sturm_evaluations += s.sturm_evaluations;
      stats->bisection_steps += s.bisection_steps;
    }
  return table;
}

/// Multiset union of two descending zero sequences, kept descending; exact
/// ties stay adjacent.
template <typename Scalar>
Vector<Scalar> merge_product_zeros(const Vector<Scalar>& left,
                                   const Vector<Scalar>& right) {
  Vector<Scalar> out(left.size() + right.size());
  std::merge(left.begin(), left.end(), right.begin(), right.end(), out.begin(),
             std::greater<Scalar>());
  return out;
}

/// Shift pairs (theta_j, phi_j) = (mu_{j+1}, lambda_j) driving one stabilized
/// rational-chain application, plus the unpaired largest zero mu_1 solved
/// last. `negate` records the sign of the leading coefficient of the level-r
/// polynomial relative to the monic factor product, (-1)^r.
template <typename Scalar = double>
struct PairedChain {
  std::vector<std::pair<Scalar, Scalar>> pairs;  // (theta_j, phi_j)
  Scalar final_shift = 0;
  bool negate = false;

  template <typename T>
  PairedChain<T> cast() const {
    PairedChain<T> out;
    out.final_shift = static_cast<T>(final_shift);
    out.negate = negate;
    out.pairs.reserve(pairs.size());
    for (const auto& [theta, phi] : pairs)
      out.pairs.emplace_back(static_cast<T>(theta), static_cast<T>(phi));
    return out;
  }

  /// Zeros mu_1..mu_L (descending): the unpaired final shift then the thetas.
  Vector<Scalar> zeros() const {
    Vector<Scalar> mu(static_cast<Index>(pairs.size()) + 1);
    mu[0] = final_shift;
    for (std::size_t j = 0; j < pairs.size(); ++j)
      mu[static_cast<Index>(j) + 1] = pairs[j].first;
    return mu;
  }
};

/// Pairs zeros in order after sorting from the largest: theta_j = mu_{j+1},
/// phi_j = lambda_j. Requires len(mu) = len(lambda) + 1. The sign flag is
/// inferred from the chain length when it matches a genuine level
/// (len(mu) = 2^{r+1} - 1), else left positive.
template <typename Scalar>
PairedChain<Scalar> pair_shifts(const Vector<Scalar>& mu, const Vector<Scalar>& lambda) {
  if (mu.size() != lambda.size() + 1)
    throw LengthMismatchError("pair_shifts: len(mu) != len(lambda) + 1");
  PairedChain<Scalar> chain;
  chain.pairs.reserve(lambda.size());
  for (Index j = 0; j < lambda.size(); ++j)
    chain.pairs.emplace_back(mu[j + 1], lambda[j]);
  chain.final_shift = mu[0];
  const auto L1 = static_cast<std::uint64_t>(mu.size()) + 1;
  if (std::has_single_bit(L1)) {
    const int r = std::countr_zero(L1) - 1;
    chain.negate = (r % 2) == 1;
  }
  return chain;
}

/// Chain realizing (B_i^(r))^{-1} D b at table entry (r, i), where D is the
/// product of the two level-(r-1) factors flanking i. At r = 0 the D-factor is
/// the identity and the chain degenerates to the single solve with mu_1.
template <typename Scalar>
PairedChain<Scalar> rational_chain_for(const ZeroTable<Scalar>& table, int r, Index i) {
  const Vector<Scalar>& mu = table.at(r, i);
  Vector<Scalar> lambda;
  if (r > 0) {
    const Index half = Index(1) << (r - 1);
    lambda = merge_product_zeros(table.at(r - 1, i - half), table.at(r - 1, i + half));
  } else {
    lambda = Vector<Scalar>(0);
  }
  PairedChain<Scalar> chain = pair_shifts(mu, lambda);
  chain.negate = (r % 2) == 1;
  return chain;
}

}  // namespace ecr
