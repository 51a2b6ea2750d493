#pragma once

#include <Eigen/Dense>

#include "ecr/tridiagonal.hpp"
#include "ecr_cli/builders.hpp"

namespace ecr::testing {

/// Random symmetric tridiagonal with diagonal dominance margin, scaled so the
/// Gershgorin range stays within (0, scale * 3).
inline TridiagonalMatrix<double> random_spd_tridiag(Index q, std::uint64_t seed,
                                                    double scale = 1.0) {
  cli::SplitMix64 rng(seed);
  Vector<double> diag(q), off(std::max<Index>(q - 1, 0));
  for (Index i = 0; i < q - 1; ++i) off[i] = 0.4 * rng.uniform_pm1();
  for (Index i = 0; i < q; ++i) {
    const double left = i > 0 ? std::abs(off[i - 1]) : 0.0;
    const double right = i < q - 1 ? std::abs(off[i]) : 0.0;
    diag[i] = left + right + 0.1 + 0.9 * std::abs(rng.uniform_pm1());
  }
  return TridiagonalMatrix<double>::Symmetric(scale * diag, (scale * off).eval());
}

/// Random symmetric tridiagonal scaled into the certification conditions:
/// Gershgorin range within (0, 1), smallest eigenvalue well above u^{1/2}.
inline TridiagonalMatrix<double> random_conditioned_tridiag(Index q,
                                                            std::uint64_t seed) {
  return random_spd_tridiag(q, seed, 0.3);
}

/// Random general (nonsymmetric) tridiagonal, diagonally dominant so
/// elimination stays clean.
inline TridiagonalMatrix<double> random_dominant_tridiag(Index q, std::uint64_t seed) {
  cli::SplitMix64 rng(seed);
  Vector<double> diag(q), sub(std::max<Index>(q - 1, 0)), sup(std::max<Index>(q - 1, 0));
  for (Index i = 0; i < q - 1; ++i) {
    sub[i] = 0.45 * rng.uniform_pm1();
    sup[i] = 0.45 * rng.uniform_pm1();
  }
  for (Index i = 0; i < q; ++i) {
    const double row = (i > 0 ? std::abs(sub[i - 1]) : 0.0) +
                       (i < q - 1 ? std::abs(sup[i]) : 0.0);
    diag[i] = row + 0.2 + std::abs(rng.uniform_pm1());
  }
  return TridiagonalMatrix<double>(std::move(diag), std::move(sub), std::move(sup));
}

inline double dense_determinant(const TridiagonalMatrix<double>& T) {
  return T.dense().fullPivLu().determinant();
}

inline Vector<double> dense_lu_solve(const DenseMatrix<double>& A,
                                     const Vector<double>& b) {
  return A.fullPivLu().solve(b);
}

inline double rel_err(const Vector<double>& got, const Vector<double>& want) {
  const double scale = want.norm();
  return scale == 0.0 ? (got - want).norm() : (got - want).norm() / scale;
}

inline double rel_err(const DenseMatrix<double>& got, const DenseMatrix<double>& want) {
  const double scale = want.norm();
  return scale == 0.0 ? (got - want).norm() : (got - want).norm() / scale;
}

}  // namespace ecr::testing
