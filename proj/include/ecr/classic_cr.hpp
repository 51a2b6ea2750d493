#pragma once

// Classic cyclic reduction for the constant-block Poisson system
// tridiag(I, A, I) with A = tridiag(1, -4, 1): the level matrices satisfy
// A^(r+1) = 2I - (A^(r))^2, and as Chebyshev-type polynomials of A they factor
// into shifted terms with closed-form zeros, so every product and inverse is
// applied one tridiagonal shift at a time.

#include <cmath>

#include "ecr/tridiagonal.hpp"

namespace ecr {

/// Block system of n = 2^{k+1} - 1 rows: diagonal blocks A = tridiag(1,-4,1)
/// of order m, identity off-diagonal blocks, right-hand sides g_i as columns.
template <typename Scalar = double>
struct PoissonBlockSystem {
  Index m = 0;
  int k = 0;
  DenseMatrix<Scalar> g;  // m x (2^{k+1} - 1)

  Index rows() const { return (Index(1) << (k + 1)) - 1; }

  void validate() const {
    if (m < 1 || k < 0) throw std::invalid_argument("PoissonBlockSystem: bad shape");
    if (g.rows() != m || g.cols() != rows())
      throw std::invalid_argument("PoissonBlockSystem: rhs shape mismatch");
  }
};

template <typename Scalar = double>
TridiagonalMatrix<Scalar> poisson_block(Index m) {
  return TridiagonalMatrix<Scalar>::Constant(m, Scalar(1), Scalar(-4), Scalar(1));
}

/// Zeros of the level-r reduction polynomial:
/// lambda_i^(r) = -2 cos((2i - 1) pi / 2^{r+1}), i = 1..2^r. All lie in
/// (-2, 2), symmetric about 0.
template <typename Scalar = double>
struct ChebyshevZeroSet {
  int r = 0;
  Vector<Scalar> zeros;
};

template <typename Scalar = double>
ChebyshevZeroSet<Scalar> cheb_zeros(int r) {
  if (r < 0) throw std::invalid_argument("cheb_zeros: negative level");
  const Index count = Index(1) << r;
  Vector<Scalar> z(count);
  const long double pi = 3.14159265358979323846264338327950288L;
  for (Index i = 1; i <= count; ++i)
    z[i - 1] = static_cast<Scalar>(
        -2.0L * std::cos(static_cast<long double>(2 * i - 1) * pi /
                         static_cast<long double>(Index(1) << (r + 1))));
  return {r, std::move(z)};
}

/// y = A^(r) v in factored form: A^(0) v = A v, and for r >= 1
/// A^(r) v = -(A - lambda_1 I) ... (A - lambda_{2^r} I) v, applied as 2^r
/// shifted tridiagonal multiplications in ascending zero order.
template <typename Scalar>
Vector<Scalar> apply_Ar(const TridiagonalMatrix<Scalar>& A, int r,
                        const Vector<Scalar>& v) {
  if (r == 0) return apply(A, v);
  const auto zs = cheb_zeros<Scalar>(r);
  Vector<Scalar> w = v;
  for (Index i = 0; i < zs.zeros.size(); ++i)
    w = apply_shifted(A, zs.zeros[i], w);
  return -w;
}

/// x = (A^(r))^{-1} b via 2^r shifted solves (one for r = 0), sign handled
/// once at the end.
template <typename Scalar>
Vector<Scalar> apply_Ar_inverse(Index m, int r, const Vector<Scalar>& b) {
  const TridiagonalMatrix<Scalar> A = poisson_block<Scalar>(m);
  Vector<Scalar> x = b;
  Vector<Scalar> pivots(m);
  if (r == 0) {
    solve_shifted_inplace<Scalar>(A, Scalar(0), x, pivots);
    return x;
  }
  const auto zs = cheb_zeros<Scalar>(r);
  for (Index i = 0; i < zs.zeros.size(); ++i)
    solve_shifted_inplace<Scalar>(A, zs.zeros[i], x, pivots);
  return -x;
}

/// Cyclic reduction solve: forward reduction of the right-hand sides
/// g_j^(r+1) = g_{2j-1}^(r) - A^(r) g_{2j}^(r) + g_{2j+1}^(r), the single
/// solve A^(k) u_{2^k} = g_1^(k), then back-substitution
/// u = (A^(r))^{-1} (g - u_left - u_right) down the levels.
template <typename Scalar>
DenseMatrix<Scalar> cr_solve(const PoissonBlockSystem<Scalar>& sys) {
  sys.validate();
  const Index n = sys.rows();
  const Index m = sys.m;
  const TridiagonalMatrix<Scalar> A = poisson_block<Scalar>(m);

  DenseMatrix<Scalar> g = sys.g;
  for (int r = 0; r < sys.k; ++r) {
    const Index step = Index(1) << r;
    const Index next = 2 * step;
    for (Index i = next; i <= n; i += next) {
      Vector<Scalar> mid = apply_Ar(A, r, Vector<Scalar>(g.col(i - 1)));
      g.col(i - 1) = g.col(i - step - 1) - mid + g.col(i + step - 1);
    }
  }

  DenseMatrix<Scalar> u = DenseMatrix<Scalar>::Zero(m, n);
  const Index center = Index(1) << sys.k;
  u.col(center - 1) = apply_Ar_inverse<Scalar>(m, sys.k, Vector<Scalar>(g.col(center - 1)));

  for (int r = sys.k - 1; r >= 0; --r) {
    const Index step = Index(1) << r;
    for (Index i = step; i <= n; i += 2 * step) {
      Vector<Scalar> rhs = g.col(i - 1);
      if (i - step >= 1) rhs -= u.col(i - step - 1);
      if (i + step <= n) rhs -= u.col(i + step - 1);
      u.col(i - 1) = apply_Ar_inverse<Scalar>(m, r, rhs);
    }
  }
  return u;
}

/// Relative residual of the block system.
template <typename Scalar>
Scalar poisson_residual(const PoissonBlockSystem<Scalar>& sys,
                        const DenseMatrix<Scalar>& u) {
  const Index n = sys.rows();
  const TridiagonalMatrix<Scalar> A = poisson_block<Scalar>(sys.m);
  Scalar num2 = 0;
  for (Index i = 1; i <= n; ++i) {
    Vector<Scalar> r = apply(A, u.col(i - 1)) - sys.g.col(i - 1);
    if (i > 1) r += u.col(i - 2);
    if (i < n) r += u.col(i);
    num2 += r.squaredNorm();
  }
  const Scalar den2 = sys.g.squaredNorm();
  if (den2 == Scalar(0)) return num2 == Scalar(0) ? Scalar(0) : std::numeric_limits<Scalar>::infinity();
  using std::sqrt;
  return sqrt(num2 / den2);
}

}  // namespace ecr
