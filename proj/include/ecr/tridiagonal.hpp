#pragma once

// Core tridiagonal kernels: storage, shifted Gaussian-elimination solves,
// DETGTRI determinants, Sturm counts and bisection eigenvalues.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>

#include "ecr/errors.hpp"

namespace ecr {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Vector<Scalar, Eigen::Dynamic>;
template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Unit roundoff of the scalar type: half the machine-epsilon spacing at 1.
template <typename Scalar>
constexpr Scalar unit_roundoff() {
  return std::numeric_limits<Scalar>::epsilon() / 2;
}

/// 1-based inclusive index range into a parent tridiagonal matrix.
struct SubmatrixWindow {
  Index lo = 1;
  Index hi = 1;
  Index size() const { return hi - lo + 1; }
  friend bool operator==(const SubmatrixWindow&, const SubmatrixWindow&) = default;
};

/// Tridiagonal matrix stored as three bands. Paper-style 1-based entry names:
/// diagonal b_1..b_q, subdiagonal a_2..a_q, superdiagonal c_1..c_{q-1}, with
/// the conventions a_1 = a_{q+1} = 0 and c_q = 0. Immutable after construction.
template <typename Scalar = double>
class TridiagonalMatrix {
 public:
  TridiagonalMatrix() = default;

  TridiagonalMatrix(Vector<Scalar> diag, Vector<Scalar> sub, Vector<Scalar> super)
      : diag_(std::move(diag)), sub_(std::move(sub)), super_(std::move(super)) {
    if (diag_.size() < 1 || sub_.size() != diag_.size() - 1 ||
        super_.size() != diag_.size() - 1)
      throw std::invalid_argument("TridiagonalMatrix: inconsistent band lengths");
    symmetric_ = (sub_.array() == super_.array()).all();
  }

  static TridiagonalMatrix Symmetric(Vector<Scalar> diag, const Vector<Scalar>& off) {
    return TridiagonalMatrix(std::move(diag), off, off);
  }

  static TridiagonalMatrix Diagonal(Vector<Scalar> diag) {
    Index q = diag.size();
    return TridiagonalMatrix(std::move(diag), Vector<Scalar>::Zero(q - 1),
                             Vector<Scalar>::Zero(q - 1));
  }

  /// tridiag(a, b, c): constant bands, order q.
  static TridiagonalMatrix Constant(Index q, Scalar a, Scalar b, Scalar c) {
    return TridiagonalMatrix(Vector<Scalar>::Constant(q, b),
                             Vector<Scalar>::Constant(q - 1, a),
                             Vector<Scalar>::Constant(q - 1, c));
  }

  Index order() const { return diag_.size(); }
  bool symmetric() const { return symmetric_; }

  const Vector<Scalar>& diag() const { return diag_; }
  const Vector<Scalar>& sub() const { return sub_; }
  const Vector<Scalar>& super() const { return super_; }

  Scalar b(Index i) const { return diag_[i - 1]; }
  Scalar a(Index i) const {
    return (i <= 1 || i > order()) ? Scalar(0) : sub_[i - 2];
  }
  Scalar c(Index i) const {
    return (i < 1 || i >= order()) ? Scalar(0) : super_[i - 1];
  }

  /// Principal submatrix on a 1-based inclusive window.
  TridiagonalMatrix window(const SubmatrixWindow& w) const {
    if (w.lo < 1 || w.hi > order() || w.lo > w.hi)
      throw IndexOutOfGridError("window out of range");
    const Index len = w.size();
    return TridiagonalMatrix(diag_.segment(w.lo - 1, len),
                             sub_.segment(w.lo - 1, len - 1),
                             super_.segment(w.lo - 1, len - 1));
  }

  Scalar norm_inf() const {
    Scalar m = 0;
    for (Index i = 1; i <= order(); ++i) {
      using std::abs;
      Scalar row = abs(b(i)) + abs(a(i)) + abs(c(i));
      m = std::max(m, row);
    }
    return m;
  }

  DenseMatrix<Scalar> dense() const {
    DenseMatrix<Scalar> M = DenseMatrix<Scalar>::Zero(order(), order());
    for (Index i = 0; i < order(); ++i) {
      M(i, i) = diag_[i];
      if (i + 1 < order()) {
        M(i + 1, i) = sub_[i];
        M(i, i + 1) = super_[i];
      }
    }
    return M;
  }

  template <typename T>
  TridiagonalMatrix<T> cast() const {
    return TridiagonalMatrix<T>(diag_.template cast<T>(), sub_.template cast<T>(),
                                super_.template cast<T>());
  }

 private:
  Vector<Scalar> diag_, sub_, super_;
  bool symmetric_ = true;
};

/// y = (T - sigma*I) x.
template <typename Scalar, typename Derived>
Vector<Scalar> apply_shifted(const TridiagonalMatrix<Scalar>& T, Scalar sigma,
                             const Eigen::MatrixBase<Derived>& x) {
  const Index q = T.order();
  Vector<Scalar> y(q);
  for (Index i = 0; i < q; ++i) {
    Scalar v = (T.diag()[i] - sigma) * x[i];
    if (i > 0) v += T.sub()[i - 1] * x[i - 1];
    if (i + 1 < q) v += T.super()[i] * x[i + 1];
    y[i] = v;
  }
  return y;
}

template <typename Scalar, typename Derived>
Vector<Scalar> apply(const TridiagonalMatrix<Scalar>& T,
                     const Eigen::MatrixBase<Derived>& x) {
  return apply_shifted(T, Scalar(0), x);
}

/// In-place Gaussian elimination without pivoting for (T - sigma*I) x = rhs.
/// `x` carries the right-hand side on entry and the solution on exit;
/// `pivots` is caller-owned scratch of length >= order. A pivot whose
/// magnitude falls below `breakdown` (default u^2 * ||T - sigma I||_inf)
/// throws ZeroPivotError: for the intended positive definite inputs
/// elimination cannot break down, so a breakdown means the precondition was
/// violated.
template <typename Scalar>
void solve_shifted_inplace(const TridiagonalMatrix<Scalar>& T, Scalar sigma,
                           Eigen::Ref<Vector<Scalar>> x, Vector<Scalar>& pivots,
                           Scalar breakdown = Scalar(-1)) {
  using std::abs;
  const Index q = T.order();
  if (x.size() != q) throw LengthMismatchError("solve_shifted: rhs length != order");
  if (pivots.size() < q) pivots.resize(q);
  if (breakdown < Scalar(0)) {
    Scalar norm = 0;
    for (Index i = 1; i <= q; ++i)
      norm = std::max(norm, abs(T.b(i) - sigma) + abs(T.a(i)) + abs(T.c(i)));
    const Scalar u = unit_roundoff<Scalar>();
    breakdown = u * u * norm;
  }
  pivots[0] = T.diag()[0] - sigma;
  if (!(abs(pivots[0]) > breakdown))
    throw ZeroPivotError("solve_shifted: zero pivot at row 1");
  for (Index i = 1; i < q; ++i) {
    const Scalar w = T.sub()[i - 1] / pivots[i - 1];
    pivots[i] = (T.diag()[i] - sigma) - w * T.super()[i - 1];
    if (!(abs(pivots[i]) > breakdown))
      throw ZeroPivotError("solve_shifted: zero pivot at row " + std::to_string(i + 1));
    x[i] -= w * x[i - 1];
  }
  x[q - 1] /= pivots[q - 1];
  for (Index i = q - 2; i >= 0; --i)
    x[i] = (x[i] - T.super()[i] * x[i + 1]) / pivots[i];
}

/// Solves (T - sigma*I) x = rhs in O(order) without pivoting.
template <typename Scalar>
Vector<Scalar> solve_shifted(const TridiagonalMatrix<Scalar>& T, Scalar sigma,
                             const Vector<Scalar>& rhs, Scalar breakdown = Scalar(-1)) {
  Vector<Scalar> x = rhs;
  Vector<Scalar> pivots(T.order());
  solve_shifted_inplace<Scalar>(T, sigma, x, pivots, breakdown);
  return x;
}

enum class ZeroPivotPolicy {
  Throw,    ///< exact zero pivot raises PivotBreakdownError
  Perturb,  ///< pivot below u*||T||_inf is replaced by +-u*||T||_inf
};

namespace detail {
// One DETGTRI sweep over (T - shift*I). Calls visit(g_i) for each pivot.
template <typename Scalar, typename Visitor>
void detgtri_pivots(const TridiagonalMatrix<Scalar>& T, Scalar shift,
                    ZeroPivotPolicy policy, Visitor&& visit) {
  using std::abs;
  const Index q = T.order();
  const Scalar tiny = unit_roundoff<Scalar>() * std::max(T.norm_inf(), Scalar(abs(shift))) +
                      std::numeric_limits<Scalar>::min();
  Scalar g = T.diag()[0] - shift;
  for (Index i = 0;; ++i) {
    if (policy == ZeroPivotPolicy::Throw) {
      if (g == Scalar(0))
        throw PivotBreakdownError("detgtri: exact zero pivot at row " + std::to_string(i + 1));
    } else if (!(abs(g) > tiny)) {
      g = (g < Scalar(0)) ? -tiny : tiny;
    }
    visit(g);
    if (i + 1 >= q) break;
    g = (T.diag()[i + 1] - shift) - T.sub()[i] * T.super()[i] / g;
  }
}
}  // namespace detail

/// Determinant by the linear-time pivot-product recurrence
/// g_1 = b_1, g_i = b_i - a_i c_{i-1} / g_{i-1}, det = prod g_i.
template <typename Scalar>
Scalar detgtri(const TridiagonalMatrix<Scalar>& T,
               ZeroPivotPolicy policy = ZeroPivotPolicy::Throw) {
  Scalar det = 1;
  detail::detgtri_pivots(T, Scalar(0), policy, [&](Scalar g) { det *= g; });
  return det;
}

/// det(x*I + T), evaluated without forming the shifted matrix.
template <typename Scalar>
Scalar detgtri_shifted_plus(const TridiagonalMatrix<Scalar>& T, Scalar x,
                            ZeroPivotPolicy policy = ZeroPivotPolicy::Perturb) {
  Scalar det = 1;
  detail::detgtri_pivots(T, -x, policy, [&](Scalar g) { det *= g; });
  return det;
}

/// Number of eigenvalues of symmetric T strictly below x (Sturm count from the
/// signs of the DETGTRI pivot sequence of T - x*I, zero pivots perturbed).
template <typename Scalar>
Index sturm_count(const TridiagonalMatrix<Scalar>& T, Scalar x) {
  if (!T.symmetric()) throw std::invalid_argument("sturm_count: matrix not symmetric");
  Index negatives = 0;
  detail::detgtri_pivots(T, x, ZeroPivotPolicy::Perturb, [&](Scalar g) {
    if (g < Scalar(0)) ++negatives;
  });
  return negatives;
}

/// Gershgorin interval [min_i(b_i - |a_i| - |a_{i+1}|), max_i(b_i + |a_i| + |a_{i+1}|)]
/// (row-sum radii for nonsymmetric input); every eigenvalue lies inside.
template <typename Scalar>
std::pair<Scalar, Scalar> gershgorin_bounds(const TridiagonalMatrix<Scalar>& T) {
  using std::abs;
  Scalar lo = std::numeric_limits<Scalar>::max();
  Scalar hi = std::numeric_limits<Scalar>::lowest();
  for (Index i = 1; i <= T.order(); ++i) {
    const Scalar r = abs(T.a(i)) + abs(T.c(i));
    lo = std::min(lo, T.b(i) - r);
    hi = std::max(hi, T.b(i) + r);
  }
  return {lo, hi};
}

/// max_i |b_i +- (|a_i| + |a_{i+1}|)|, the scale factor of the bisection error
/// bound; equals max_i (|b_i| + |a_i| + |a_{i+1}|) for a symmetric matrix.
template <typename Scalar>
Scalar bisection_error_scale(const TridiagonalMatrix<Scalar>& T) {
  using std::abs;
  Scalar m = 0;
  for (Index i = 1; i <= T.order(); ++i)
    m = std::max(m, abs(T.b(i)) + abs(T.a(i)) + abs(T.c(i)));
  return m;
}

/// Operation counters for the bisection eigenvalue solver.
struct MobStats {
  std::uint64_t pivot_ops = 0;        // inner Sturm recurrence steps
  std::uint64_t sturm_evaluations = 0;
  std::uint64_t bisection_steps = 0;
};

/// Bisection request: stopping width kappa and a 1-based index range
/// (first..last ascending); last == 0 selects all eigenvalues.
template <typename Scalar = double>
struct EigenRequest {
  Scalar kappa = unit_roundoff<Scalar>();
  Index first = 1;
  Index last = 0;

  static EigenRequest all(Scalar kappa = unit_roundoff<Scalar>()) {
    return EigenRequest{kappa, 1, 0};
  }
  static EigenRequest range(Index first, Index last,
                            Scalar kappa = unit_roundoff<Scalar>()) {
    return EigenRequest{kappa, first, last};
  }
};

/// Eigenvalues of a symmetric tridiagonal matrix by the method of bisection,
/// each index bracketed independently through Sturm counts, so the output is
/// ascending even for clustered spectra. Every returned value lies within
/// (15/2) * kappa * bisection_error_scale(T) of a true eigenvalue. Cost is
/// O(order) per Sturm count, O(order^2) for a full spectrum.
template <typename Scalar>
Vector<Scalar> eigenvalues_bisect(const TridiagonalMatrix<Scalar>& T,
                                  const EigenRequest<Scalar>& req = {},
                                  MobStats* stats = nullptr) {
  using std::abs;
  if (!T.symmetric())
    throw std::invalid_argument("eigenvalues_bisect: matrix not symmetric");
  if (req.kappa < Scalar(0)) throw std::invalid_argument("eigenvalues_bisect: kappa < 0");
  const Index q = T.order();
  const Index first = req.first;
  const Index last = (req.last == 0) ? q : req.last;
  if (first < 1 || last > q || first > last)
    throw std::invalid_argument("eigenvalues_bisect: bad index range");

  Vector<Scalar> e2(q);  // squared off-diagonals, e2[0] unused
  e2[0] = 0;
  for (Index i = 1; i < q; ++i) e2[i] = T.sub()[i - 1] * T.sub()[i - 1];

  const Scalar u = unit_roundoff<Scalar>();
  const Scalar tiny = u * T.norm_inf() + std::numeric_limits<Scalar>::min();
  auto count_below = [&](Scalar x) -> Index {
    Index negatives = 0;
    Scalar g = T.diag()[0] - x;
    for (Index i = 0;; ++i) {
      if (!(abs(g) > tiny)) g = (g < Scalar(0)) ? -tiny : tiny;
      if (g < Scalar(0)) ++negatives;
      if (i + 1 >= q) break;
      g = (T.diag()[i + 1] - x) - e2[i + 1] / g;
    }
    if (stats) {
      stats->pivot_ops += static_cast<std::uint64_t>(q);
      ++stats->sturm_evaluations;
    }
    return negatives;
  };

  auto [glo, ghi] = gershgorin_bounds(T);
  // Widen so eigenvalues sitting exactly on a Gershgorin endpoint are bracketed.
  const Scalar pad =
      Scalar(2) * std::numeric_limits<Scalar>::epsilon() *
          std::max({abs(glo), abs(ghi), Scalar(1)}) +
      std::numeric_limits<Scalar>::min();
  const Scalar lo0 = glo - pad;
  const Scalar hi0 = ghi + pad;

  Vector<Scalar> out(last - first + 1);
  for (Index j = first; j <= last; ++j) {
    Scalar lo = lo0, hi = hi0;  // invariant: count(lo) < j <= count(hi)
    while (hi - lo > std::max(req.kappa, Scalar(2) * u * (abs(lo) + abs(hi)))) {
      const Scalar mid = lo + (hi - lo) / Scalar(2);
      if (mid <= lo || mid >= hi) break;  // interval no longer splittable
      if (count_below(mid) >= j)
        hi = mid;
      else
        lo = mid;
      if (stats) ++stats->bisection_steps;
    }
    out[j - first] = lo + (hi - lo) / Scalar(2);
  }
  std::sort(out.begin(), out.end());
  return out;
}

template <typename Scalar>
struct SymmetrizedForm {
  Vector<Scalar> scaling;            ///< positive diagonal D, scaling[0] = 1
  TridiagonalMatrix<Scalar> matrix;  ///< D^{-1} T D, symmetric
};

/// Diagonal similarity D^{-1} T D making T symmetric; requires
/// a_{i+1} c_i > 0 for every i. Eigenvalues are preserved. Off-diagonal pairs
/// that are already equal pass through unchanged so symmetric input round-trips
/// exactly.
template <typename Scalar>
SymmetrizedForm<Scalar> symmetrize_similarity(const TridiagonalMatrix<Scalar>& T) {
  using std::sqrt;
  const Index q = T.order();
  Vector<Scalar> d(q), off(q - 1);
  d[0] = 1;
  for (Index i = 0; i + 1 < q; ++i) {
    const Scalar a = T.sub()[i], c = T.super()[i];
    if (a == c) {
      d[i + 1] = d[i];
      off[i] = a;
      continue;
    }
    if (!(a * c > Scalar(0)))
      throw NotSymmetrizableError("symmetrize_similarity: a_{i+1} c_i <= 0 at i = " +
                                  std::to_string(i + 1));
    d[i + 1] = sqrt(a / c) * d[i];
    off[i] = (a < Scalar(0) ? Scalar(-1) : Scalar(1)) * sqrt(a * c);
  }
  return {std::move(d), TridiagonalMatrix<Scalar>::Symmetric(T.diag(), off)};
}

}  // namespace ecr
