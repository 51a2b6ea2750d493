#pragma once

// Forward-error bound calculus for chained shifted solves: the growth function
// g(u), the single-solve bounds xi and Q, the chain constants C1/C2/C3 with
// their composed bounds, and the certification preconditions on the system
// matrices.

#include <cmath>
#include <limits>

#include "ecr/tridiagonal.hpp"

namespace ecr {

/// Rounding model: unit roundoff u of the working precision, zero tolerance
/// epsilon = (15/2) u for bisection-computed shifts, input perturbation
/// tolerance delta, and the exponent in the smallest-eigenvalue admissibility
/// threshold u^{1 - condition_exponent}.
template <typename Scalar = double>
struct ErrorModel {
  Scalar u = unit_roundoff<Scalar>();
  Scalar delta = 0;
  Scalar condition_exponent = Scalar(1) / 2;

  Scalar epsilon() const { return Scalar(15) / 2 * u; }
  Scalar lambda_min_floor() const {
    using std::pow;
    return pow(u, Scalar(1) - condition_exponent);
  }
};

/// g(u) = (4u + 3u^2 + u^3) / (1 - u), the componentwise backward-error growth
/// of one tridiagonal elimination.
template <typename Scalar>
Scalar g_of_u(Scalar u) {
  return (4 * u + 3 * u * u + u * u * u) / (1 - u);
}

/// xi(A, u) = g(u) k2 / (1 - g(u) k2), the relative forward error of one
/// elimination on a matrix with 2-norm condition number k2.
template <typename Scalar>
Scalar bound_xi(Scalar kappa2, const ErrorModel<Scalar>& em) {
  const Scalar t = g_of_u(em.u) * kappa2;
  if (!(t < Scalar(1)))
    throw BoundOverflowError("bound_xi: g(u) * kappa2 >= 1");
  return t / (1 - t);
}

/// Q(A, alpha, u): forward error of eliminating (A - alpha_tilde I) x = b where
/// alpha < 0 is known only to tolerance epsilon.
template <typename Scalar>
Scalar bound_Q(Scalar lambda_max, Scalar lambda_min, Scalar alpha,
               const ErrorModel<Scalar>& em) {
  using std::abs;
  const Scalar eps = em.epsilon();
  const Scalar shifted_min = lambda_min + abs(alpha) - eps;
  if (!(shifted_min > Scalar(0)))
    throw BoundOverflowError("bound_Q: lambda_min + |alpha| - eps <= 0");
  const Scalar g = g_of_u(em.u);
  const Scalar shifted_max = lambda_max + abs(alpha) + eps;
  const Scalar denom = shifted_min - g * shifted_max;
  if (!(denom > Scalar(0)))
    throw BoundOverflowError("bound_Q: condition too large for the bound");
  return g * shifted_max * (lambda_min + abs(alpha)) / shifted_min / denom +
         eps / shifted_min;
}

/// C1 = sum_{l>=2} 1/|mu_l| over the paired zeros (the largest zero is left
/// aside); zero for a single-zero chain.
template <typename Scalar>
Scalar chain_C1(const Vector<Scalar>& mu) {
  using std::abs;
  Scalar s = 0;
  for (Index j = 1; j < mu.size(); ++j) s += 1 / abs(mu[j]);
  return s;
}

/// C2 = prod |a_j| / |xi_j| over the interleaved coupling factors.
template <typename Scalar>
Scalar chain_C2(const Vector<Scalar>& xi, const Vector<Scalar>& factors) {
  using std::abs;
  if (xi.size() != factors.size())
    throw LengthMismatchError("chain_C2: factor/zero length mismatch");
  Scalar p = 1;
  for (Index j = 0; j < xi.size(); ++j) p *= abs(factors[j]) / abs(xi[j]);
  return p;
}

/// C3 = sum 1/|xi_j|.
template <typename Scalar>
Scalar chain_C3(const Vector<Scalar>& xi) {
  using std::abs;
  Scalar s = 0;
  for (Index j = 0; j < xi.size(); ++j) s += 1 / abs(xi[j]);
  return s;
}

/// Forward-error bound for the paired chain on zeros mu (descending), applied
/// to a vector of 2-norm rhs_norm:
/// (|mu_last| / |mu_first|) * (delta + 77 u C1 ||b||).
template <typename Scalar>
Scalar rational_chain_bound(const Vector<Scalar>& mu, Scalar rhs_norm,
                            const ErrorModel<Scalar>& em) {
  using std::abs;
  const Scalar prefactor =
      (mu.size() > 1) ? abs(mu[mu.size() - 1]) / abs(mu[0]) : Scalar(1);
  return prefactor * (em.delta + 77 * em.u * chain_C1(mu) * rhs_norm);
}

/// Forward-error bound for the scaled inverse chain:
/// C2 * (delta + 41 u C3 ||b||).
template <typename Scalar>
Scalar scaled_chain_bound(const Vector<Scalar>& xi, const Vector<Scalar>& factors,
                          Scalar rhs_norm, const ErrorModel<Scalar>& em) {
  return chain_C2(xi, factors) * (em.delta + 41 * em.u * chain_C3(xi) * rhs_norm);
}

/// Per-matrix certification diagnostics.
template <typename Scalar = double>
struct ConditionDiagnostics {
  bool b_symmetric = false;
  bool rn_symmetric = false;
  bool rn_offdiag_nonzero = false;
  bool b_spectrum_in_range = false;   // lambda_min >= u^{1/2} and lambda_max <= 1
  bool rn_spectrum_in_range = false;
  bool rn_gershgorin_le_one = false;  // max |b_i +- (|a_i| + |a_{i+1}|)| <= 1
  Scalar b_lambda_min = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar b_lambda_max = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar rn_lambda_min = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar rn_lambda_max = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar rn_gershgorin_scale = std::numeric_limits<Scalar>::quiet_NaN();

  bool ok() const {
    return b_symmetric && rn_symmetric && rn_offdiag_nonzero &&
           b_spectrum_in_range && rn_spectrum_in_range && rn_gershgorin_le_one;
  }
};

/// Checks the certification preconditions: B and Rn symmetric positive
/// definite tridiagonal, nonzero subdiagonals of Rn, spectra inside
/// [u^{1/2}, 1], and the Gershgorin-style scale of Rn at most 1. Spectrum
/// extremes come from bisection.
template <typename Scalar>
ConditionDiagnostics<Scalar> check_conditions(const TridiagonalMatrix<Scalar>& B,
                                              const TridiagonalMatrix<Scalar>& Rn,
                                              const ErrorModel<Scalar>& em = {}) {
  ConditionDiagnostics<Scalar> d;
  d.b_symmetric = B.symmetric();
  d.rn_symmetric = Rn.symmetric();
  d.rn_offdiag_nonzero = (Rn.sub().array() != Scalar(0)).all();
  d.rn_gershgorin_scale = bisection_error_scale(Rn);
  d.rn_gershgorin_le_one = d.rn_gershgorin_scale <= Scalar(1);

  const Scalar floor = em.lambda_min_floor();
  if (d.b_symmetric) {
    d.b_lambda_min = eigenvalues_bisect(B, EigenRequest<Scalar>::range(1, 1))[0];
    d.b_lambda_max =
        eigenvalues_bisect(B, EigenRequest<Scalar>::range(B.order(), B.order()))[0];
    d.b_spectrum_in_range = d.b_lambda_min >= floor && d.b_lambda_max <= Scalar(1);
  }
  if (d.rn_symmetric) {
    d.rn_lambda_min = eigenvalues_bisect(Rn, EigenRequest<Scalar>::range(1, 1))[0];
    d.rn_lambda_max =
        eigenvalues_bisect(Rn, EigenRequest<Scalar>::range(Rn.order(), Rn.order()))[0];
    d.rn_spectrum_in_range = d.rn_lambda_min >= floor && d.rn_lambda_max <= Scalar(1);
  }
  return d;
}

/// Computed bound constants, measured residual and certification verdict for
/// one solve.
template <typename Scalar = double>
struct ErrorReport {
  static constexpr Scalar nan = std::numeric_limits<Scalar>::quiet_NaN();

  Scalar residual_rel = nan;
  Scalar bound_C1 = nan;     // max C1 over paired chains
  Scalar bound_C2 = nan;     // max C2 over scaled chains
  Scalar bound_C3 = nan;     // max C3 over scaled chains
  Scalar bound_Q_max = nan;  // max Q(B, mu, u) over all shifts in use
  Scalar bound_xi = nan;     // xi(B, u)
  bool conditions_ok = false;
  bool certified = false;

  // measured / bound, maximized over all instrumented chain applications
  Scalar max_rational_error_ratio = nan;
  Scalar max_scaled_error_ratio = nan;
  ConditionDiagnostics<Scalar> diagnostics;
};

}  // namespace ecr
