#include <doctest.h>

#include "ecr/verify.hpp"
#include "test_helpers.hpp"

using namespace ecr;
using testing::random_dominant_tridiag;
using testing::random_spd_tridiag;

namespace {
const TridiagonalMatrix<double> laplace3 =
    TridiagonalMatrix<double>::Constant(3, -1.0, 2.0, -1.0);
}

TEST_CASE("solve_shifted examples") {
  SUBCASE("row sums of tridiag(-1,2,-1)") {
    Vector<double> rhs(3);
    rhs << 1, 0, 1;
    const Vector<double> x = solve_shifted(laplace3, 0.0, rhs);
    CHECK(x.isApprox(Vector<double>::Ones(3), 1e-14));
  }
  SUBCASE("(I + I) x = rhs") {
    const auto I3 = TridiagonalMatrix<double>::Diagonal(Vector<double>::Ones(3));
    Vector<double> rhs(3);
    rhs << 2, 4, 6;
    const Vector<double> x = solve_shifted(I3, -1.0, rhs);
    Vector<double> want(3);
    want << 1, 2, 3;
    CHECK(x.isApprox(want, 1e-15));
  }
  SUBCASE("sigma = -0.5 against dense LU oracle") {
    const Vector<double> rhs = Vector<double>::Ones(3);
    const Vector<double> x = solve_shifted(laplace3, -0.5, rhs);
    const DenseMatrix<double> A =
        laplace3.dense() + 0.5 * DenseMatrix<double>::Identity(3, 3);
    CHECK(testing::rel_err(x, testing::dense_lu_solve(A, rhs)) < 1e-14);
    // frozen closed form: (14/17, 18/17, 14/17)
    CHECK(x[0] == doctest::Approx(14.0 / 17.0).epsilon(1e-15));
    CHECK(x[1] == doctest::Approx(18.0 / 17.0).epsilon(1e-15));
    CHECK(x[2] == doctest::Approx(14.0 / 17.0).epsilon(1e-15));
  }
  SUBCASE("zero pivot signals violated precondition") {
    const auto Z = TridiagonalMatrix<double>::Diagonal(Vector<double>::Zero(2));
    Vector<double> rhs = Vector<double>::Ones(2);
    CHECK_THROWS_AS((void)solve_shifted(Z, 0.0, rhs), ZeroPivotError);
  }
}

TEST_CASE("solve_shifted matches dense LU on random dominant matrices") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Index q = 2 + static_cast<Index>(seed % 13);
    const auto T = random_dominant_tridiag(q, seed);
    cli::SplitMix64 rng(seed + 1000);
    Vector<double> rhs(q);
    for (Index i = 0; i < q; ++i) rhs[i] = rng.uniform_pm1();
    const double sigma = -0.3;
    const Vector<double> x = solve_shifted(T, sigma, rhs);
    const DenseMatrix<double> A =
        T.dense() - sigma * DenseMatrix<double>::Identity(q, q);
    CHECK(testing::rel_err(x, testing::dense_lu_solve(A, rhs)) < 1e-11);
  }
}

TEST_CASE("detgtri examples") {
  Vector<double> d2(2);
  d2 << 2, 2;
  Vector<double> o2(1);
  o2 << -1;
  CHECK(detgtri(TridiagonalMatrix<double>::Symmetric(d2, o2)) == doctest::Approx(3.0));
  // three-term recurrence gives det = 4 for order 3
  CHECK(detgtri(laplace3) == doctest::Approx(4.0));
  Vector<double> d1(1);
  d1 << 5;
  CHECK(detgtri(TridiagonalMatrix<double>::Diagonal(d1)) == doctest::Approx(5.0));
}

TEST_CASE("detgtri zero-pivot policies") {
  // leading 2x2 block [[0,1],[1,0]] has g_1 = 0
  Vector<double> diag = Vector<double>::Zero(2);
  Vector<double> off(1);
  off << 1;
  const auto T = TridiagonalMatrix<double>::Symmetric(diag, off);
  CHECK_THROWS_AS((void)detgtri(T), PivotBreakdownError);
  // the perturbation rule recovers det = -1 to first order
  CHECK(detgtri(T, ZeroPivotPolicy::Perturb) == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("detgtri equals dense determinant on random well-conditioned matrices") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const Index q = 2 + static_cast<Index>((7 * seed) % 63);
    const auto T = random_dominant_tridiag(q, seed);
    const double got = detgtri(T);
    const double want = testing::dense_determinant(T);
    CHECK(std::abs(got - want) <= 1e-10 * std::max(std::abs(want), 1e-300));
  }
}

TEST_CASE("sturm_count examples and properties") {
  CHECK(sturm_count(laplace3, 2.0) == 1);  // eigenvalues 2 - sqrt(2), 2, 2 + sqrt(2)
  const auto T = random_spd_tridiag(12, 99);
  const auto [lo, hi] = gershgorin_bounds(T);
  CHECK(sturm_count(T, lo - 0.1) == 0);
  CHECK(sturm_count(T, hi + 0.1) == 12);

  SUBCASE("nondecreasing in x and unit jumps across simple eigenvalues") {
    const Vector<double> eigs = verify::dense_eigen(T);
    Index prev = 0;
    for (double x = lo; x <= hi; x += (hi - lo) / 257.0) {
      const Index c = sturm_count(T, x);
      CHECK(c >= prev);
      prev = c;
    }
    for (Index j = 0; j < eigs.size(); ++j) {
      const double gap = 1e-8;
      CHECK(sturm_count(T, eigs[j] + gap) - sturm_count(T, eigs[j] - gap) == 1);
    }
  }
}

TEST_CASE("gershgorin examples") {
  Vector<double> d(3);
  d << 1, 2, 3;
  const auto D = TridiagonalMatrix<double>::Diagonal(d);
  const auto [dlo, dhi] = gershgorin_bounds(D);
  CHECK(dlo == doctest::Approx(1.0));
  CHECK(dhi == doctest::Approx(3.0));

  const auto [llo, lhi] = gershgorin_bounds(laplace3);
  CHECK(llo == doctest::Approx(0.0));
  CHECK(lhi == doctest::Approx(4.0));

  const auto M2 = cli::build_m2(3);
  const auto [mlo, mhi] = gershgorin_bounds(M2);
  const Vector<double> eigs = eigenvalues_bisect(M2);
  CHECK(eigs[0] >= mlo);
  CHECK(eigs[2] <= mhi);
}

TEST_CASE("eigenvalues_bisect examples") {
  SUBCASE("closed-form spectrum of tridiag(-1,2,-1)") {
    const Vector<double> eigs = eigenvalues_bisect(laplace3, EigenRequest<double>::all(1e-14));
    CHECK(eigs[0] == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-12));
    CHECK(eigs[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(eigs[2] == doctest::Approx(2.0 + std::sqrt(2.0)).epsilon(1e-12));
  }
  SUBCASE("diagonal matrix") {
    Vector<double> d(3);
    d << 3, 1, 2;
    const Vector<double> eigs =
        eigenvalues_bisect(TridiagonalMatrix<double>::Diagonal(d));
    CHECK(eigs[0] == doctest::Approx(1.0));
    CHECK(eigs[1] == doctest::Approx(2.0));
    CHECK(eigs[2] == doctest::Approx(3.0));
  }
  SUBCASE("M1 order 4 against the Jacobi oracle") {
    const auto M1 = cli::build_m1(4);
    const Vector<double> got = eigenvalues_bisect(M1);
    const Vector<double> want = verify::dense_eigen(M1);
    REQUIRE(got.size() == 4);
    for (Index j = 0; j < 4; ++j)
      CHECK(got[j] == doctest::Approx(want[j]).epsilon(1e-10));
    for (Index j = 1; j < 4; ++j) CHECK(got[j] > got[j - 1]);
  }
  SUBCASE("index-range request") {
    const auto T = random_spd_tridiag(9, 7);
    const Vector<double> all = eigenvalues_bisect(T);
    const Vector<double> mid = eigenvalues_bisect(T, EigenRequest<double>::range(3, 5));
    REQUIRE(mid.size() == 3);
    for (Index j = 0; j < 3; ++j)
      CHECK(mid[j] == doctest::Approx(all[j + 2]).epsilon(1e-12));
  }
}

TEST_CASE("bisection bracket property against the paper bound") {
  // sturm_count(T, lambda_j - 2 eps) <= j-1 and sturm_count(T, lambda_j + 2 eps) >= j
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Index q = 3 + static_cast<Index>(seed % 14);
    const auto T = random_spd_tridiag(q, 5000 + seed);
    const double kappa = 1e-13;
    const Vector<double> eigs = eigenvalues_bisect(T, EigenRequest<double>::all(kappa));
    const double eps = 7.5 * kappa * bisection_error_scale(T);
    for (Index j = 1; j <= q; ++j) {
      CHECK(sturm_count(T, eigs[j - 1] - 2 * eps) <= j - 1);
      CHECK(sturm_count(T, eigs[j - 1] + 2 * eps) >= j);
    }
  }
}

TEST_CASE("determinant identity of leading/trailing windows") {
  // det(F_{q-1}) det(L_q) - det(F_q) det(L_{q-1}) = prod a_{i+1} c_i
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const Index q = 3 + static_cast<Index>(seed % 10);
    const auto T = random_dominant_tridiag(q, 31 * seed);
    CHECK(verify::check_det_lemma(T) < 1e-9);
  }
}

TEST_CASE("symmetrize_similarity") {
  SUBCASE("symmetric input round-trips exactly") {
    const auto S = symmetrize_similarity(laplace3);
    CHECK(S.scaling.isApprox(Vector<double>::Ones(3)));
    CHECK(S.matrix.sub() == laplace3.sub());
    CHECK(S.matrix.super() == laplace3.super());
  }
  SUBCASE("hand-computed 2x2 case") {
    Vector<double> d(2), sub(1), sup(1);
    d << 2, 2;
    sub << 1;
    sup << 4;
    const auto S = symmetrize_similarity(TridiagonalMatrix<double>(d, sub, sup));
    CHECK(S.scaling[0] == doctest::Approx(1.0));
    CHECK(S.scaling[1] == doctest::Approx(0.5));
    CHECK(S.matrix.sub()[0] == doctest::Approx(2.0));
    CHECK(S.matrix.super()[0] == doctest::Approx(2.0));
  }
  SUBCASE("sign-indefinite coupling rejected") {
    Vector<double> d(2), sub(1), sup(1);
    d << 2, 2;
    sub << 0;
    sup << 1;
    CHECK_THROWS_AS(symmetrize_similarity(TridiagonalMatrix<double>(d, sub, sup)),
                    NotSymmetrizableError);
  }
  SUBCASE("similarity preserves the determinant") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const Index q = 3 + static_cast<Index>(seed % 8);
      auto T = random_dominant_tridiag(q, 777 + seed);
      // force a_{i+1} c_i > 0 by matching coupling signs
      Vector<double> sub = T.sub(), sup = T.super();
      for (Index i = 0; i < q - 1; ++i) {
        sub[i] = std::abs(sub[i]) + 0.05;
        sup[i] = std::abs(sup[i]) + 0.10;
      }
      const TridiagonalMatrix<double> G(T.diag(), sub, sup);
      const auto S = symmetrize_similarity(G);
      const double dG = detgtri(G);
      const double dS = detgtri(S.matrix);
      CHECK(std::abs(dG - dS) <= 1e-12 * std::abs(dG));
      // eigenvalues preserved too
      const Vector<double> eS = eigenvalues_bisect(S.matrix);
      const Vector<double> eD = verify::dense_eigen(S.matrix);
      CHECK(testing::rel_err(eS, eD) < 1e-10);
    }
  }
}

TEST_CASE("window extraction") {
  const auto M1 = cli::build_m1(7);
  const auto W = M1.window({2, 5});
  CHECK(W.order() == 4);
  CHECK(W.b(1) == M1.b(2));
  CHECK(W.a(2) == M1.a(3));
  CHECK(W.c(3) == M1.c(4));
  CHECK_THROWS_AS(M1.window({0, 3}), IndexOutOfGridError);
}
