#include <doctest.h>

#include "ecr/verify.hpp"
#include "test_helpers.hpp"

using namespace ecr;

TEST_CASE("apply_rational_chain") {
  SUBCASE("no pairs: single solve with the final shift") {
    const auto I2 = TridiagonalMatrix<double>::Diagonal(Vector<double>::Ones(2));
    PairedChain<double> chain;
    chain.final_shift = -1.0;
    Vector<double> b(2);
    b << 2, 4;
    const Vector<double> z = apply_rational_chain(I2, chain, b);
    CHECK(z[0] == doctest::Approx(1.0));
    CHECK(z[1] == doctest::Approx(2.0));
  }
  SUBCASE("theta = phi pair is a bitwise no-op") {
    const auto B = testing::random_conditioned_tridiag(5, 3);
    PairedChain<double> with, without;
    with.pairs = {{-2.0, -2.0}};
    with.final_shift = -0.7;
    without.final_shift = -0.7;
    Vector<double> b(5);
    b << 0.3, -0.2, 0.9, -0.4, 0.11;
    const Vector<double> z1 = apply_rational_chain(B, with, b);
    const Vector<double> z2 = apply_rational_chain(B, without, b);
    for (Index i = 0; i < 5; ++i) CHECK(z1[i] == z2[i]);
  }
  SUBCASE("level-1 chain against the dense polynomial route") {
    const auto B = TridiagonalMatrix<double>::Constant(2, -0.25, 0.5, -0.25);
    const auto table = build_zero_table(cli::build_m1(3), 2);
    const auto chain = rational_chain_for(table, 1, 2);
    Vector<double> b = Vector<double>::Ones(2);
    const Vector<double> got = apply_rational_chain(B, chain, b);
    const Vector<double> want = verify::dense_rational_apply(B, chain, b);
    CHECK(testing::rel_err(got, want) < 1e-12);
  }
}

TEST_CASE("chain correctness against dense evaluation, m <= 8, r <= 2") {
  // dense reference in extended precision so its own conditioning does not
  // drown the comparison
  for (int k = 2; k <= 3; ++k) {
    const Index n = (Index(1) << k) - 1;
    for (const auto& Rn : {cli::build_m1(n), cli::build_m2(n)}) {
      const auto table = build_zero_table(Rn, k);
      for (const Index m : {2L, 5L, 8L}) {
        const auto B = testing::random_conditioned_tridiag(m, 17 * m + k);
        cli::SplitMix64 rng(m + 31 * k);
        Vector<double> b(m);
        for (Index i = 0; i < m; ++i) b[i] = rng.uniform_pm1();
        for (const auto& [key, mu] : table.entries()) {
          const auto chain = rational_chain_for(table, key.first, key.second);
          const Vector<double> got = apply_rational_chain(B, chain, b);
          const Vector<double> want =
              verify::dense_rational_apply<long double>(
                  B.cast<long double>(), chain.cast<long double>(),
                  b.cast<long double>())
                  .cast<double>();
          CHECK(testing::rel_err(got, want) < 1e-9);
        }
      }
    }
  }
}

TEST_CASE("apply_scaled_inverse_chain") {
  SUBCASE("single zero, single factor") {
    const auto I2 = TridiagonalMatrix<double>::Diagonal(Vector<double>::Ones(2));
    Vector<double> xi(1), factors(1);
    xi << -1.0;
    factors << 3.0;
    Vector<double> b(2);
    b << 2, 2;
    const Vector<double> z = apply_scaled_inverse_chain(I2, xi, factors, b);
    CHECK(z[0] == doctest::Approx(3.0));
    CHECK(z[1] == doctest::Approx(3.0));
  }
  SUBCASE("all-zero factors annihilate") {
    const auto B = testing::random_conditioned_tridiag(4, 5);
    Vector<double> xi(2), factors = Vector<double>::Zero(2);
    xi << -0.5, -1.5;
    const Vector<double> z =
        apply_scaled_inverse_chain(B, xi, factors, Vector<double>(Vector<double>::Ones(4)));
    CHECK(z.norm() == 0.0);
  }
  SUBCASE("length mismatch") {
    const auto B = testing::random_conditioned_tridiag(4, 5);
    Vector<double> xi(2), factors(1);
    xi << -0.5, -1.5;
    factors << 1.0;
    CHECK_THROWS_AS(
        (void)apply_scaled_inverse_chain(B, xi, factors, Vector<double>(Vector<double>::Ones(4))),
        LengthMismatchError);
  }
  SUBCASE("M1 order 7, r = 1, i = 4 against dense alpha (B_2^(0))^{-1} b") {
    const auto Rn = cli::build_m1(7);
    const auto table = build_zero_table(Rn, 3);
    const auto B = testing::random_conditioned_tridiag(6, 8);
    Vector<double> b(6);
    b << 1, -1, 2, 0.5, -0.25, 0.125;

    // alpha_4^(1) (B_2^(0))^{-1} b: chain carries a_3 with the zeros of the
    // level-0 factor at index 3; the leftover a_4 is applied afterward.
    const Vector<double>& xi = table.at(0, 3);
    Vector<double> factors(1);
    factors << Rn.a(3);
    Vector<double> got = apply_scaled_inverse_chain(B, xi, factors, b);
    got *= Rn.a(4);

    const DenseMatrix<double> dense =
        B.dense() + Rn.b(3) * DenseMatrix<double>::Identity(6, 6);
    const Vector<double> want =
        Rn.a(3) * Rn.a(4) * testing::dense_lu_solve(dense, b);
    CHECK(testing::rel_err(got, want) < 1e-10);
  }
}
