#include <doctest.h>

#include "ecr/verify.hpp"
#include "ecr/zero_table_io.hpp"
#include "test_helpers.hpp"

using namespace ecr;

TEST_CASE("window_for") {
  CHECK(window_for(0, 5, 7) == SubmatrixWindow{5, 5});
  CHECK(window_for(1, 2, 7) == SubmatrixWindow{1, 3});
  CHECK(window_for(2, 4, 7) == SubmatrixWindow{1, 7});
  CHECK_THROWS_AS(window_for(1, 3, 7), IndexOutOfGridError);  // not a multiple of 2
  CHECK_THROWS_AS(window_for(0, 8, 7), IndexOutOfGridError);  // beyond the grid
}

TEST_CASE("build_zero_table") {
  SUBCASE("order-1 windows negate the diagonal") {
    Vector<double> d(7);
    d << 1, 2, 3, 4, 5, 6, 7;
    d *= 0.1;
    const auto Rn = TridiagonalMatrix<double>::Diagonal(d);
    const auto table = build_zero_table(Rn, 3);
    for (Index i = 1; i <= 7; i += 2) {
      REQUIRE(table.at(0, i).size() == 1);
      CHECK(table.at(0, i)[0] == doctest::Approx(-0.1 * double(i)).epsilon(1e-14));
    }
  }
  SUBCASE("3x3 window zeros of tridiag(-1,2,-1)") {
    const auto Rn = TridiagonalMatrix<double>::Constant(3, -1.0, 2.0, -1.0);
    const auto table = build_zero_table(Rn, 2);
    const Vector<double>& mu = table.at(1, 2);
    REQUIRE(mu.size() == 3);
    CHECK(mu[0] == doctest::Approx(-(2.0 - std::sqrt(2.0))).epsilon(1e-12));
    CHECK(mu[1] == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(mu[2] == doctest::Approx(-(2.0 + std::sqrt(2.0))).epsilon(1e-12));
  }
  SUBCASE("zeros are roots of the recurrence polynomial (M1, k = 3)") {
    const auto Rn = cli::build_m1(7);
    const auto table = build_zero_table(Rn, 3);
    // at safe sample points, prod(x - mu_j) must match the level recurrence
    const auto xs =
        verify::samples_away_from(verify::main_identity_avoid(Rn, 3), -3.0, -0.01, 5);
    for (const double x : xs) {
      const auto vals = verify::scalar_level_values(Rn, 3, x);
      for (const auto& [key, mu] : table.entries()) {
        double prod = (key.first % 2 == 1) ? -1.0 : 1.0;
        for (Index j = 0; j < mu.size(); ++j) prod *= (x - mu[j]);
        const double recur = vals[key.first].at(key.second);
        CHECK(std::abs(prod - recur) <=
              1e-9 * std::max({std::abs(prod), std::abs(recur), 1e-300}));
      }
    }
  }
  SUBCASE("nonsymmetric but symmetrizable input") {
    const auto S = testing::random_conditioned_tridiag(7, 42);
    Vector<double> sub = S.sub(), sup = S.super();
    for (Index i = 0; i < 6; ++i) {
      sub[i] = std::abs(sub[i]) * 2.0 + 0.01;
      sup[i] = (std::abs(sup[i]) + 0.01) * 0.5;
    }
    const TridiagonalMatrix<double> G(S.diag(), sub, sup);
    const auto table = build_zero_table(G, 3);
    const auto direct = build_zero_table(symmetrize_similarity(G).matrix, 3);
    for (const auto& [key, mu] : table.entries())
      CHECK(testing::rel_err(mu, direct.at(key.first, key.second)) < 1e-12);
  }
  SUBCASE("rejects orders that are not 2^k - 1") {
    const auto Rn = testing::random_conditioned_tridiag(6, 1);
    CHECK_THROWS_AS(build_zero_table(Rn, 3), std::invalid_argument);
  }
}

TEST_CASE("pair_shifts") {
  SUBCASE("direct index mapping") {
    Vector<double> mu(3), lambda(2);
    mu << -1, -2, -3;
    lambda << -1.5, -2.5;
    const auto chain = pair_shifts(mu, lambda);
    REQUIRE(chain.pairs.size() == 2);
    CHECK(chain.pairs[0] == std::pair{-2.0, -1.5});
    CHECK(chain.pairs[1] == std::pair{-3.0, -2.5});
    CHECK(chain.final_shift == -1.0);
    CHECK(chain.negate);  // length 3 = 2^2 - 1 belongs to an odd level
  }
  SUBCASE("degenerate r = 0 chain") {
    Vector<double> mu(1);
    mu << -5;
    const auto chain = pair_shifts(mu, Vector<double>(0));
    CHECK(chain.pairs.empty());
    CHECK(chain.final_shift == -5.0);
    CHECK_FALSE(chain.negate);
  }
  SUBCASE("length mismatch") {
    Vector<double> mu(2), lambda(2);
    mu << -1, -2;
    lambda << -1, -2;
    CHECK_THROWS_AS(pair_shifts(mu, lambda), LengthMismatchError);
  }
  SUBCASE("M2 order 7 chain satisfies the pairing inequality") {
    // (r, i) = (1, 4) is outside the stored footprint; build its zeros from
    // the windows directly
    const auto Rn = cli::build_m2(7);
    const Vector<double> mu = -eigenvalues_bisect(Rn.window(window_for(1, 4, 7)));
    Vector<double> lam_left(1), lam_right(1);
    lam_left << -Rn.b(3);
    lam_right << -Rn.b(5);
    const Vector<double> lambda = merge_product_zeros(lam_left, lam_right);
    const auto chain = pair_shifts(mu, lambda);
    for (Index l = 0; l < Index(chain.pairs.size()); ++l) {
      const auto [theta, phi] = chain.pairs[l];
      CHECK(std::abs(theta - phi) / std::abs(theta) +
                std::abs(mu[l]) / std::abs(theta) <
            1.0);
    }
  }
}

TEST_CASE("merge_product_zeros") {
  Vector<double> a(2), b(1);
  a << -1, -3;
  b << -2;
  const Vector<double> m = merge_product_zeros(a, b);
  REQUIRE(m.size() == 3);
  CHECK(m[0] == -1.0);
  CHECK(m[1] == -2.0);
  CHECK(m[2] == -3.0);

  CHECK(merge_product_zeros(Vector<double>(0), b)[0] == -2.0);

  const auto table = build_zero_table(cli::build_m1(7), 3);
  const Vector<double> two = merge_product_zeros(table.at(0, 3), table.at(0, 5));
  REQUIRE(two.size() == 2);
  CHECK(two[0] >= two[1]);
}

TEST_CASE("zero structure holds on M1 and M2 up to k = 4") {
  for (int k = 1; k <= 4; ++k) {
    const Index n = (Index(1) << k) - 1;
    for (const auto& Rn : {cli::build_m1(n), cli::build_m2(n)}) {
      const auto structure = verify::check_zero_structure(build_zero_table(Rn, k));
      CHECK(structure.strictly_descending);
      CHECK(structure.sturm_dominance);
      CHECK(structure.pairing_inequality);
      CHECK(structure.telescoping);
    }
  }
}

TEST_CASE("coupling coefficients") {
  const auto Rn = testing::random_conditioned_tridiag(15, 11);
  const auto cc = build_coupling(Rn, 4);

  SUBCASE("boundary couplings vanish") {
    CHECK(cc.alpha_at(0, 1) == 0.0);   // alpha includes a_1 = 0
    CHECK(cc.gamma_at(0, 15) == 0.0);  // gamma includes c_n = 0
    CHECK(cc.alpha_at(2, 4) == 0.0);   // window [1..4] includes a_1
  }
  SUBCASE("level recursion for alpha and gamma") {
    for (int r = 1; r < 4; ++r) {
      const Index step = Index(1) << r;
      for (Index i = step; i <= 15; i += step) {
        const double la = cc.alpha_at(r, i);
        const double ra = cc.alpha_at(r - 1, i) * cc.alpha_at(r - 1, i - step / 2);
        CHECK(std::abs(la - ra) <= 1e-12 * std::max(std::abs(la), 1e-300));
        const double lg = cc.gamma_at(r, i);
        const double rg = cc.gamma_at(r - 1, i) * cc.gamma_at(r - 1, i + step / 2);
        CHECK(std::abs(lg - rg) <= 1e-12 * std::max(std::abs(lg), 1e-300));
      }
    }
  }
}

TEST_CASE("zero table JSON round-trip is bit-exact") {
  const auto table = build_zero_table(cli::build_m1(15), 4);
  const std::string text = zero_table_to_json(table).dump();
  const auto parsed = zero_table_from_json<double>(nlohmann::json::parse(text));
  CHECK(parsed.levels() == table.levels());
  CHECK(parsed.n() == table.n());
  for (const auto& [key, zeros] : table.entries()) {
    const auto& back = parsed.at(key.first, key.second);
    REQUIRE(back.size() == zeros.size());
    for (Index v = 0; v < zeros.size(); ++v) CHECK(back[v] == zeros[v]);  // bitwise
  }
}

TEST_CASE("zero table JSON rejects malformed input") {
  CHECK_THROWS_AS(zero_table_from_json<double>(nlohmann::json::parse("[1,2]")),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      zero_table_from_json<double>(nlohmann::json::parse(R"({"bad": [1.0]})")),
      std::invalid_argument);
  CHECK_THROWS_AS(
      zero_table_from_json<double>(nlohmann::json::parse(R"({"0:1": [-1.0, -0.5]})")),
      std::invalid_argument);  // not descending
}
