#pragma once

// Matrix builders and deterministic inputs for the command-line front end:
// the two spectral mass matrices, the scaled Laplacian, JSON matrix files and
// the seeded right-hand-side generator.

#include <json.hpp>

#include <cstdint>
#include <string>

#include "ecr/ecr_solver.hpp"

namespace ecr::cli {

/// b_i = 2 / ((4i-3)(4i+1)), a_{i+1} = -1 / (sqrt((4i+3)(4i-1)) (4i+1)).
TridiagonalMatrix<double> build_m1(Index n);

/// b_i = 2 / ((4i-1)(4i+3)), a_{i+1} = -1 / (sqrt((4i+5)(4i+1)) (4i+3)).
TridiagonalMatrix<double> build_m2(Index n);

/// tridiag(-1, 2, -1) / 4; spectrum inside (0, 1).
TridiagonalMatrix<double> build_laplace4(Index n);

/// Builds one of the named matrix kinds ("m1", "m2", "laplace4").
TridiagonalMatrix<double> build_named(const std::string& kind, Index n);

/// splitmix64; the stream is identical on every platform.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// uniform in [-1, 1), 53 significant bits
  double uniform_pm1() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
  }
};

/// m x n right-hand side with entries uniform in [-1, 1), column-major fill.
DenseMatrix<double> random_rhs(Index m, Index n, std::uint64_t seed);

nlohmann::json matrix_to_json(const TridiagonalMatrix<double>& T);
TridiagonalMatrix<double> matrix_from_json(const nlohmann::json& j);

/// Reads a {"Rn": {...}, "B": {...}} system file; both entries use the
/// {"order", "diag", "sub", "super"} schema.
struct SystemMatrices {
  TridiagonalMatrix<double> Rn;
  TridiagonalMatrix<double> B;
};
SystemMatrices load_system_file(const std::string& path);

/// FNV-1a over the raw little-endian bytes of the column-major solution.
std::uint64_t solution_hash(const DenseMatrix<double>& x);

}  // namespace ecr::cli
