#include "ecr_cli/builders.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace ecr::cli {

TridiagonalMatrix<double> build_m1(Index n) {
  Vector<double> diag(n), off(std::max<Index>(n - 1, 0));
  for (Index i = 1; i <= n; ++i)
    diag[i - 1] = 2.0 / ((4.0 * i - 3.0) * (4.0 * i + 1.0));
  for (Index i = 1; i <= n - 1; ++i)
    off[i - 1] = -1.0 / (std::sqrt((4.0 * i + 3.0) * (4.0 * i - 1.0)) * (4.0 * i + 1.0));
  return TridiagonalMatrix<double>::Symmetric(std::move(diag), off);
}

TridiagonalMatrix<double> build_m2(Index n) {
  Vector<double> diag(n), off(std::max<Index>(n - 1, 0));
  for (Index i = 1; i <= n; ++i)
    diag[i - 1] = 2.0 / ((4.0 * i - 1.0) * (4.0 * i + 3.0));
  for (Index i = 1; i <= n - 1; ++i)
    off[i - 1] = -1.0 / (std::sqrt((4.0 * i + 5.0) * (4.0 * i + 1.0)) * (4.0 * i + 3.0));
  return TridiagonalMatrix<double>::Symmetric(std::move(diag), off);
}

TridiagonalMatrix<double> build_laplace4(Index n) {
  return TridiagonalMatrix<double>::Constant(n, -0.25, 0.5, -0.25);
}

TridiagonalMatrix<double> build_named(const std::string& kind, Index n) {
  if (kind == "m1") return build_m1(n);
  if (kind == "m2") return build_m2(n);
  if (kind == "laplace4") return build_laplace4(n);
  throw std::invalid_argument("unknown matrix kind '" + kind + "'");
}

DenseMatrix<double> random_rhs(Index m, Index n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  DenseMatrix<double> y(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) y(i, j) = rng.uniform_pm1();
  return y;
}

nlohmann::json matrix_to_json(const TridiagonalMatrix<double>& T) {
  nlohmann::json j;
  j["order"] = T.order();
  j["diag"] = std::vector<double>(T.diag().begin(), T.diag().end());
  j["sub"] = std::vector<double>(T.sub().begin(), T.sub().end());
  j["super"] = std::vector<double>(T.super().begin(), T.super().end());
  return j;
}

TridiagonalMatrix<double> matrix_from_json(const nlohmann::json& j) {
  const auto order = j.at("order").get<Index>();
  auto band = [&](const char* name, Index expected) {
    const auto& arr = j.at(name);
    if (!arr.is_array() || static_cast<Index>(arr.size()) != expected)
      throw std::invalid_argument(std::string("matrix field '") + name +
                                  "' must be an array of length " +
                                  std::to_string(expected));
    Vector<double> v(expected);
    for (Index i = 0; i < expected; ++i)
      v[i] = arr[static_cast<std::size_t>(i)].get<double>();
    return v;
  };
  return TridiagonalMatrix<double>(band("diag", order), band("sub", order - 1),
                                   band("super", order - 1));
}

SystemMatrices load_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open matrix file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("parse error in '" + path + "': " + e.what());
  }
  return {matrix_from_json(j.at("Rn")), matrix_from_json(j.at("B"))};
}

std::uint64_t solution_hash(const DenseMatrix<double>& x) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (Index j = 0; j < x.cols(); ++j)
    for (Index i = 0; i < x.rows(); ++i) {
      std::uint64_t bits;
      const double v = x(i, j);
      std::memcpy(&bits, &v, sizeof(bits));
      for (int b = 0; b < 8; ++b) {
        h ^= (bits >> (8 * b)) & 0xFFULL;
        h *= 0x100000001b3ULL;
      }
    }
  return h;
}

}  // namespace ecr::cli
