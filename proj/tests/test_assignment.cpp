#include "kct/assignment.hpp"
#include "kct/compare.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace kct;

namespace {

std::vector<Complex> random_values(std::size_t n, Rng& rng) {
  std::vector<Complex> v;
  for (std::size_t i = 0; i < n; ++i) v.emplace_back(rng.gaussian(), rng.gaussian());
  return v;
}

}  // namespace

TEST_CASE("square assignment matches brute force over permutations") {
  Rng rng(100);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.next_u64() % 7;
    const auto a = random_values(n, rng);
    const auto b = random_values(n, rng);
    const auto oracle_match = oracle::brute_force_match(a, b);
    const auto cmp = wasserstein({a}, {b});
    CHECK(cmp.distance == oracle::brute_force_w2(a, b));
    CHECK(cmp.assignment == oracle_match.perm);
  }
}

TEST_CASE("ties resolve to the lexicographically smallest permutation") {
  // Every permutation of a constant matrix is optimal.
  const Assignment flat = solve_assignment(Matrix::Constant(4, 4, 2.0));
  CHECK(flat.column_of_row == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(flat.cost == 8.0);

  // Two optimal matchings: {0->1, 1->0} and {0->0, 1->1} both cost 2.
  Matrix m(2, 2);
  m << 1, 1, 1, 1;
  CHECK(solve_assignment(m).column_of_row == std::vector<std::size_t>{0, 1});

  // Repeated eigenvalues: the lexicographic rule picks the identity.
  const std::vector<Complex> twin{{0.5, 0.0}, {0.5, 0.0}, {0.1, 0.0}};
  CHECK(wasserstein({twin}, {twin}).assignment == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("rectangular assignment picks the cheapest columns") {
  Matrix m(2, 4);
  m << 5, 1, 9, 9,  //
      9, 9, 9, 0.5;
  const Assignment a = solve_assignment(m);
  CHECK(a.column_of_row == std::vector<std::size_t>{1, 3});
  CHECK(a.cost == 1.5);

  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t rows = 1 + rng.next_u64() % 4;
    const std::size_t cols = rows + rng.next_u64() % 3;
    Matrix c(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < c.rows(); ++i)
      for (Eigen::Index j = 0; j < c.cols(); ++j) c(i, j) = static_cast<double>(rng.next_u64() % 5);
    // Oracle: enumerate injective maps as prefixes of column permutations.
    std::vector<std::size_t> perm(cols);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_prefix;
    do {
      double total = 0.0;
      for (std::size_t i = 0; i < rows; ++i) total += c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(perm[i]));
      std::vector<std::size_t> prefix(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(rows));
      if (total < best || (total == best && prefix < best_prefix)) {
        best = total;
        best_prefix = prefix;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    const Assignment got = solve_assignment(c);
    CHECK(got.cost == best);
    CHECK(got.column_of_row == best_prefix);
  }
}

TEST_CASE("assignment input validation") {
  CHECK_THROWS_AS(solve_assignment(Matrix::Zero(3, 2)), DataError);
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(solve_assignment(bad), DataError);
  CHECK(solve_assignment(Matrix::Zero(0, 0)).column_of_row.empty());
}
