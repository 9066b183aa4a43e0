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

TrajectoryEnsemble two_regime(double first, double second, std::size_t length, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Matrix> out;
  for (int k = 0; k < 3; ++k) {
    Matrix x(2, static_cast<Eigen::Index>(length));
    Vector state(2);
    state << rng.gaussian(), rng.gaussian();
    for (std::size_t t = 0; t < length; ++t) {
      x.col(static_cast<Eigen::Index>(t)) = state;
      state *= (t + 1 < length / 2 ? first : second);
    }
    out.push_back(std::move(x));
  }
  return TrajectoryEnsemble(std::move(out));
}

std::vector<SpectralDecomposition> window_spectra(const TrajectoryEnsemble& ens) {
  std::vector<SpectralDecomposition> out;
  for (const auto& w : window(ens, {100, 100, 0})) out.push_back(dmd_rrr(delay_embed(w, 0)));
  return out;
}

}  // namespace

TEST_CASE("wasserstein examples") {
  const std::vector<Complex> a{{1, 0}, {0.5, 0}};
  CHECK(wasserstein({a}, {a}).distance == 0.0);
  CHECK(wasserstein({a}, {{{0.5, 0}, {1, 0}}}).distance == 0.0);
  CHECK(wasserstein({a}, {{{0.5, 0}, {1, 0}}}).assignment == std::vector<std::size_t>{1, 0});
  const auto cmp = wasserstein({{{0, 0}, {1, 0}}}, {{{0, 1}, {1, 0}}});
  CHECK(cmp.distance == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(cmp.distance == oracle::brute_force_w2({{0, 0}, {1, 0}}, {{0, 1}, {1, 0}}));
  CHECK_THROWS_AS(wasserstein({a}, {{{0, 0}}}), DataError);
  CHECK_THROWS_AS(wasserstein({{}}, {{}}), DataError);
  CHECK_THROWS_AS(wasserstein({{{std::nan(""), 0}}}, {{{0, 0}}}), DataError);
}

TEST_CASE("wasserstein is a metric on equal-size multisets") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.next_u64() % 6;
    const auto a = random_values(n, rng);
    const auto b = random_values(n, rng);
    const auto c = random_values(n, rng);
    const double ab = wasserstein({a}, {b}).distance;
    CHECK(ab == wasserstein({b}, {a}).distance);
    CHECK(wasserstein({a}, {a}).distance <= 1e-12);
    CHECK(wasserstein({a}, {c}).distance <= ab + wasserstein({b}, {c}).distance + 1e-9);
    CHECK(ab > 0.0);
  }
}

TEST_CASE("wasserstein invariances: relabeling and conjugation") {
  Rng rng(32);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.next_u64() % 5;
    auto a = random_values(n, rng);
    auto b = random_values(n, rng);
    const double base = wasserstein({a}, {b}).distance;

    auto pa = a, pb = b;
    for (std::size_t i = n - 1; i > 0; --i) {
      std::swap(pa[i], pa[rng.next_u64() % (i + 1)]);
      std::swap(pb[i], pb[rng.next_u64() % (i + 1)]);
    }
    CHECK(wasserstein({pa}, {pb}).distance == doctest::Approx(base).epsilon(1e-14));

    for (auto& v : a) v = std::conj(v);
    for (auto& v : b) v = std::conj(v);
    CHECK(wasserstein({a}, {b}).distance == base);
  }
}

TEST_CASE("semi-conjugacy subset test") {
  const EigenvalueSet big{{{0.9, 0}, {0.5, 0}, {0.2, 0}}};
  const auto exact = semi_conjugacy(big, {{{0.9, 0}, {0.5, 0}}}, 1e-9);
  CHECK(exact.subset);
  CHECK(exact.max_residual == 0.0);
  CHECK(exact.matched_pairs == std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}, {1, 1}});

  const auto near = semi_conjugacy(big, {{{0.9, 0}, {0.45, 0}}}, 1e-3);
  CHECK_FALSE(near.subset);
  CHECK(near.max_residual == doctest::Approx(0.05).epsilon(1e-12));

  for (const Complex& v : big.values) CHECK(semi_conjugacy(big, {{v}}, 0.0).subset);

  CHECK_THROWS_AS(semi_conjugacy(big, big, 1.0), DataError);
  CHECK_THROWS_AS(semi_conjugacy(big, {{{0.9, 0}}}, -1.0), UsageError);
}

TEST_CASE("shuffle control") {
  const EigenvalueSet same{{{0.9, 0}, {0.5, 0.1}, {0.5, -0.1}}};
  const auto self = shuffle_control(same, same, 50, 4);
  CHECK(self.distance == 0.0);
  REQUIRE(self.shuffle);
  CHECK(self.shuffle->frac_ge == 1.0);
  CHECK(self.shuffle->distances.size() == 50);

  Rng rng(9);
  const EigenvalueSet a{random_values(8, rng)};
  const EigenvalueSet b{random_values(8, rng)};
  const auto first = shuffle_control(a, b, 100, 17);
  const auto second = shuffle_control(a, b, 100, 17);
  CHECK(first.shuffle->distances == second.shuffle->distances);
  CHECK(first.shuffle->frac_ge == second.shuffle->frac_ge);
  CHECK(first.shuffle->frac_ge >= 0.0);
  CHECK(first.shuffle->frac_ge <= 1.0);
  CHECK(shuffle_control(a, b, 100, 18).shuffle->distances != first.shuffle->distances);

  // Shuffles only move each matched pair between sets, so no shuffled
  // distance can exceed the optimum.
  for (double d : first.shuffle->distances) CHECK(d <= first.distance * (1 + 1e-12));

  CHECK_THROWS_AS(shuffle_control(a, b, 0, 1), UsageError);
}

TEST_CASE("every shuffle preserves the union of the two sets") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.next_u64() % 10;
    const EigenvalueSet a{random_values(n, rng)};
    const EigenvalueSet b{random_values(n, rng)};
    const auto match = wasserstein(a, b);
    for (std::size_t s = 0; s < 50; ++s) {
      const ShuffledSets sh = draw_shuffle(a, b, match.assignment, 3, s);
      std::vector<Complex> before(a.values), after(sh.first.values);
      before.insert(before.end(), b.values.begin(), b.values.end());
      after.insert(after.end(), sh.second.values.begin(), sh.second.values.end());
      const auto lex = [](const Complex& x, const Complex& y) {
        return std::pair(x.real(), x.imag()) < std::pair(y.real(), y.imag());
      };
      std::sort(before.begin(), before.end(), lex);
      std::sort(after.begin(), after.end(), lex);
      CHECK(before == after);
    }
  }
}

TEST_CASE("Kolmogorov-Smirnov statistic") {
  const std::vector<double> x{0.1, 0.4, 0.7}, y{0.2, 0.5};
  CHECK(ks_two_sample(x, y).statistic == oracle::brute_force_ks(x, y));
  CHECK(ks_two_sample(x, x).statistic == 0.0);
  CHECK(ks_two_sample(x, x).p_value == 1.0);
  const std::vector<double> zeros{0, 0}, ones{1, 1};
  CHECK(ks_two_sample(zeros, ones).statistic == 1.0);
  CHECK_THROWS_AS(ks_two_sample(x, std::vector<double>{}), DataError);

  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> u(1 + rng.next_u64() % 30), v(1 + rng.next_u64() % 30);
    // Coarse values force ties within and across samples.
    for (double& s : u) s = static_cast<double>(rng.next_u64() % 10);
    for (double& s : v) s = static_cast<double>(rng.next_u64() % 12) * 0.9;
    CHECK(ks_two_sample(u, v).statistic == oracle::brute_force_ks(u, v));
  }
}

TEST_CASE("Kolmogorov survival function") {
  CHECK(kolmogorov_survival(0.0) == 1.0);
  // Reference values of the Kolmogorov distribution (scipy kstwobign).
  CHECK(kolmogorov_survival(0.5) == doctest::Approx(0.9639452436648751).epsilon(1e-9));
  CHECK(kolmogorov_survival(1.18) == doctest::Approx(0.1234538094297657).epsilon(1e-9));
  CHECK(kolmogorov_survival(1.3580986393225507) == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(kolmogorov_survival(1.2238478702170823) == doctest::Approx(0.10).epsilon(1e-6));
  CHECK(kolmogorov_survival(0.8275735551899059) == doctest::Approx(0.50).epsilon(1e-6));
  // The two series agree where they meet.
  CHECK(kolmogorov_survival(1.18 - 1e-12) == doctest::Approx(kolmogorov_survival(1.18)).epsilon(1e-9));
  double prev = 1.0;
  for (double l = 0.05; l < 3.0; l += 0.05) {
    const double s = kolmogorov_survival(l);
    CHECK(s <= prev);
    prev = s;
  }
}

TEST_CASE("window distance matrix: stationary system") {
  const auto spectra = window_spectra(two_regime(0.9, 0.9, 500, 1));
  const DistanceMatrix dm = window_distance_matrix(spectra);
  REQUIRE(dm.distance.rows() == 5);
  for (Eigen::Index i = 0; i < 5; ++i) {
    CHECK(dm.distance(i, i) == 0.0);
    CHECK(dm.log10_distance(i, i) == -16.0);
    for (Eigen::Index j = 0; j < 5; ++j) {
      CHECK(dm.distance(i, j) == dm.distance(j, i));
      CHECK(dm.distance(i, j) <= 1e-6);
    }
  }
  CHECK(dm.labels.front() == "0:99");
}

TEST_CASE("window distance matrix: regime switch gives block structure") {
  const auto spectra = window_spectra(two_regime(0.9, 0.5, 800, 2));
  const DistanceMatrix dm = window_distance_matrix(spectra);
  double within = 0.0, cross = 0.0;
  for (Eigen::Index i = 0; i < 8; ++i) {
    for (Eigen::Index j = 0; j < 8; ++j) {
      if (i == j) continue;
      if ((i < 4) == (j < 4)) within = std::max(within, dm.distance(i, j));
      else cross = std::max(cross, dm.distance(i, j));
    }
  }
  double min_cross = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index j = 4; j < 8; ++j) min_cross = std::min(min_cross, dm.distance(i, j));
  CHECK(min_cross >= 10.0 * within);
  CHECK(cross > 0.0);
}

TEST_CASE("window distance matrix edge cases") {
  const auto spectra = window_spectra(two_regime(0.9, 0.9, 100, 3));
  const DistanceMatrix one = window_distance_matrix(spectra);
  CHECK(one.distance == Matrix::Zero(1, 1));
  CHECK(one.log10_distance(0, 0) == -16.0);

  std::vector<SpectralDecomposition> mixed(2);
  mixed[0].eigenvalues = {{0.5, 0}, {0.4, 0}};
  mixed[1].eigenvalues = {{0.5, 0}};
  try {
    window_distance_matrix(mixed);
    FAIL("expected a mode-count error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("1 (1 modes)") != std::string::npos);
  }
  CHECK_THROWS_AS(window_distance_matrix(std::vector<SpectralDecomposition>{}), DataError);
}
