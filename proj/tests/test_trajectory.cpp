#include "kct/spectral.hpp"
#include "kct/trajectory.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <Eigen/SVD>

#include <numeric>

using namespace kct;

namespace {

TrajectoryEnsemble random_ensemble(std::size_t count, std::size_t dim, std::size_t length, Rng& rng) {
  std::vector<Matrix> trajs;
  for (std::size_t k = 0; k < count; ++k) {
    Matrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(length));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.gaussian();
    trajs.push_back(std::move(m));
  }
  return TrajectoryEnsemble(std::move(trajs));
}

}  // namespace

TEST_CASE("ensemble construction enforces shape and finiteness") {
  CHECK_THROWS_AS(TrajectoryEnsemble({}), DataError);
  CHECK_THROWS_AS(TrajectoryEnsemble({Matrix::Zero(2, 3), Matrix::Zero(2, 4)}), DataError);
  Matrix bad = Matrix::Zero(2, 3);
  bad(1, 1) = std::nan("");
  CHECK_THROWS_AS(TrajectoryEnsemble({bad}), DataError);
  CHECK_THROWS_AS(TrajectoryEnsemble({Matrix::Zero(2, 3)}, {"a", "b"}), DataError);
}

TEST_CASE("delay_embed reproduces the 2 x 100 x 25 layout with four delays") {
  std::vector<Matrix> trajs(25, Matrix::Ones(2, 100));
  const SnapshotPair pair = delay_embed(TrajectoryEnsemble(trajs), 4);
  CHECK(pair.z.rows() == 10);
  CHECK(pair.z.cols() == 2375);
  CHECK(pair.z_prime.rows() == 10);
  CHECK(pair.z_prime.cols() == 2375);
  CHECK(pair.embed_dim() == 10);
}

TEST_CASE("delay_embed without delays pairs consecutive snapshots") {
  Matrix x(3, 8);
  for (Eigen::Index c = 0; c < 8; ++c) x.col(c) = Vector::Constant(3, static_cast<double>(c));
  const SnapshotPair pair = delay_embed(TrajectoryEnsemble({x}), 0);
  CHECK(pair.z.rows() == 3);
  CHECK(pair.z.cols() == 7);
  CHECK(pair.z == x.leftCols(7));
  CHECK(pair.z_prime == x.rightCols(7));
}

TEST_CASE("delay_embed hand-enumerated two-trajectory example") {
  Matrix a(1, 5), b(1, 5);
  a << 1, 2, 3, 4, 5;
  b << 10, 20, 30, 40, 50;
  const SnapshotPair pair = delay_embed(TrajectoryEnsemble({a, b}), 1);
  Matrix z(2, 6), zp(2, 6);
  z << 1, 2, 3, 10, 20, 30,  //
      2, 3, 4, 20, 30, 40;
  zp << 2, 3, 4, 20, 30, 40,  //
      3, 4, 5, 30, 40, 50;
  CHECK(pair.z == z);
  CHECK(pair.z_prime == zp);
  CHECK(pair.column_starts == std::vector<std::size_t>{0, 3});
}

TEST_CASE("delay_embed rejects trajectories that are too short") {
  TrajectoryEnsemble ens({Matrix::Ones(2, 5)}, {"run-7"});
  CHECK_NOTHROW(delay_embed(ens, 3));
  try {
    delay_embed(ens, 4);
    FAIL("expected an embedding-length error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("run-7") != std::string::npos);
  }
}

TEST_CASE("delay_embed column count and successor property on random shapes") {
  Rng rng(3);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t count = 1 + rng.next_u64() % 4;
    const std::size_t dim = 1 + rng.next_u64() % 4;
    const std::size_t length = 3 + rng.next_u64() % 20;
    const std::size_t d = rng.next_u64() % (length - 1);
    const TrajectoryEnsemble ens = random_ensemble(count, dim, length, rng);
    const SnapshotPair pair = delay_embed(ens, d);
    REQUIRE(pair.col_count() == count * (length - d - 1));
    REQUIRE(pair.embed_dim() == dim * (d + 1));
    for (std::size_t k = 0; k < count; ++k) {
      for (std::size_t t = 0; t + d + 1 < length; ++t) {
        const auto col = static_cast<Eigen::Index>(pair.column_starts[k] + t);
        for (std::size_t lag = 0; lag <= d; ++lag) {
          const auto rows = Eigen::seqN(static_cast<Eigen::Index>(lag * dim), static_cast<Eigen::Index>(dim));
          CHECK(pair.z(rows, col) == ens.trajectory(k).col(static_cast<Eigen::Index>(t + lag)));
          CHECK(pair.z_prime(rows, col) == ens.trajectory(k).col(static_cast<Eigen::Index>(t + lag + 1)));
        }
      }
    }
  }
}

TEST_CASE("window enumerates every fitting interval") {
  const TrajectoryEnsemble ens({Matrix::Zero(1, 800)});
  const auto windows = window(ens, {100, 100, 0});
  REQUIRE(windows.size() == 8);
  CHECK(interval_label(windows.front()) == "0:99");
  CHECK(interval_label(windows[1]) == "100:199");
  CHECK(interval_label(windows.back()) == "700:799");

  CHECK(window(TrajectoryEnsemble({Matrix::Zero(1, 100)}), {100, 100, 0}).size() == 1);

  const auto overlapping = window(TrajectoryEnsemble({Matrix::Zero(1, 250)}), {100, 50, 0});
  REQUIRE(overlapping.size() == 4);
  const std::vector<std::string> expected{"0:99", "50:149", "100:199", "150:249"};
  for (std::size_t i = 0; i < 4; ++i) CHECK(interval_label(overlapping[i]) == expected[i]);

  CHECK_THROWS_AS(window(ens, {900, 100, 0}), DataError);
  CHECK_THROWS_AS(window(ens, {100, 100, 750}), DataError);
}

TEST_CASE("windows with stride equal to length tile the covered range") {
  Rng rng(5);
  const TrajectoryEnsemble ens = random_ensemble(2, 3, 730, rng);
  const auto windows = window(ens, {100, 100, 30});
  REQUIRE(windows.size() == 7);
  for (std::size_t k = 0; k < ens.size(); ++k) {
    Matrix tiled(3, 700);
    for (std::size_t w = 0; w < windows.size(); ++w) {
      tiled.middleCols(static_cast<Eigen::Index>(100 * w), 100) = windows[w].trajectory(k);
    }
    CHECK(tiled == ens.trajectory(k).middleCols(30, 700));
  }
  CHECK(windows.back().meta().at(kMetaTimeEnd) == "729");
}

TEST_CASE("pca on rank-1 data explains all variance with one component") {
  Matrix x(3, 40);
  for (Eigen::Index t = 0; t < 40; ++t) x.col(t) = Vector::LinSpaced(3, 1.0, 3.0) * (0.1 * t) + Vector::Ones(3);
  const PcaResult pca = pca_reduce(TrajectoryEnsemble({x}), 1);
  REQUIRE(pca.explained_variance.size() == 1);
  CHECK(pca.explained_variance[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(pca_reduce(TrajectoryEnsemble({x}), 2), DataError);
}

TEST_CASE("pca at full dimension is an orthogonal change of basis") {
  Rng rng(8);
  Matrix x(3, 60);
  for (Eigen::Index t = 0; t < 60; ++t) x.col(t) << 3.0 * rng.gaussian(), 1.0 * rng.gaussian(), 0.2 * rng.gaussian();
  const TrajectoryEnsemble ens({x});
  const PcaResult pca = pca_reduce(ens, 3);
  CHECK((pca.basis.transpose() * pca.basis - Matrix::Identity(3, 3)).norm() < 1e-12);
  const Matrix lifted = (pca.basis * pca.reduced.trajectory(0)).colwise() + pca.mean;
  CHECK((lifted - x).norm() < 1e-12 * x.norm());
  double total = 0.0;
  for (double v : pca.explained_variance) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pca reconstruction error matches the discarded singular values") {
  Rng rng(21);
  const TrajectoryEnsemble ens = random_ensemble(3, 50, 40, rng);
  const PcaResult pca = pca_reduce(ens, 10);

  // Oracle: full SVD of the stacked, centered data.
  Matrix data(50, 120);
  for (std::size_t k = 0; k < 3; ++k) data.middleCols(static_cast<Eigen::Index>(40 * k), 40) = ens.trajectory(k);
  const Vector mean = data.rowwise().mean();
  data.colwise() -= mean;
  Eigen::JacobiSVD<Matrix> svd(data, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector s = svd.singularValues();
  const double discarded = std::sqrt(s.tail(s.size() - 10).squaredNorm());
  const Matrix best = svd.matrixU().leftCols(10) * s.head(10).asDiagonal() * svd.matrixV().leftCols(10).transpose();

  Matrix projected(50, 120);
  for (std::size_t k = 0; k < 3; ++k) {
    projected.middleCols(static_cast<Eigen::Index>(40 * k), 40) = pca.basis * pca.reduced.trajectory(k);
  }
  CHECK((data - projected).norm() == doctest::Approx(discarded).epsilon(1e-10));
  CHECK((data - best).norm() == doctest::Approx(discarded).epsilon(1e-10));

  for (std::size_t i = 1; i < pca.explained_variance.size(); ++i) {
    CHECK(pca.explained_variance[i] <= pca.explained_variance[i - 1]);
  }
  const double total = std::accumulate(pca.explained_variance.begin(), pca.explained_variance.end(), 0.0);
  CHECK(total <= 1.0);
  CHECK(pca.reduced.state_dim() == 10);
}

TEST_CASE("permute_state") {
  Rng rng(4);
  const TrajectoryEnsemble ens = random_ensemble(2, 4, 10, rng);
  const std::vector<std::size_t> identity{0, 1, 2, 3};
  CHECK(permute_state(ens, identity).trajectories() == ens.trajectories());

  const std::vector<std::size_t> swap{1, 0, 2, 3};
  const TrajectoryEnsemble once = permute_state(ens, swap);
  CHECK(once.trajectory(0).row(0) == ens.trajectory(0).row(1));
  CHECK(once.meta().at("permutation") == "1,0,2,3");
  CHECK(permute_state(once, swap).trajectories() == ens.trajectories());

  const std::vector<std::size_t> repeated{0, 0, 1, 2};
  const std::vector<std::size_t> short_perm{0, 1, 2};
  const std::vector<std::size_t> out_of_range{0, 1, 2, 4};
  CHECK_THROWS_AS(permute_state(ens, repeated), UsageError);
  CHECK_THROWS_AS(permute_state(ens, short_perm), UsageError);
  CHECK_THROWS_AS(permute_state(ens, out_of_range), UsageError);
}

TEST_CASE("permuting state variables leaves the eigenvalues unchanged") {
  Rng rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    const auto sys = oracle::random_stable_system(4, rng);
    const TrajectoryEnsemble ens = oracle::simulate_linear(sys.a, 5, 30, rng);
    std::vector<std::size_t> sigma{0, 1, 2, 3};
    for (std::size_t i = 3; i > 0; --i) std::swap(sigma[i], sigma[rng.next_u64() % (i + 1)]);
    const auto base = dmd_rrr(delay_embed(ens, 1)).eigenvalues;
    const auto permuted = dmd_rrr(delay_embed(permute_state(ens, sigma), 1)).eigenvalues;
    REQUIRE(base.size() == permuted.size());
    for (std::size_t i = 0; i < base.size(); ++i) CHECK(std::abs(base[i] - permuted[i]) < 1e-8);
  }
}

TEST_CASE("perturb_multipliers") {
  CHECK(perturb_multipliers(5, 0.1, 9) == perturb_multipliers(5, 0.1, 9));
  CHECK(perturb_multipliers(5, 0.1, 9) != perturb_multipliers(5, 0.1, 10));
  for (double m : perturb_multipliers(100, 1e-14, 1)) CHECK(m == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(perturb_multipliers(3, 0.0, 1), UsageError);

  // Law of large numbers: mean within 1 +- 1e-4, std within 0.001 +- 5%.
  const auto draws = perturb_multipliers(100000, 0.001, 2024);
  const double mean = std::accumulate(draws.begin(), draws.end(), 0.0) / static_cast<double>(draws.size());
  double var = 0.0;
  for (double d : draws) var += (d - mean) * (d - mean);
  const double sd = std::sqrt(var / static_cast<double>(draws.size() - 1));
  CHECK(std::abs(mean - 1.0) <= 1e-4);
  CHECK(std::abs(sd - 0.001) <= 0.05 * 0.001);
}
