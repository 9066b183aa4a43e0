#include "kct/trajectory.hpp"

#include "kct/rng.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace kct {

TrajectoryEnsemble::TrajectoryEnsemble(std::vector<Matrix> trajectories,
                                       std::vector<std::string> labels, Meta meta)
    : trajectories_(std::move(trajectories)), labels_(std::move(labels)), meta_(std::move(meta)) {
  if (trajectories_.empty()) throw DataError("trajectory ensemble must hold at least one trajectory");
  state_dim_ = static_cast<std::size_t>(trajectories_.front().rows());
  length_ = static_cast<std::size_t>(trajectories_.front().cols());
  if (state_dim_ == 0 || length_ == 0) throw DataError("trajectories must have positive state_dim and length");
  for (std::size_t i = 0; i < trajectories_.size(); ++i) {
    const Matrix& m = trajectories_[i];
    if (static_cast<std::size_t>(m.rows()) != state_dim_ ||
        static_cast<std::size_t>(m.cols()) != length_) {
      throw DataError("trajectory " + std::to_string(i) + " has shape " + std::to_string(m.rows()) +
                      "x" + std::to_string(m.cols()) + ", expected " + std::to_string(state_dim_) +
                      "x" + std::to_string(length_));
    }
    if (!m.allFinite()) throw DataError("trajectory " + std::to_string(i) + " contains non-finite values");
  }
  if (!labels_.empty() && labels_.size() != trajectories_.size()) {
    throw DataError("label count " + std::to_string(labels_.size()) + " does not match trajectory count " +
                    std::to_string(trajectories_.size()));
  }
}

TrajectoryEnsemble TrajectoryEnsemble::with_meta(const std::string& key, std::string value) const {
  TrajectoryEnsemble copy = *this;
  copy.meta_[key] = std::move(value);
  return copy;
}

SnapshotPair delay_embed(const TrajectoryEnsemble& ens, std::size_t delays) {
  const std::size_t n = ens.state_dim();
  const std::size_t len = ens.length();
  for (std::size_t i = 0; i < ens.size(); ++i) {
    if (len < delays + 2) {
      const std::string name = ens.labels().empty() ? std::to_string(i) : ens.labels()[i];
      throw DataError("trajectory '" + name + "' has length " + std::to_string(len) +
                      ", too short for " + std::to_string(delays) + " delays (needs at least " +
                      std::to_string(delays + 2) + ")");
    }
  }
  const std::size_t embed_dim = n * (delays + 1);
  const std::size_t per_traj = len - delays - 1;
  const auto rows = static_cast<Eigen::Index>(embed_dim);
  const auto cols = static_cast<Eigen::Index>(per_traj * ens.size());

  SnapshotPair pair;
  pair.z.resize(rows, cols);
  pair.z_prime.resize(rows, cols);
  pair.delay_count = delays;
  pair.column_starts.reserve(ens.size());

  const auto block = static_cast<Eigen::Index>(n);
  const auto count = static_cast<Eigen::Index>(per_traj);
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const Matrix& x = ens.trajectory(i);
    const auto col0 = static_cast<Eigen::Index>(i * per_traj);
    pair.column_starts.push_back(i * per_traj);
    for (std::size_t lag = 0; lag <= delays; ++lag) {
      const auto lag_i = static_cast<Eigen::Index>(lag);
      pair.z.block(lag_i * block, col0, block, count) = x.middleCols(lag_i, count);
      pair.z_prime.block(lag_i * block, col0, block, count) = x.middleCols(lag_i + 1, count);
    }
  }

  pair.source_meta = ens.meta();
  pair.source_meta.try_emplace(kMetaTimeBegin, "0");
  pair.source_meta.try_emplace(kMetaTimeEnd, std::to_string(len - 1));
  pair.source_meta["delays"] = std::to_string(delays);
  return pair;
}

std::vector<TrajectoryEnsemble> window(const TrajectoryEnsemble& ens, const WindowSpec& spec) {
  if (spec.window_len == 0 || spec.stride == 0) throw UsageError("window length and stride must be positive");
  if (spec.start + spec.window_len > ens.length()) {
    throw DataError("no window fits: start " + std::to_string(spec.start) + " + window " +
                    std::to_string(spec.window_len) + " exceeds length " + std::to_string(ens.length()));
  }
  // Windows of an already-windowed ensemble stay in absolute iterations.
  std::size_t offset = 0;
  if (auto it = ens.meta().find(kMetaTimeBegin); it != ens.meta().end()) offset = std::stoull(it->second);

  std::vector<TrajectoryEnsemble> out;
  for (std::size_t begin = spec.start; begin + spec.window_len <= ens.length(); begin += spec.stride) {
    std::vector<Matrix> parts;
    parts.reserve(ens.size());
    for (const Matrix& x : ens.trajectories()) {
      parts.emplace_back(x.middleCols(static_cast<Eigen::Index>(begin),
                                      static_cast<Eigen::Index>(spec.window_len)));
    }
    Meta meta = ens.meta();
    meta[kMetaTimeBegin] = std::to_string(offset + begin);
    meta[kMetaTimeEnd] = std::to_string(offset + begin + spec.window_len - 1);
    out.emplace_back(std::move(parts), ens.labels(), std::move(meta));
  }
  return out;
}

std::string interval_label(const TrajectoryEnsemble& ens) {
  const auto& meta = ens.meta();
  auto b = meta.find(kMetaTimeBegin);
  auto e = meta.find(kMetaTimeEnd);
  if (b == meta.end() || e == meta.end()) return "0:" + std::to_string(ens.length() - 1);
  return b->second + ":" + e->second;
}

PcaResult pca_reduce(const TrajectoryEnsemble& ens, std::size_t components) {
  const std::size_t n = ens.state_dim();
  const std::size_t samples = ens.length() * ens.size();
  if (components == 0) throw UsageError("number of principal components must be positive");
  if (components > std::min(n, samples)) {
    throw DataError("cannot keep " + std::to_string(components) + " components: attainable rank is at most " +
                    std::to_string(std::min(n, samples)));
  }

  Matrix data(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(samples));
  for (std::size_t i = 0; i < ens.size(); ++i) {
    data.middleCols(static_cast<Eigen::Index>(i * ens.length()), static_cast<Eigen::Index>(ens.length())) =
        ens.trajectory(i);
  }
  const Vector mean = data.rowwise().mean();
  data.colwise() -= mean;

  Eigen::BDCSVD<Matrix> svd(data, Eigen::ComputeThinU);
  const Vector& sv = svd.singularValues();
  const double top = sv.size() > 0 ? sv(0) : 0.0;
  std::size_t attainable = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > 1e-12 * top) ++attainable;
  }
  if (components > attainable) {
    throw DataError("cannot keep " + std::to_string(components) +
                    " components: attainable rank of the centered data is " + std::to_string(attainable));
  }

  const auto k = static_cast<Eigen::Index>(components);
  Matrix basis = svd.matrixU().leftCols(k);
  // Sign convention: largest-magnitude loading of each direction is positive.
  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::Index arg = 0;
    basis.col(c).cwiseAbs().maxCoeff(&arg);
    if (basis(arg, c) < 0.0) basis.col(c) *= -1.0;
  }

  const double total = sv.squaredNorm();
  std::vector<double> explained(components);
  for (std::size_t c = 0; c < components; ++c) {
    const double s = sv(static_cast<Eigen::Index>(c));
    explained[c] = s * s / total;
  }

  std::vector<Matrix> reduced;
  reduced.reserve(ens.size());
  for (const Matrix& x : ens.trajectories()) {
    reduced.emplace_back(basis.transpose() * (x.colwise() - mean));
  }
  Meta meta = ens.meta();
  meta["pca_components"] = std::to_string(components);
  meta["pca_source_dim"] = std::to_string(n);
  return {TrajectoryEnsemble(std::move(reduced), ens.labels(), std::move(meta)), std::move(basis), mean,
          std::move(explained)};
}

TrajectoryEnsemble permute_state(const TrajectoryEnsemble& ens, std::span<const std::size_t> sigma) {
  const std::size_t n = ens.state_dim();
  if (sigma.size() != n) {
    throw UsageError("permutation has " + std::to_string(sigma.size()) + " entries, state_dim is " +
                     std::to_string(n));
  }
  std::vector<bool> seen(n, false);
  for (std::size_t v : sigma) {
    if (v >= n || seen[v]) throw UsageError("invalid permutation: entry " + std::to_string(v));
    seen[v] = true;
  }
  std::vector<Matrix> out;
  out.reserve(ens.size());
  for (const Matrix& x : ens.trajectories()) {
    Matrix y(x.rows(), x.cols());
    for (std::size_t i = 0; i < n; ++i) {
      y.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(sigma[i]));
    }
    out.push_back(std::move(y));
  }
  std::string text;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) text += ',';
    text += std::to_string(sigma[i]);
  }
  Meta meta = ens.meta();
  meta["permutation"] = text;
  return TrajectoryEnsemble(std::move(out), ens.labels(), std::move(meta));
}

std::vector<double> perturb_multipliers(std::size_t count, double eps, std::uint64_t seed) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw UsageError("perturbation scale must be positive and finite");
  Rng rng(seed);
  std::vector<double> out(count);
  for (double& m : out) m = 1.0 + eps * rng.gaussian();
  return out;
}

}  // namespace kct
