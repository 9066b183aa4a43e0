#pragma once

#include "kct/common.hpp"
#include "kct/parallel.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace kct {

// A set of equal-length multivariate time series. Each trajectory is stored
// as a state_dim x length matrix (column t is the state at time t).
// Immutable after construction; the constructor enforces shape agreement and
// finiteness.
class TrajectoryEnsemble {
 public:
  explicit TrajectoryEnsemble(std::vector<Matrix> trajectories,
                              std::vector<std::string> labels = {},
                              Meta meta = {});

  std::size_t state_dim() const { return state_dim_; }
  std::size_t length() const { return length_; }
  std::size_t size() const { return trajectories_.size(); }

  const Matrix& trajectory(std::size_t i) const { return trajectories_.at(i); }
  const std::vector<Matrix>& trajectories() const { return trajectories_; }
  // Empty, or one label per trajectory.
  const std::vector<std::string>& labels() const { return labels_; }
  const Meta& meta() const { return meta_; }

  TrajectoryEnsemble with_meta(const std::string& key, std::string value) const;

  friend bool operator==(const TrajectoryEnsemble&, const TrajectoryEnsemble&) = default;

 private:
  std::vector<Matrix> trajectories_;
  std::vector<std::string> labels_;
  Meta meta_;
  std::size_t state_dim_ = 0;
  std::size_t length_ = 0;
};

// Meta keys carrying the absolute iteration interval [t_begin, t_end] covered
// by an ensemble. Set by window(); read back by the decomposition.
inline constexpr const char* kMetaTimeBegin = "t_begin";
inline constexpr const char* kMetaTimeEnd = "t_end";

// Snapshot matrices for the one-step Koopman fit. Column j of z_prime is the
// successor of column j of z within the same source trajectory.
struct SnapshotPair {
  Matrix z;
  Matrix z_prime;
  std::size_t delay_count = 0;
  // First column belonging to each source trajectory, in ensemble order.
  std::vector<std::size_t> column_starts;
  Meta source_meta;

  std::size_t embed_dim() const { return static_cast<std::size_t>(z.rows()); }
  std::size_t col_count() const { return static_cast<std::size_t>(z.cols()); }
};

// Time-delay embedding with `delays` additional lagged copies. Embedded point
// at time t is [x(t); x(t+1); ...; x(t+delays)], so each trajectory of length
// L contributes L - delays - 1 snapshot columns.
SnapshotPair delay_embed(const TrajectoryEnsemble& ens, std::size_t delays);

struct WindowSpec {
  std::size_t window_len = 100;
  std::size_t stride = 100;
  std::size_t start = 0;
};

// All windows [start + k*stride, start + k*stride + window_len) that fit inside
// the ensemble. Each result records its absolute interval in meta.
std::vector<TrajectoryEnsemble> window(const TrajectoryEnsemble& ens, const WindowSpec& spec);

// "t1:t2" label for a windowed ensemble (inclusive interval).
std::string interval_label(const TrajectoryEnsemble& ens);

struct PcaResult {
  TrajectoryEnsemble reduced;
  // state_dim x k, orthonormal columns (principal directions).
  Matrix basis;
  // Per-variable mean removed before projection.
  Vector mean;
  std::vector<double> explained_variance;
};

// Projects every trajectory onto the top-k principal directions of the
// globally centered data (all time points of all trajectories).
PcaResult pca_reduce(const TrajectoryEnsemble& ens, std::size_t components);

// Reorders state variables: row i of the result is row sigma[i] of the input.
// sigma is a 0-based permutation of {0, ..., state_dim - 1}.
TrajectoryEnsemble permute_state(const TrajectoryEnsemble& ens,
                                 std::span<const std::size_t> sigma);

// 1 + eps * g with g i.i.d. standard normal, for building perturbed
// initializations W0 * (1 + eps * N(0, 1)) in external trainers.
std::vector<double> perturb_multipliers(std::size_t count, double eps, std::uint64_t seed);

}  // namespace kct
