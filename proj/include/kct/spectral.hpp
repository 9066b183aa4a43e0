#pragma once

#include "kct/common.hpp"
#include "kct/parallel.hpp"
#include "kct/trajectory.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace kct {

struct DecompositionConfig {
  // Upper bound on the SVD truncation rank.
  std::size_t rank = 10;
  // Singular values below svd_rel_tol * sigma_1 are discarded before the
  // rank cap is applied.
  double svd_rel_tol = 1e-12;
  // Modes whose refined residual exceeds this are dropped. Unset keeps all.
  std::optional<double> residual_tol;
  // Scale snapshot columns of z to unit norm (same scaling on z').
  bool scale_columns = true;

  void validate() const;
};

// Koopman eigenvalues with refined modes, residuals and per-trajectory
// amplitudes. Eigenvalues are sorted by descending magnitude, then descending
// real part, then descending imaginary part; modes, residuals and amplitude
// entries follow the same order.
struct SpectralDecomposition {
  std::vector<Complex> eigenvalues;
  // embed_dim x N, unit 2-norm columns.
  ComplexMatrix modes;
  std::vector<double> residuals;
  // amplitudes[j][i]: coefficient of mode i in the first embedded snapshot of
  // source trajectory j.
  std::vector<std::vector<Complex>> amplitudes;
  // Truncation rank actually used.
  std::size_t rank = 0;
  std::size_t delay = 0;
  // Absolute iteration interval [t_begin, t_end] of the source data.
  std::array<std::int64_t, 2> window{0, 0};
  Meta meta;

  std::size_t mode_count() const { return eigenvalues.size(); }
  std::size_t embed_dim() const { return static_cast<std::size_t>(modes.rows()); }

  friend bool operator==(const SpectralDecomposition&, const SpectralDecomposition&) = default;
};

// Rank-k projection of the snapshot pair. With z = U S V^T (after optional
// column scaling), basis = U_k, image = z' V_k S_k^{-1} and
// rayleigh_quotient = U_k^T image. r_factor is the triangular factor of the
// QR decomposition of [basis, image]; residual norms are evaluated on it.
struct ReducedSnapshots {
  Matrix basis;
  Matrix image;
  Matrix rayleigh_quotient;
  Matrix r_factor;
  Vector singular_values;
  std::size_t rank = 0;
};

ReducedSnapshots reduce_snapshots(const SnapshotPair& pair, const DecompositionConfig& cfg);

struct RefinedPair {
  Complex eigenvalue;
  // Unit vector w in the reduced basis; the mode is basis * w.
  ComplexVector coefficients;
  double residual = 0.0;
};

// For each eigenvalue, the unit w minimizing ||(image - lambda * basis) w||
// and that minimum. Iterations are independent.
std::vector<RefinedPair> refine_ritz_pairs(const ReducedSnapshots& reduced,
                                           std::span<const Complex> eigenvalues,
                                           Execution exec = Execution::parallel);

// ||(image - lambda * basis) w|| for an arbitrary w.
double pair_residual(const ReducedSnapshots& reduced, Complex lambda, const ComplexVector& w);

// Total order used for every returned spectrum.
bool spectral_order(const Complex& a, const Complex& b);

SpectralDecomposition dmd_rrr(const SnapshotPair& pair, const DecompositionConfig& cfg = {},
                              Execution exec = Execution::parallel);

// Real part of sum_i a_i * lambda_i^t * v_i for t = 0..steps-1, using the
// amplitudes of trajectory traj_index. Result is embed_dim x steps.
Matrix reconstruct(const SpectralDecomposition& dec, std::size_t steps, std::size_t traj_index);

enum class CirclePosition { inside, on, outside };

std::vector<CirclePosition> unit_circle_classification(const SpectralDecomposition& dec, double tol);
CirclePosition classify_eigenvalue(const Complex& lambda, double tol);

}  // namespace kct
