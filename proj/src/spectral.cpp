#include "kct/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace kct {

void DecompositionConfig::validate() const {
  if (rank < 1) throw UsageError("decomposition rank must be at least 1");
  if (!(svd_rel_tol >= 0.0)) throw UsageError("svd_rel_tol must be non-negative");
  if (residual_tol && !(*residual_tol >= 0.0)) throw UsageError("residual_tol must be non-negative");
}

ReducedSnapshots reduce_snapshots(const SnapshotPair& pair, const DecompositionConfig& cfg) {
  cfg.validate();
  if (pair.z.rows() != pair.z_prime.rows() || pair.z.cols() != pair.z_prime.cols()) {
    throw DataError("snapshot matrices differ in shape");
  }
  if (pair.col_count() < 2) throw DataError("at least two snapshot columns are required");
  if (!pair.z.allFinite() || !pair.z_prime.allFinite()) throw DataError("snapshot matrices contain non-finite values");

  Matrix z = pair.z;
  Matrix zp = pair.z_prime;
  if (z.isZero(0.0)) throw NumericalError("degenerate data: snapshot matrix is identically zero");

  if (cfg.scale_columns) {
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      const double norm = z.col(j).norm();
      if (norm > 0.0) {
        z.col(j) /= norm;
        zp.col(j) /= norm;
      }
    }
  }

  Eigen::JacobiSVD<Matrix> svd(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  std::size_t numerical_rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cfg.svd_rel_tol * sv(0)) ++numerical_rank;
  }
  const std::size_t k = std::min(cfg.rank, numerical_rank);
  if (k == 0) throw NumericalError("rank collapse: no singular value survives the tolerance");

  const auto ki = static_cast<Eigen::Index>(k);
  ReducedSnapshots out;
  out.rank = k;
  out.singular_values = sv;
  out.basis = svd.matrixU().leftCols(ki);
  out.image = zp * svd.matrixV().leftCols(ki) * sv.head(ki).cwiseInverse().asDiagonal();
  out.rayleigh_quotient = out.basis.transpose() * out.image;

  Matrix stacked(z.rows(), 2 * ki);
  stacked << out.basis, out.image;
  Eigen::HouseholderQR<Matrix> qr(stacked);
  const Eigen::Index r_rows = std::min<Eigen::Index>(stacked.rows(), 2 * ki);
  out.r_factor = qr.matrixQR().topRows(r_rows).triangularView<Eigen::Upper>();
  return out;
}

namespace {

// R * [-lambda I; I] restricted to the rows of R.
ComplexMatrix reduced_pencil(const ReducedSnapshots& reduced, Complex lambda) {
  const auto k = static_cast<Eigen::Index>(reduced.rank);
  const Matrix& r = reduced.r_factor;
  return r.rightCols(k).cast<Complex>() - lambda * r.leftCols(k).cast<Complex>();
}

}  // namespace

double pair_residual(const ReducedSnapshots& reduced, Complex lambda, const ComplexVector& w) {
  return (reduced_pencil(reduced, lambda) * w).norm();
}

std::vector<RefinedPair> refine_ritz_pairs(const ReducedSnapshots& reduced,
                                           std::span<const Complex> eigenvalues, Execution exec) {
  std::vector<RefinedPair> out(eigenvalues.size());
  for_each_index(eigenvalues.size(), exec, [&](std::size_t i) {
    const Complex lambda = eigenvalues[i];
    const ComplexMatrix pencil = reduced_pencil(reduced, lambda);
    Eigen::JacobiSVD<ComplexMatrix> svd(pencil, Eigen::ComputeFullV);
    const Eigen::Index last = pencil.cols() - 1;
    RefinedPair p;
    p.eigenvalue = lambda;
    p.coefficients = svd.matrixV().col(last);
    // When the pencil has fewer rows than columns the smallest singular value
    // is an exact zero that JacobiSVD does not report.
    p.residual = pencil.rows() < pencil.cols() ? 0.0 : svd.singularValues()(last);
    out[i] = std::move(p);
  });
  return out;
}

bool spectral_order(const Complex& a, const Complex& b) {
  const double ma = std::abs(a);
  const double mb = std::abs(b);
  if (ma != mb) return ma > mb;
  if (a.real() != b.real()) return a.real() > b.real();
  return a.imag() > b.imag();
}

SpectralDecomposition dmd_rrr(const SnapshotPair& pair, const DecompositionConfig& cfg, Execution exec) {
  const ReducedSnapshots reduced = reduce_snapshots(pair, cfg);

  Eigen::EigenSolver<Matrix> eig(reduced.rayleigh_quotient, false);
  if (eig.info() != Eigen::Success) throw NumericalError("eigenvalue iteration on the Rayleigh quotient did not converge");
  std::vector<Complex> lambdas(eig.eigenvalues().data(), eig.eigenvalues().data() + eig.eigenvalues().size());
  std::sort(lambdas.begin(), lambdas.end(), spectral_order);

  std::vector<RefinedPair> refined = refine_ritz_pairs(reduced, lambdas, exec);
  if (cfg.residual_tol) {
    std::erase_if(refined, [&](const RefinedPair& p) { return p.residual > *cfg.residual_tol; });
    if (refined.empty()) throw NumericalError("every mode exceeds the residual tolerance");
  }

  SpectralDecomposition dec;
  dec.rank = reduced.rank;
  dec.delay = pair.delay_count;
  dec.meta = pair.source_meta;
  const auto read_time = [&](const char* key, std::int64_t fallback) {
    auto it = pair.source_meta.find(key);
    return it == pair.source_meta.end() ? fallback : std::stoll(it->second);
  };
  const std::size_t per_trajectory =
      pair.column_starts.size() > 1 ? pair.column_starts[1] : pair.col_count();
  dec.window = {read_time(kMetaTimeBegin, 0),
                read_time(kMetaTimeEnd, static_cast<std::int64_t>(per_trajectory + pair.delay_count))};

  const auto n_modes = static_cast<Eigen::Index>(refined.size());
  dec.modes.resize(reduced.basis.rows(), n_modes);
  for (Eigen::Index i = 0; i < n_modes; ++i) {
    const RefinedPair& p = refined[static_cast<std::size_t>(i)];
    ComplexVector v = reduced.basis.cast<Complex>() * p.coefficients;
    v.normalize();
    dec.modes.col(i) = v;
    dec.eigenvalues.push_back(p.eigenvalue);
    dec.residuals.push_back(p.residual);
  }

  const Eigen::CompleteOrthogonalDecomposition<ComplexMatrix> lsq(dec.modes);
  std::vector<std::size_t> starts = pair.column_starts;
  if (starts.empty()) starts.push_back(0);
  for (std::size_t start : starts) {
    const ComplexVector x0 = pair.z.col(static_cast<Eigen::Index>(start)).cast<Complex>();
    const ComplexVector a = lsq.solve(x0);
    dec.amplitudes.emplace_back(a.data(), a.data() + a.size());
  }
  return dec;
}

Matrix reconstruct(const SpectralDecomposition& dec, std::size_t steps, std::size_t traj_index) {
  if (traj_index >= dec.amplitudes.size()) {
    throw DataError("trajectory index " + std::to_string(traj_index) + " out of range (" +
                    std::to_string(dec.amplitudes.size()) + " amplitude sets)");
  }
  const auto& amps = dec.amplitudes[traj_index];
  const auto n = static_cast<Eigen::Index>(dec.mode_count());
  ComplexVector coeff(n);
  for (Eigen::Index i = 0; i < n; ++i) coeff(i) = amps[static_cast<std::size_t>(i)];

  Matrix out(dec.modes.rows(), static_cast<Eigen::Index>(steps));
  for (std::size_t t = 0; t < steps; ++t) {
    out.col(static_cast<Eigen::Index>(t)) = (dec.modes * coeff).real();
    for (Eigen::Index i = 0; i < n; ++i) coeff(i) *= dec.eigenvalues[static_cast<std::size_t>(i)];
  }
  return out;
}

CirclePosition classify_eigenvalue(const Complex& lambda, double tol) {
  const double m = std::abs(lambda);
  if (m < 1.0 - tol) return CirclePosition::inside;
  if (m > 1.0 + tol) return CirclePosition::outside;
  return CirclePosition::on;
}

std::vector<CirclePosition> unit_circle_classification(const SpectralDecomposition& dec, double tol) {
  if (!(tol >= 0.0)) throw UsageError("unit circle tolerance must be non-negative");
  std::vector<CirclePosition> out;
  out.reserve(dec.mode_count());
  for (const Complex& l : dec.eigenvalues) out.push_back(classify_eigenvalue(l, tol));
  return out;
}

}  // namespace kct
