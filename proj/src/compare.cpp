#include "kct/compare.hpp"

#include "kct/assignment.hpp"
#include "kct/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace kct {

void EigenvalueSet::validate() const {
  const std::string name = label.empty() ? std::string("eigenvalue set") : "eigenvalue set '" + label + "'";
  if (values.empty()) throw DataError(name + " is empty");
  for (const Complex& v : values) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw DataError(name + " contains non-finite values");
  }
}

EigenvalueSet EigenvalueSet::from(const SpectralDecomposition& dec, std::string label) {
  return EigenvalueSet{dec.eigenvalues, std::move(label), dec.meta};
}

Matrix squared_distance_matrix(std::span<const Complex> a, std::span<const Complex> b) {
  Matrix cost(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::norm(a[i] - b[j]);
    }
  }
  return cost;
}

SpectrumComparison wasserstein(const EigenvalueSet& a, const EigenvalueSet& b) {
  a.validate();
  b.validate();
  if (a.size() != b.size()) {
    throw DataError("Wasserstein distance needs equal cardinalities (" + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()) + "); use semi_conjugacy for subset tests");
  }
  const Matrix cost = squared_distance_matrix(a.values, b.values);
  const Assignment match = solve_assignment(cost);
  // Summing the matched costs in sorted order makes the distance independent
  // of argument order bit for bit.
  std::vector<double> terms;
  terms.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    terms.push_back(cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(match.column_of_row[i])));
  }
  std::sort(terms.begin(), terms.end());
  double total = 0.0;
  for (double t : terms) total += t;
  SpectrumComparison out;
  out.distance = std::sqrt(total / static_cast<double>(a.size()));
  out.assignment = match.column_of_row;
  if (!a.label.empty()) out.meta["first"] = a.label;
  if (!b.label.empty()) out.meta["second"] = b.label;
  return out;
}

SemiConjugacyResult semi_conjugacy(const EigenvalueSet& big, const EigenvalueSet& small, double tol) {
  big.validate();
  small.validate();
  if (!(tol >= 0.0)) throw UsageError("subset tolerance must be non-negative");
  if (small.size() >= big.size()) {
    throw DataError("semi-conjugacy needs the smaller set strictly smaller (" + std::to_string(small.size()) +
                    " vs " + std::to_string(big.size()) + ")");
  }
  const Assignment match = solve_assignment(squared_distance_matrix(small.values, big.values));
  SemiConjugacyResult out;
  for (std::size_t i = 0; i < small.size(); ++i) {
    const std::size_t j = match.column_of_row[i];
    out.matched_pairs.emplace_back(i, j);
    out.max_residual = std::max(out.max_residual, std::abs(small.values[i] - big.values[j]));
  }
  out.subset = out.max_residual <= tol;
  return out;
}

namespace {

// Multiset equality of a ∪ b and the shuffled sets.
bool preserves_union(const EigenvalueSet& a, const EigenvalueSet& b, const ShuffledSets& s) {
  const auto less = [](const Complex& x, const Complex& y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  };
  std::vector<Complex> before(a.values);
  before.insert(before.end(), b.values.begin(), b.values.end());
  std::vector<Complex> after(s.first.values);
  after.insert(after.end(), s.second.values.begin(), s.second.values.end());
  std::sort(before.begin(), before.end(), less);
  std::sort(after.begin(), after.end(), less);
  return before == after;
}

}  // namespace

ShuffledSets draw_shuffle(const EigenvalueSet& a, const EigenvalueSet& b,
                          std::span<const std::size_t> assignment, std::uint64_t seed, std::size_t index) {
  if (a.size() != b.size() || assignment.size() != a.size()) {
    throw DataError("shuffle needs equal-size sets and a full assignment");
  }
  Rng rng = Rng::stream(seed, index);
  ShuffledSets out{EigenvalueSet{{}, a.label, {}}, EigenvalueSet{{}, b.label, {}}};
  out.first.values.reserve(a.size());
  out.second.values.reserve(b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Complex& x = a.values[i];
    const Complex& y = b.values.at(assignment[i]);
    if (rng.coin()) {
      out.first.values.push_back(x);
      out.second.values.push_back(y);
    } else {
      out.first.values.push_back(y);
      out.second.values.push_back(x);
    }
  }
  if (!preserves_union(a, b, out)) throw std::logic_error("shuffle changed the union of the two sets");
  return out;
}

SpectrumComparison shuffle_control(const EigenvalueSet& a, const EigenvalueSet& b, std::size_t n_shuff,
                                   std::uint64_t seed, Execution exec) {
  if (n_shuff < 1) throw UsageError("at least one shuffle is required");
  SpectrumComparison out = wasserstein(a, b);

  ShuffleRecord record;
  record.n_shuff = n_shuff;
  record.seed = seed;
  record.distances.assign(n_shuff, 0.0);
  for_each_index(n_shuff, exec, [&](std::size_t s) {
    const ShuffledSets shuffled = draw_shuffle(a, b, out.assignment, seed, s);
    record.distances[s] = wasserstein(shuffled.first, shuffled.second).distance;
  });
  const auto ge = std::count_if(record.distances.begin(), record.distances.end(),
                                [&](double d) { return d >= out.distance; });
  record.frac_ge = static_cast<double>(ge) / static_cast<double>(n_shuff);
  out.shuffle = std::move(record);
  return out;
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // P(K <= lambda) = sqrt(2 pi) / lambda * sum exp(-(2k-1)^2 pi^2 / (8 lambda^2))
    const double w = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double cdf = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double odd = 2.0 * k - 1.0;
      cdf += std::exp(-odd * odd * w);
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  // 2 * sum (-1)^(k-1) exp(-2 k^2 lambda^2)
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1) ? term : -term;
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw DataError("Kolmogorov-Smirnov test needs two non-empty samples");
  for (double v : x) {
    if (!std::isfinite(v)) throw DataError("Kolmogorov-Smirnov sample contains non-finite values");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw DataError("Kolmogorov-Smirnov sample contains non-finite values");
  }
  std::vector<double> xs(x.begin(), x.end());
  std::vector<double> ys(y.begin(), y.end());
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const double nx = static_cast<double>(xs.size());
  const double ny = static_cast<double>(ys.size());

  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < xs.size() && j < ys.size()) {
    // Advance past every sample equal to the next threshold in both lists.
    const double t = std::min(xs[i], ys[j]);
    while (i < xs.size() && xs[i] == t) ++i;
    while (j < ys.size() && ys[j] == t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  // Once either list is exhausted the gap can only shrink toward zero.

  KsResult out;
  out.statistic = d;
  const double n_eff = nx * ny / (nx + ny);
  out.p_value = kolmogorov_survival(std::sqrt(n_eff) * d);
  return out;
}

Matrix clamped_log10(const Matrix& m) {
  return m.unaryExpr([](double v) { return std::log10(std::max(v, kLogFloor)); });
}

DistanceMatrix window_distance_matrix(std::span<const SpectralDecomposition> decompositions, Execution exec) {
  if (decompositions.empty()) throw DataError("no decompositions to compare");
  const std::size_t n_modes = decompositions.front().mode_count();
  std::string offenders;
  for (std::size_t i = 0; i < decompositions.size(); ++i) {
    if (decompositions[i].mode_count() != n_modes) {
      offenders += (offenders.empty() ? "" : ", ") + std::to_string(i) + " (" +
                   std::to_string(decompositions[i].mode_count()) + " modes)";
    }
  }
  if (!offenders.empty()) {
    throw DataError("window spectra differ in mode count; expected " + std::to_string(n_modes) +
                    ", offenders: " + offenders);
  }

  const std::size_t n = decompositions.size();
  DistanceMatrix out;
  out.distance = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (const auto& dec : decompositions) {
    out.labels.push_back(std::to_string(dec.window[0]) + ":" + std::to_string(dec.window[1]));
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  std::vector<double> values(pairs.size());
  for_each_index(pairs.size(), exec, [&](std::size_t p) {
    const auto [i, j] = pairs[p];
    values[p] = wasserstein(EigenvalueSet{decompositions[i].eigenvalues, {}, {}},
                            EigenvalueSet{decompositions[j].eigenvalues, {}, {}})
                    .distance;
  });
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [i, j] = pairs[p];
    out.distance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[p];
    out.distance(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = values[p];
  }
  out.log10_distance = clamped_log10(out.distance);
  return out;
}

}  // namespace kct
