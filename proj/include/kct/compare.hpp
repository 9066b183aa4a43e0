#pragma once

#include "kct/common.hpp"
#include "kct/parallel.hpp"
#include "kct/spectral.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace kct {

// A multiset of Koopman eigenvalues. Values must be finite and non-empty.
struct EigenvalueSet {
  std::vector<Complex> values;
  std::string label{};
  Meta meta{};

  void validate() const;
  std::size_t size() const { return values.size(); }

  static EigenvalueSet from(const SpectralDecomposition& dec, std::string label = {});
};

struct ShuffleRecord {
  std::size_t n_shuff = 0;
  std::uint64_t seed = 0;
  // Fraction of shuffles with distance >= the true distance.
  double frac_ge = 0.0;
  std::vector<double> distances;
};

struct SpectrumComparison {
  // Order-2 Wasserstein distance, sqrt(mean squared matched distance).
  double distance = 0.0;
  // assignment[i] is the index in the second set matched to element i of the
  // first set.
  std::vector<std::size_t> assignment;
  std::optional<ShuffleRecord> shuffle;
  Meta meta{};
};

// Squared Euclidean distances in the complex plane, rows from `a`.
Matrix squared_distance_matrix(std::span<const Complex> a, std::span<const Complex> b);

SpectrumComparison wasserstein(const EigenvalueSet& a, const EigenvalueSet& b);

struct SemiConjugacyResult {
  bool subset = false;
  // (index in small, index in big) for every element of small.
  std::vector<std::pair<std::size_t, std::size_t>> matched_pairs;
  double max_residual = 0.0;
};

// Tests whether `small` is contained in `big` up to tol, matching each element
// of small to a distinct element of big at minimal total squared distance.
SemiConjugacyResult semi_conjugacy(const EigenvalueSet& big, const EigenvalueSet& small, double tol);

struct ShuffledSets {
  EigenvalueSet first;
  EigenvalueSet second;
};

// Shuffle number `index` of the randomized control: each matched pair
// (a_i, b_assignment[i]) is kept in place or swapped between the two sets with
// probability 1/2, using the per-index stream Rng::stream(seed, index).
ShuffledSets draw_shuffle(const EigenvalueSet& a, const EigenvalueSet& b,
                          std::span<const std::size_t> assignment, std::uint64_t seed, std::size_t index);

inline constexpr std::size_t kDefaultShuffles = 100;

SpectrumComparison shuffle_control(const EigenvalueSet& a, const EigenvalueSet& b,
                                   std::size_t n_shuff = kDefaultShuffles, std::uint64_t seed = 0,
                                   Execution exec = Execution::parallel);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
KsResult ks_two_sample(std::span<const double> x, std::span<const double> y);

// Survival function of the Kolmogorov distribution, P(K > lambda).
double kolmogorov_survival(double lambda);

inline constexpr double kLogFloor = 1e-16;

struct DistanceMatrix {
  Matrix distance;
  // log10(max(distance, 1e-16)).
  Matrix log10_distance;
  // "t1:t2" per decomposition.
  std::vector<std::string> labels;
};

DistanceMatrix window_distance_matrix(std::span<const SpectralDecomposition> decompositions,
                                      Execution exec = Execution::parallel);

Matrix clamped_log10(const Matrix& m);

}  // namespace kct
