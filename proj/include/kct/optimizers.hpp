#pragma once

#include "kct/common.hpp"
#include "kct/parallel.hpp"
#include "kct/trajectory.hpp"

#include <functional>
#include <string>
#include <vector>

namespace kct {

enum class ObjectiveKind { sum_tan, sum_quartic, custom };

// Scalar objective with analytic gradient.
struct Objective {
  ObjectiveKind kind = ObjectiveKind::custom;
  std::size_t dim = 0;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;

  static Objective sum_tan(std::size_t dim);
  static Objective sum_quartic(std::size_t dim);
};

// f~(u) = f(exp(u)), gradient exp(u) * grad f(exp(u)) element-wise.
Objective exp_reparameterized(const Objective& f);

struct BoxDomain {
  Vector lo;
  Vector hi;

  static BoxDomain uniform(std::size_t dim, double lo, double hi);
  void validate() const;
  bool contains(const Vector& x) const;
  Vector clamp(const Vector& x) const;
};

// Boxes used by the log-barrier / exponential reparameterization example.
BoxDomain omd_domain(std::size_t dim = 2);  // [0.01, 1]
BoxDomain ogd_domain(std::size_t dim = 2);  // [-4.6, 0]
BoxDomain bm_domain(std::size_t dim = 2);   // [-4/3, 8/7]

// Mirror descent step under R(x) = -sum log x_i: y = x / (1 + eta x grad f(x))
// followed by the Bregman projection onto K (per-coordinate clamp).
Vector omd_step(const Vector& x, const Objective& f, double eta, const BoxDomain& domain);

// Projected gradient step u - eta grad f~(u), clamped to K'.
Vector ogd_step(const Vector& u, const Objective& f_tilde, double eta, const BoxDomain& domain);

struct BisectionStep {
  Vector a;
  Vector b;
  Vector z;
};

// z = (a + b) / 2; replaces a when f(z) < 0, otherwise b.
BisectionStep bm_step(const Vector& a, const Vector& b, const Objective& f);

enum class Algorithm { omd, ogd, bm };

std::string to_string(Algorithm a);
std::string to_string(ObjectiveKind k);

struct OptimizerConfig {
  Algorithm algorithm = Algorithm::omd;
  // Objective in the original x coordinates. OGD steps on its exponential
  // reparameterization and reports losses f(exp(u)).
  Objective objective;
  double eta = 0.01;
  std::size_t steps = 100;
  // x(0) for OMD, u(0) for OGD, a(0) for BM.
  std::vector<Vector> inits;
  // b(0) for BM, paired index-wise with inits.
  std::vector<Vector> inits_b;
  BoxDomain domain;
};

struct OptimizerRun {
  OptimizerConfig config;
  // One trajectory per initial condition with the `steps` states the update
  // is applied to: x(0..T-1), u(0..T-1) or z(0..T-1).
  TrajectoryEnsemble trajectory;
  // losses[i][t]: objective at state t of trajectory i (f(exp(u)) for OGD,
  // f(z) for BM).
  std::vector<std::vector<double>> losses;
};

OptimizerRun run(const OptimizerConfig& config, Execution exec = Execution::parallel);

// Initial-condition grids from the reference experiments (5 x 5, d = 2).
std::vector<Vector> omd_paper_grid();
std::vector<Vector> ogd_paper_grid();
// a(0) and b(0) values, paired index-wise into 25 brackets.
std::pair<std::vector<Vector>, std::vector<Vector>> bm_paper_grid();

// Fully populated config for an algorithm on the reference grids and boxes.
OptimizerConfig paper_config(Algorithm algorithm, ObjectiveKind objective, double eta = 0.01,
                             std::size_t steps = 100);

}  // namespace kct
