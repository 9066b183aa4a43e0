#include "kct/optimizers.hpp"

#include <cmath>
#include <string>

namespace kct {

Objective Objective::sum_tan(std::size_t dim) {
  Objective f;
  f.kind = ObjectiveKind::sum_tan;
  f.dim = dim;
  f.value = [](const Vector& x) { return x.array().tan().sum(); };
  f.gradient = [](const Vector& x) -> Vector { return x.array().cos().square().inverse().matrix(); };
  return f;
}

Objective Objective::sum_quartic(std::size_t dim) {
  Objective f;
  f.kind = ObjectiveKind::sum_quartic;
  f.dim = dim;
  f.value = [](const Vector& x) { return x.array().pow(4).sum(); };
  f.gradient = [](const Vector& x) -> Vector { return (4.0 * x.array().cube()).matrix(); };
  return f;
}

Objective exp_reparameterized(const Objective& f) {
  Objective g;
  g.kind = ObjectiveKind::custom;
  g.dim = f.dim;
  g.value = [value = f.value](const Vector& u) { return value(u.array().exp().matrix()); };
  g.gradient = [gradient = f.gradient](const Vector& u) -> Vector {
    const Vector x = u.array().exp().matrix();
    return x.cwiseProduct(gradient(x));
  };
  return g;
}

BoxDomain BoxDomain::uniform(std::size_t dim, double lo, double hi) {
  const auto n = static_cast<Eigen::Index>(dim);
  BoxDomain box{Vector::Constant(n, lo), Vector::Constant(n, hi)};
  box.validate();
  return box;
}

void BoxDomain::validate() const {
  if (lo.size() != hi.size() || lo.size() == 0) throw UsageError("box bounds must be non-empty and equal length");
  if (!(lo.array() < hi.array()).all()) throw UsageError("box requires lo < hi in every coordinate");
}

bool BoxDomain::contains(const Vector& x) const {
  return x.size() == lo.size() && (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
}

Vector BoxDomain::clamp(const Vector& x) const { return x.cwiseMax(lo).cwiseMin(hi); }

BoxDomain omd_domain(std::size_t dim) { return BoxDomain::uniform(dim, 0.01, 1.0); }
BoxDomain ogd_domain(std::size_t dim) { return BoxDomain::uniform(dim, -4.6, 0.0); }
BoxDomain bm_domain(std::size_t dim) { return BoxDomain::uniform(dim, -4.0 / 3.0, 8.0 / 7.0); }

Vector omd_step(const Vector& x, const Objective& f, double eta, const BoxDomain& domain) {
  if (!(x.array() > 0.0).all()) throw DataError("mirror descent state must lie in the positive orthant");
  const Vector grad = f.gradient(x);
  const Vector denom = (1.0 + eta * x.array() * grad.array()).matrix();
  for (Eigen::Index i = 0; i < denom.size(); ++i) {
    if (denom(i) == 0.0) {
      throw NumericalError("mirror descent step is singular in coordinate " + std::to_string(i) +
                           " (1 + eta x grad f = 0); use a smaller learning rate");
    }
  }
  const Vector y = x.cwiseQuotient(denom);
  if (!y.allFinite()) throw NumericalError("mirror descent step produced non-finite values");
  return domain.clamp(y);
}

Vector ogd_step(const Vector& u, const Objective& f_tilde, double eta, const BoxDomain& domain) {
  const Vector v = u - eta * f_tilde.gradient(u);
  if (!v.allFinite()) throw NumericalError("gradient step produced non-finite values");
  return domain.clamp(v);
}

BisectionStep bm_step(const Vector& a, const Vector& b, const Objective& f) {
  Vector z = 0.5 * (a + b);
  if (f.value(z) < 0.0) return {z, b, z};
  return {a, z, z};
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::omd: return "omd";
    case Algorithm::ogd: return "ogd";
    case Algorithm::bm: return "bm";
  }
  return "unknown";
}

std::string to_string(ObjectiveKind k) {
  switch (k) {
    case ObjectiveKind::sum_tan: return "tan";
    case ObjectiveKind::sum_quartic: return "quartic";
    case ObjectiveKind::custom: return "custom";
  }
  return "unknown";
}

namespace {

void validate_config(const OptimizerConfig& cfg) {
  if (!cfg.objective.value || !cfg.objective.gradient) throw UsageError("objective is not set");
  if (cfg.steps < 1) throw UsageError("number of steps must be positive");
  if (cfg.inits.empty()) throw UsageError("at least one initial condition is required");
  if (cfg.algorithm != Algorithm::bm && !(cfg.eta > 0.0)) throw UsageError("learning rate must be positive");
  cfg.domain.validate();
  const auto dim = cfg.domain.lo.size();
  for (std::size_t i = 0; i < cfg.inits.size(); ++i) {
    if (cfg.inits[i].size() != dim) throw DataError("initial condition " + std::to_string(i) + " has wrong dimension");
    if (!cfg.domain.contains(cfg.inits[i])) {
      throw DataError("initial condition " + std::to_string(i) + " lies outside the domain");
    }
  }
  if (cfg.algorithm == Algorithm::bm) {
    if (cfg.inits_b.size() != cfg.inits.size()) throw UsageError("bisection needs one b(0) per a(0)");
    for (std::size_t i = 0; i < cfg.inits.size(); ++i) {
      if (cfg.inits_b[i].size() != dim || !cfg.domain.contains(cfg.inits_b[i])) {
        throw DataError("b(0) of bracket " + std::to_string(i) + " lies outside the domain");
      }
      const double fa = cfg.objective.value(cfg.inits[i]);
      const double fb = cfg.objective.value(cfg.inits_b[i]);
      if (!(fa < 0.0 && fb > 0.0)) {
        throw DataError("bracket " + std::to_string(i) + " violates f(a) < 0 < f(b) (f(a) = " + std::to_string(fa) +
                        ", f(b) = " + std::to_string(fb) + ")");
      }
    }
  }
}

}  // namespace

OptimizerRun run(const OptimizerConfig& config, Execution exec) {
  validate_config(config);
  const std::size_t count = config.inits.size();
  const auto dim = config.domain.lo.size();
  const auto steps = static_cast<Eigen::Index>(config.steps);
  const Objective stepped =
      config.algorithm == Algorithm::ogd ? exp_reparameterized(config.objective) : config.objective;

  std::vector<Matrix> paths(count);
  std::vector<std::vector<double>> losses(count);
  for_each_index(count, exec, [&](std::size_t i) {
    Matrix path(dim, steps);
    std::vector<double> loss(config.steps);
    Vector state = config.inits[i];
    Vector b = config.algorithm == Algorithm::bm ? config.inits_b[i] : Vector();
    for (Eigen::Index t = 0; t < steps; ++t) {
      try {
        switch (config.algorithm) {
          case Algorithm::omd:
            path.col(t) = state;
            loss[static_cast<std::size_t>(t)] = config.objective.value(state);
            state = omd_step(state, config.objective, config.eta, config.domain);
            break;
          case Algorithm::ogd:
            path.col(t) = state;
            loss[static_cast<std::size_t>(t)] = stepped.value(state);
            state = ogd_step(state, stepped, config.eta, config.domain);
            break;
          case Algorithm::bm: {
            BisectionStep next = bm_step(state, b, config.objective);
            path.col(t) = next.z;
            loss[static_cast<std::size_t>(t)] = config.objective.value(next.z);
            state = std::move(next.a);
            b = std::move(next.b);
            break;
          }
        }
      } catch (const NumericalError& e) {
        throw NumericalError("trajectory " + std::to_string(i) + ", step " + std::to_string(t) + ": " + e.what());
      }
    }
    paths[i] = std::move(path);
    losses[i] = std::move(loss);
  });

  Meta meta{{"algorithm", to_string(config.algorithm)},
            {"objective", to_string(config.objective.kind)},
            {"steps", std::to_string(config.steps)}};
  if (config.algorithm != Algorithm::bm) meta["eta"] = format_double(config.eta);
  return OptimizerRun{config, TrajectoryEnsemble(std::move(paths), {}, std::move(meta)), std::move(losses)};
}

namespace {

std::vector<Vector> product_grid(const std::vector<double>& axis) {
  std::vector<Vector> out;
  for (double p : axis) {
    for (double q : axis) out.push_back((Vector(2) << p, q).finished());
  }
  return out;
}

}  // namespace

std::vector<Vector> omd_paper_grid() { return product_grid({0.1, 0.3, 0.5, 0.7, 0.9}); }

std::vector<Vector> ogd_paper_grid() { return product_grid({-2.30, -1.75, -1.20, -0.65, -0.10}); }

std::pair<std::vector<Vector>, std::vector<Vector>> bm_paper_grid() {
  return {product_grid({-16.0 / 12.0, -13.0 / 12.0, -10.0 / 12.0, -7.0 / 12.0, -4.0 / 12.0}),
          product_grid({1.0 / 7.0, 0.393, 0.643, 0.893, 8.0 / 7.0})};
}

OptimizerConfig paper_config(Algorithm algorithm, ObjectiveKind objective, double eta, std::size_t steps) {
  OptimizerConfig cfg;
  cfg.algorithm = algorithm;
  switch (objective) {
    case ObjectiveKind::sum_tan: cfg.objective = Objective::sum_tan(2); break;
    case ObjectiveKind::sum_quartic: cfg.objective = Objective::sum_quartic(2); break;
    case ObjectiveKind::custom: throw UsageError("reference configurations exist only for tan and quartic");
  }
  cfg.eta = eta;
  cfg.steps = steps;
  switch (algorithm) {
    case Algorithm::omd:
      cfg.inits = omd_paper_grid();
      cfg.domain = omd_domain();
      break;
    case Algorithm::ogd:
      cfg.inits = ogd_paper_grid();
      cfg.domain = ogd_domain();
      break;
    case Algorithm::bm:
      if (objective == ObjectiveKind::sum_quartic) {
        throw UsageError("bisection cannot run on the quartic objective: it is symmetric about its minimum and "
                         "does not satisfy the assumption f(a) < 0");
      }
      std::tie(cfg.inits, cfg.inits_b) = bm_paper_grid();
      cfg.domain = bm_domain();
      break;
  }
  return cfg;
}

}  // namespace kct
