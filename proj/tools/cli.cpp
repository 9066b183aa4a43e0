#include "cli.hpp"

#include "kct/compare.hpp"
#include "kct/io.hpp"
#include "kct/optimizers.hpp"
#include "kct/spectral.hpp"
#include "kct/trajectory.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace kct::cli {

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
  std::uint64_t seed = 0;
  bool quiet = false;
};

struct SimulateOptions {
  std::string optimizer;
  std::string objective = "tan";
  double eta = 0.01;
  std::size_t steps = 100;
  std::string grid = "paper";
  std::string format = "bin";
  std::string out;
};

struct DmdOptions {
  std::string input;
  std::size_t delays = 0;
  std::size_t rank = 10;
  std::optional<double> residual_tol;
  double svd_tol = 1e-12;
  bool no_scale = false;
  std::string out;
};

struct CompareOptions {
  std::string a;
  std::string b;
  std::size_t shuffles = kDefaultShuffles;
  std::string out;
};

struct WindowOptions {
  std::string input;
  std::size_t window = 100;
  std::optional<std::size_t> stride;
  std::size_t start = 0;
  std::size_t delays = 0;
  std::size_t rank = 10;
  bool log10 = false;
  std::string out;
};

struct PcaOptions {
  std::string input;
  std::size_t components = 10;
  std::string out;
};

struct SemiOptions {
  std::string big;
  std::string small;
  double tol = 1e-6;
  std::string out;
};

std::string format_complex(const Complex& c) {
  std::ostringstream ss;
  ss << std::setprecision(10) << c.real() << (c.imag() < 0 ? " - " : " + ") << std::abs(c.imag()) << "i";
  return ss.str();
}

std::vector<Vector> read_grid_rows(const fs::path& path) {
  const Matrix m = io::read_csv_trajectory(path);  // rows of the file become columns
  std::vector<Vector> rows;
  for (Eigen::Index c = 0; c < m.cols(); ++c) rows.emplace_back(m.col(c));
  return rows;
}

Algorithm parse_algorithm(const std::string& s) {
  if (s == "omd") return Algorithm::omd;
  if (s == "ogd") return Algorithm::ogd;
  return Algorithm::bm;
}

int cmd_simulate(const SimulateOptions& o, const GlobalOptions& g, std::ostream& out) {
  const Algorithm algorithm = parse_algorithm(o.optimizer);
  const ObjectiveKind kind = o.objective == "tan" ? ObjectiveKind::sum_tan : ObjectiveKind::sum_quartic;
  if (algorithm == Algorithm::bm && kind == ObjectiveKind::sum_quartic) {
    throw UsageError("bisection cannot run on the quartic objective: it is symmetric about its minimum and does not "
                     "satisfy the assumption f(a) < 0 < f(b)");
  }

  OptimizerConfig cfg = paper_config(algorithm, kind, o.eta, o.steps);
  if (o.grid != "paper") {
    std::vector<Vector> rows = read_grid_rows(o.grid);
    const auto dim = rows.front().size();
    if (algorithm == Algorithm::bm) {
      if (dim % 2 != 0) throw DataError(o.grid + ": bisection grid rows must hold a(0) followed by b(0)");
      const Eigen::Index half = dim / 2;
      cfg.inits.clear();
      cfg.inits_b.clear();
      for (const Vector& r : rows) {
        cfg.inits.emplace_back(r.head(half));
        cfg.inits_b.emplace_back(r.tail(half));
      }
      cfg.domain = bm_domain(static_cast<std::size_t>(half));
    } else {
      cfg.inits = std::move(rows);
      cfg.domain = algorithm == Algorithm::omd ? omd_domain(static_cast<std::size_t>(dim))
                                               : ogd_domain(static_cast<std::size_t>(dim));
    }
    const auto d = static_cast<std::size_t>(cfg.domain.lo.size());
    cfg.objective = kind == ObjectiveKind::sum_tan ? Objective::sum_tan(d) : Objective::sum_quartic(d);
  }

  const OptimizerRun result = run(cfg);
  const fs::path dir(o.out);
  TrajectoryEnsemble ens = result.trajectory.with_meta("seed", std::to_string(g.seed))
                               .with_meta("grid", o.grid == "paper" ? "paper" : fs::path(o.grid).filename().string());
  io::save_ensemble(ens, dir / "trajectories.json",
                    o.format == "csv" ? io::TrajectoryFormat::csv : io::TrajectoryFormat::binary);

  std::string losses = "step";
  for (std::size_t i = 0; i < result.losses.size(); ++i) losses += "," + std::to_string(i);
  losses += '\n';
  for (std::size_t t = 0; t < cfg.steps; ++t) {
    losses += std::to_string(t);
    for (const auto& l : result.losses) losses += "," + format_double(l[t]);
    losses += '\n';
  }
  io::write_file_atomic(dir / "losses.csv", losses);

  if (!g.quiet) {
    out << "simulated " << to_string(algorithm) << " on " << to_string(kind) << ": " << ens.size()
        << " trajectories of length " << ens.length() << " -> " << (dir / "trajectories.json").string() << "\n";
  }
  return kSuccess;
}

DecompositionConfig decomposition_config(std::size_t rank, double svd_tol, std::optional<double> residual_tol,
                                         bool no_scale) {
  DecompositionConfig cfg;
  cfg.rank = rank;
  cfg.svd_rel_tol = svd_tol;
  cfg.residual_tol = residual_tol;
  cfg.scale_columns = !no_scale;
  cfg.validate();
  return cfg;
}

int cmd_dmd(const DmdOptions& o, const GlobalOptions& g, std::ostream& out) {
  const DecompositionConfig cfg = decomposition_config(o.rank, o.svd_tol, o.residual_tol, o.no_scale);
  const TrajectoryEnsemble ens = io::load_ensemble(o.input);
  SpectralDecomposition dec = dmd_rrr(delay_embed(ens, o.delays), cfg);
  dec.meta["source"] = fs::path(o.input).filename().string();
  dec.meta["seed"] = std::to_string(g.seed);
  io::save_spectrum(dec, o.out);

  if (!g.quiet) {
    out << "rank " << dec.rank << ", delays " << dec.delay << ", " << dec.mode_count() << " modes\n";
    out << std::left << std::setw(4) << "#" << std::setw(36) << "eigenvalue" << std::setw(14) << "|lambda|"
        << "residual\n";
    for (std::size_t i = 0; i < dec.mode_count(); ++i) {
      std::ostringstream mag, res;
      mag << std::setprecision(8) << std::abs(dec.eigenvalues[i]);
      res << std::setprecision(3) << std::scientific << dec.residuals[i];
      out << std::left << std::setw(4) << i << std::setw(36) << format_complex(dec.eigenvalues[i]) << std::setw(14)
          << mag.str() << res.str() << "\n";
    }
  }
  return kSuccess;
}

int cmd_compare(const CompareOptions& o, const GlobalOptions& g, std::ostream& out) {
  const SpectralDecomposition a = io::load_spectrum(o.a);
  const SpectralDecomposition b = io::load_spectrum(o.b);
  SpectrumComparison cmp = shuffle_control(EigenvalueSet::from(a, fs::path(o.a).filename().string()),
                                           EigenvalueSet::from(b, fs::path(o.b).filename().string()), o.shuffles,
                                           g.seed);
  io::save_comparison(cmp, o.out);
  if (!g.quiet) {
    out << "W2 = " << std::setprecision(10) << cmp.distance << "\n"
        << "shuffles with W2' >= W2: " << std::setprecision(4) << 100.0 * cmp.shuffle->frac_ge << "% of "
        << cmp.shuffle->n_shuff << " (seed " << g.seed << ")\n";
  }
  return kSuccess;
}

int cmd_window(const WindowOptions& o, const GlobalOptions& g, std::ostream& out) {
  const DecompositionConfig cfg = decomposition_config(o.rank, 1e-12, std::nullopt, false);
  const TrajectoryEnsemble ens = io::load_ensemble(o.input);
  const std::vector<TrajectoryEnsemble> windows = window(ens, WindowSpec{o.window, o.stride.value_or(o.window), o.start});
  std::vector<SpectralDecomposition> spectra(windows.size());
  for_each_index(windows.size(), Execution::parallel, [&](std::size_t i) {
    spectra[i] = dmd_rrr(delay_embed(windows[i], o.delays), cfg, Execution::serial);
  });
  const DistanceMatrix dm = window_distance_matrix(spectra);
  io::export_matrix(dm.distance, dm.labels, o.out, o.log10);
  if (!g.quiet) {
    out << windows.size() << " windows, " << spectra.front().mode_count() << " modes each -> " << o.out << "\n";
  }
  return kSuccess;
}

int cmd_pca(const PcaOptions& o, const GlobalOptions& g, std::ostream& out) {
  const TrajectoryEnsemble ens = io::load_ensemble(o.input);
  const PcaResult pca = pca_reduce(ens, o.components);
  const fs::path dir(o.out);
  io::save_ensemble(pca.reduced.with_meta("seed", std::to_string(g.seed)), dir / "reduced.json");
  io::write_binary_trajectories(dir / "pca_basis.bin", {pca.basis});
  io::write_binary_trajectories(dir / "pca_mean.bin", {Matrix(pca.mean)});
  std::string report = "component,explained_variance\n";
  for (std::size_t i = 0; i < pca.explained_variance.size(); ++i) {
    report += std::to_string(i) + "," + format_double(pca.explained_variance[i]) + "\n";
  }
  io::write_file_atomic(dir / "explained_variance.csv", report);
  if (!g.quiet) {
    double total = 0.0;
    for (double v : pca.explained_variance) total += v;
    out << "kept " << o.components << " of " << ens.state_dim() << " dimensions, explained variance "
        << std::setprecision(6) << total << "\n";
  }
  return kSuccess;
}

int cmd_semi(const SemiOptions& o, const GlobalOptions& g, std::ostream& out) {
  const SpectralDecomposition big = io::load_spectrum(o.big);
  const SpectralDecomposition small = io::load_spectrum(o.small);
  const SemiConjugacyResult res =
      semi_conjugacy(EigenvalueSet::from(big, "big"), EigenvalueSet::from(small, "small"), o.tol);
  if (!o.out.empty()) io::write_file_atomic(o.out, io::semi_conjugacy_to_json(res, o.tol));
  if (!g.quiet) {
    out << "subset: " << (res.subset ? "true" : "false") << " (max residual " << std::setprecision(6)
        << res.max_residual << ", tol " << o.tol << ")\n";
    for (const auto& [s, b] : res.matched_pairs) {
      out << "  small[" << s << "] " << format_complex(small.eigenvalues[s]) << "  ->  big[" << b << "] "
          << format_complex(big.eigenvalues[b]) << "\n";
    }
  }
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Koopman spectral comparison of dynamical processes", "kct"};
  app.require_subcommand(1);
  GlobalOptions global;
  app.add_option("--seed", global.seed, "Seed for randomized steps (recorded in outputs)");
  app.add_flag("--quiet", global.quiet, "Suppress reports on stdout");

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Run OMD, OGD or bisection on the reference grids");
  simulate->add_option("--optimizer", sim.optimizer)->required()->check(CLI::IsMember({"omd", "ogd", "bm"}));
  simulate->add_option("--objective", sim.objective)->check(CLI::IsMember({"tan", "quartic"}));
  simulate->add_option("--eta", sim.eta)->check(CLI::PositiveNumber);
  simulate->add_option("--steps", sim.steps)->check(CLI::PositiveNumber);
  simulate->add_option("--grid", sim.grid, "'paper' or a CSV of initial conditions (one per row)");
  simulate->add_option("--format", sim.format)->check(CLI::IsMember({"bin", "csv"}));
  simulate->add_option("--out", sim.out, "Output directory")->required();

  DmdOptions dmd;
  auto* dmd_cmd = app.add_subcommand("dmd", "Delay-embed an ensemble and compute its Koopman spectrum");
  dmd_cmd->add_option("--input", dmd.input, "Ensemble manifest")->required();
  dmd_cmd->add_option("--delays", dmd.delays);
  dmd_cmd->add_option("--rank", dmd.rank)->check(CLI::PositiveNumber);
  dmd_cmd->add_option("--residual-tol", dmd.residual_tol);
  dmd_cmd->add_option("--svd-tol", dmd.svd_tol);
  dmd_cmd->add_flag("--no-scale", dmd.no_scale, "Disable snapshot column scaling");
  dmd_cmd->add_option("--out", dmd.out, "Spectrum JSON")->required();

  CompareOptions cmp;
  auto* compare = app.add_subcommand("compare", "Wasserstein distance and shuffle control between two spectra");
  compare->add_option("--a", cmp.a)->required();
  compare->add_option("--b", cmp.b)->required();
  compare->add_option("--shuffles", cmp.shuffles)->check(CLI::PositiveNumber);
  compare->add_option("--out", cmp.out, "Comparison JSON")->required();

  WindowOptions win;
  auto* window_cmd = app.add_subcommand("window", "Pairwise Wasserstein distances between windowed spectra");
  window_cmd->add_option("--input", win.input)->required();
  window_cmd->add_option("--window", win.window)->check(CLI::PositiveNumber);
  window_cmd->add_option("--stride", win.stride)->check(CLI::PositiveNumber);
  window_cmd->add_option("--start", win.start);
  window_cmd->add_option("--delays", win.delays);
  window_cmd->add_option("--rank", win.rank)->check(CLI::PositiveNumber);
  window_cmd->add_flag("--log10", win.log10);
  window_cmd->add_option("--out", win.out, "Matrix CSV")->required();

  PcaOptions pca;
  auto* pca_cmd = app.add_subcommand("pca", "Project an ensemble onto its top principal components");
  pca_cmd->add_option("--input", pca.input)->required();
  pca_cmd->add_option("--components", pca.components)->check(CLI::PositiveNumber);
  pca_cmd->add_option("--out", pca.out, "Output directory")->required();

  SemiOptions semi;
  auto* semi_cmd = app.add_subcommand("semi", "Test whether one spectrum is contained in another");
  semi_cmd->add_option("--big", semi.big)->required();
  semi_cmd->add_option("--small", semi.small)->required();
  semi_cmd->add_option("--tol", semi.tol)->check(CLI::NonNegativeNumber);
  semi_cmd->add_option("--out", semi.out, "Optional verdict JSON");

  for (auto* sub : app.get_subcommands([](CLI::App*) { return true; })) sub->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "kct: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*simulate) return cmd_simulate(sim, global, out);
    if (*dmd_cmd) return cmd_dmd(dmd, global, out);
    if (*compare) return cmd_compare(cmp, global, out);
    if (*window_cmd) return cmd_window(win, global, out);
    if (*pca_cmd) return cmd_pca(pca, global, out);
    if (*semi_cmd) return cmd_semi(semi, global, out);
  } catch (const UsageError& e) {
    err << "kct: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalError& e) {
    err << "kct: numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const DataError& e) {
    err << "kct: data error: " << e.what() << "\n";
    return kData;
  } catch (const IoError& e) {
    err << "kct: i/o error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    err << "kct: internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}

}  // namespace kct::cli
