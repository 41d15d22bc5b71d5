#include "cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "ksmi/bench.hpp"
#include "ksmi/diagnostics.hpp"
#include "ksmi/report_io.hpp"
#include "ksmi/samples.hpp"

namespace ksmi::cli {

KsmiConfig RunConfig::ksmi_config() const {
  KsmiConfig cfg;
  cfg.k = k;
  cfg.m = m;
  cfg.inner = inner();
  cfg.seed = seed;
  cfg.threads = threads;
  return cfg;
}

InnerEstimator RunConfig::inner() const {
  if (!neural) return ksg;
  TrainConfig t = train;
  t.seed = seed;
  return t;
}

namespace {

// Integer flags: CLI11's PositiveNumber reports a floating-point range.
const CLI::Validator kCount(
    [](std::string& text) -> std::string {
      std::size_t v = 0;
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || ptr != text.data() + text.size() || v < 1) {
        return "must be an integer >= 1, got '" + text + "'";
      }
      return {};
    },
    "INT>=1");

struct Flags {
  std::string family = "common-signal";
  std::string inner = "ksg";
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> model_seed;
  std::optional<double> bound_a;
  std::optional<double> sigma_x_op;
  std::optional<double> sigma_y_op;
  std::optional<double> fisher_op;
};

void add_common(CLI::App* app, RunConfig& cfg, Flags& flags) {
  app->add_option("--seed", flags.seed, "Base seed (default: KSMI_SEED or 0)");
  app->add_option("--threads", cfg.threads, "Worker threads")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1024}));
  app->add_option("-o,--output", cfg.output, "Output CSV path (default: stdout)");
}

void add_model(CLI::App* app, RunConfig& cfg, Flags& flags) {
  app->add_option("--family", flags.family,
                  "common-signal, sinusoidal or isotropic")
      ->check(CLI::IsMember({"common-signal", "common_signal", "sinusoidal",
                             "isotropic"}));
  app->add_option("--d", cfg.model.d, "Dimension of X and Y")
      ->check(kCount);
  app->add_option("--rank", cfg.model.rank, "Common-signal rank")
      ->check(kCount);
  app->add_option("--coupling", cfg.model.coupling,
                  "Isotropic cross-covariance c, C = c I")
      ->check(CLI::Range(-0.999999999, 0.999999999));
  app->add_option("--model-seed", flags.model_seed,
                  "Seed of the model parameters (default: --seed)");
}

void add_projection(CLI::App* app, RunConfig& cfg) {
  app->add_option("--k", cfg.k, "Projection dimension")
      ->check(kCount);
  app->add_option("--m", cfg.m, "Number of projections")
      ->check(kCount);
}

void add_estimator(CLI::App* app, RunConfig& cfg, Flags& flags) {
  app->add_option("--inner", flags.inner, "Inner MI estimator")
      ->check(CLI::IsMember({"ksg", "neural"}));
  app->add_option("--k-neighbors", cfg.ksg.k_neighbors, "KSG neighbor count")
      ->check(CLI::Range(std::size_t{1}, std::size_t{64}));
  app->add_option("--jitter", cfg.ksg.jitter_scale,
                  "KSG tie-breaking jitter, relative to each column's std")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--ell", cfg.train.hidden, "Hidden ReLU units")
      ->check(kCount);
  app->add_option("--depth", cfg.train.depth, "Hidden layers")
      ->check(kCount);
  app->add_option("--steps", cfg.train.steps, "SGD steps")
      ->check(kCount);
  app->add_option("--batch", cfg.train.batch_size, "Minibatch size")
      ->check(kCount);
  app->add_option("--lr", cfg.train.learning_rate, "Learning rate")
      ->check(CLI::PositiveNumber);
  app->add_option("--momentum", cfg.train.momentum, "SGD momentum")
      ->check(CLI::Range(0.0, 0.999999));
  app->add_flag("--constrained", cfg.train.constraint_projection,
                "Project onto the bounded network class after each step");
  app->add_option("--bound-a", flags.bound_a,
                  "Constraint bound a (default max(log log ell, 1))")
      ->check(CLI::PositiveNumber);
}

void add_norms(CLI::App* app, Flags& flags) {
  app->add_option("--sigma-x-op", flags.sigma_x_op, "||Sigma_X||_op")
      ->check(CLI::PositiveNumber);
  app->add_option("--sigma-y-op", flags.sigma_y_op, "||Sigma_Y||_op")
      ->check(CLI::PositiveNumber);
  app->add_option("--fisher-op", flags.fisher_op, "Fisher information ||J||_op")
      ->check(CLI::PositiveNumber);
}

void add_grids(CLI::App* app, RunConfig& cfg) {
  app->add_option("--n-grid", cfg.n_grid, "Sample sizes")
      ->delimiter(',')
      ->check(kCount);
  app->add_option("--k-grid", cfg.k_grid, "Projection dimensions")
      ->delimiter(',')
      ->check(kCount);
  app->add_option("--d-grid", cfg.d_grid, "Dimensions")
      ->delimiter(',')
      ->check(kCount);
}

std::uint64_t parse_env_seed(const char* text) {
  std::uint64_t value = 0;
  const char* end = text + std::char_traits<char>::length(text);
  const auto [ptr, ec] = std::from_chars(text, end, value);
  if (ec != std::errc() || ptr != end || ptr == text) {
    throw UsageError(std::string("KSMI_SEED: not an unsigned integer: '") +
                     text + "'");
  }
  return value;
}

// Module preconditions that CLI11 validators cannot express.
void check_cross_fields(const RunConfig& cfg, const CLI::App& sub) {
  const auto given = [&](const char* flag) { return sub.count(flag) > 0; };
  if (cfg.model.family == ModelFamily::common_signal &&
      cfg.model.rank > cfg.model.d) {
    throw UsageError("--rank: must not exceed --d (" +
                     std::to_string(cfg.model.d) + ")");
  }
  if (cfg.train.constraint_projection && cfg.train.depth != 1) {
    throw UsageError("--constrained: requires --depth 1");
  }
  switch (cfg.subcommand) {
    case Subcommand::gaussian:
    case Subcommand::check_lipschitz:
      if (cfg.k > cfg.model.d) {
        throw UsageError("--k: must not exceed --d (" +
                         std::to_string(cfg.model.d) + ")");
      }
      break;
    case Subcommand::bound:
      for (const char* flag : {"--dx", "--dy", "--sigma-x-op", "--sigma-y-op",
                               "--fisher-op"}) {
        if (!given(flag)) throw UsageError(std::string(flag) + ": required");
      }
      if (cfg.k > std::min(cfg.dx, cfg.dy)) {
        throw UsageError("--k: must not exceed min(--dx, --dy)");
      }
      break;
    case Subcommand::sample:
      if (cfg.n < 2) throw UsageError("--n: need at least 2 samples");
      break;
    case Subcommand::bench_independence:
    case Subcommand::bench_dimension:
    case Subcommand::bench_neural:
      if (cfg.subcommand != Subcommand::bench_independence &&
          cfg.model.family == ModelFamily::sinusoidal) {
        throw UsageError("--family: this benchmark needs a Gaussian family");
      }
      if (cfg.subcommand == Subcommand::bench_dimension && cfg.m < 2) {
        throw UsageError("--m: the dimension sweep needs m >= 2");
      }
      break;
    default:
      break;
  }
}

}  // namespace

RunConfig parse_args(int argc, const char* const* argv, const char* env_seed) {
  RunConfig cfg;
  Flags flags;
  CLI::App app{"k-sliced mutual information estimation", "ksmi"};
  app.require_subcommand(1);

  auto* sample = app.add_subcommand("sample", "Write a synthetic dataset as CSV");
  add_common(sample, cfg, flags);
  add_model(sample, cfg, flags);
  sample->add_option("--n", cfg.n, "Number of samples")->check(kCount);
  sample->add_flag("--independent", cfg.independent,
                   "Draw from the null with the same marginals");

  auto* estimate = app.add_subcommand("estimate", "Estimate k-SMI from a CSV dataset");
  add_common(estimate, cfg, flags);
  estimate->add_option("--input", cfg.input, "Dataset CSV")->required();
  add_projection(estimate, cfg);
  add_estimator(estimate, cfg, flags);
  add_norms(estimate, flags);

  auto* gaussian = app.add_subcommand("gaussian", "Exact Gaussian k-SMI oracle values");
  add_common(gaussian, cfg, flags);
  add_model(gaussian, cfg, flags);
  add_projection(gaussian, cfg);

  auto* bound = app.add_subcommand("bound", "Monte-Carlo error bound");
  add_common(bound, cfg, flags);
  add_projection(bound, cfg);
  bound->add_option("--dx", cfg.dx, "Dimension of X")->check(kCount);
  bound->add_option("--dy", cfg.dy, "Dimension of Y")->check(kCount);
  add_norms(bound, flags);

  auto* residual = app.add_subcommand(
      "residual", "k-SMI minus the k-SMI of the moment-matched Gaussian");
  add_common(residual, cfg, flags);
  residual->add_option("--input", cfg.input, "Dataset CSV")->required();
  add_projection(residual, cfg);
  add_estimator(residual, cfg, flags);
  residual->add_option("--oracle-m", cfg.oracle_m, "Frames for the Gaussian oracle")
      ->check(CLI::Range(std::size_t{2}, std::size_t{100000000}));

  auto* bench_ind = app.add_subcommand("bench-independence",
                                       "AUC of k-SMI as an independence test");
  auto* bench_dim = app.add_subcommand("bench-dimension",
                                       "Exact k-SMI and its spread against d");
  auto* bench_neu = app.add_subcommand("bench-neural",
                                       "Neural k-SMI error as n = m grows");
  for (auto* b : {bench_ind, bench_dim, bench_neu}) {
    add_common(b, cfg, flags);
    add_model(b, cfg, flags);
    add_grids(b, cfg);
    b->add_option("--plot", cfg.plot, "Also write an SVG line plot here");
  }
  for (auto* b : {bench_ind, bench_dim}) {
    b->add_option("--m", cfg.m, "Number of projections")->check(kCount);
  }
  for (auto* b : {bench_ind, bench_neu}) add_estimator(b, cfg, flags);
  bench_ind->add_option("--trials", cfg.trials, "Datasets per class")
      ->check(kCount);
  bench_neu->add_option("--oracle-m", cfg.oracle_m, "Frames for the exact truth")
      ->check(CLI::Range(std::size_t{2}, std::size_t{100000000}));

  auto* lipschitz = app.add_subcommand(
      "check-lipschitz", "Projected-entropy Lipschitz inequality on the X marginal");
  add_common(lipschitz, cfg, flags);
  add_model(lipschitz, cfg, flags);
  lipschitz->add_option("--k", cfg.k, "Projection dimension")
      ->check(kCount);
  lipschitz->add_option("--trials", cfg.trials, "Frame pairs")
      ->check(kCount);

  std::vector<std::string> args;
  for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    throw HelpRequested(subs.empty() ? app.help() : subs.back()->help());
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  const std::pair<CLI::App*, Subcommand> table[] = {
      {sample, Subcommand::sample},
      {estimate, Subcommand::estimate},
      {gaussian, Subcommand::gaussian},
      {bound, Subcommand::bound},
      {residual, Subcommand::residual},
      {bench_ind, Subcommand::bench_independence},
      {bench_dim, Subcommand::bench_dimension},
      {bench_neu, Subcommand::bench_neural},
      {lipschitz, Subcommand::check_lipschitz},
  };
  const CLI::App* chosen = nullptr;
  for (const auto& [sub, kind] : table) {
    if (sub->parsed()) {
      cfg.subcommand = kind;
      chosen = sub;
    }
  }

  if (flags.seed) {
    cfg.seed = *flags.seed;
  } else if (env_seed != nullptr && *env_seed != '\0') {
    cfg.seed = parse_env_seed(env_seed);
  }
  cfg.model.family = parse_family(flags.family);
  cfg.model.seed = flags.model_seed.value_or(cfg.seed);
  cfg.neural = flags.inner == "neural";
  if (cfg.subcommand == Subcommand::bench_neural) {
    if (bench_neu->count("--inner") > 0 && !cfg.neural) {
      throw UsageError("--inner: bench-neural always trains the neural estimator");
    }
    cfg.neural = true;
  }
  cfg.train.bound = flags.bound_a;

  const int norm_flags = (flags.sigma_x_op ? 1 : 0) + (flags.sigma_y_op ? 1 : 0) +
                         (flags.fisher_op ? 1 : 0);
  if (norm_flags == 3) {
    cfg.norms = OperatorNorms{*flags.sigma_x_op, *flags.sigma_y_op, *flags.fisher_op};
  } else if (norm_flags != 0 && cfg.subcommand == Subcommand::estimate) {
    throw UsageError(
        "--sigma-x-op, --sigma-y-op, --fisher-op: give all three or none");
  }

  if (cfg.n_grid.empty()) cfg.n_grid = {500, 1000, 2000, 4000};
  if (cfg.k_grid.empty()) cfg.k_grid = {1};
  if (cfg.d_grid.empty()) cfg.d_grid = {cfg.model.d};
  if (cfg.subcommand == Subcommand::check_lipschitz && chosen->count("--trials") == 0) {
    cfg.trials = 1000;
  }

  check_cross_fields(cfg, *chosen);
  return cfg;
}

namespace {

// Output stream for --output, or `fallback` when none was given.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (path.empty()) return;
    file_.open(path, std::ios::binary | std::ios::trunc);
    if (!file_) throw IoError("cannot open '" + path + "' for writing");
    out_ = &file_;
  }
  std::ostream& stream() { return *out_; }
  void finish(const std::string& path) {
    out_->flush();
    if (!*out_) throw IoError("write to '" + (path.empty() ? "stdout" : path) + "' failed");
  }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

void emit(const Table& table, const RunConfig& cfg, std::ostream& out) {
  Sink sink(cfg.output, out);
  write_csv(table, sink.stream());
  sink.finish(cfg.output);
}

void emit_plot(const Table& table, const RunConfig& cfg, const std::string& x,
               const std::string& y, const std::vector<std::string>& groups) {
  if (!cfg.plot.empty()) write_svg_plot(table, x, y, groups, cfg.plot);
}

TrialSpec trial_spec(const RunConfig& cfg) {
  TrialSpec spec;
  spec.model = cfg.model;
  spec.n_grid = cfg.n_grid;
  spec.k_grid = cfg.k_grid;
  spec.d_grid = cfg.d_grid;
  spec.m = cfg.m;
  spec.trials = cfg.trials;
  spec.estimator = cfg.inner();
  spec.seed = cfg.seed;
  spec.threads = cfg.threads;
  spec.oracle_m = cfg.oracle_m;
  return spec;
}

int run_sample(const RunConfig& cfg, std::ostream& out) {
  RngStream rng = RngStream::derive(cfg.seed, "cli_sample", 0);
  PairedSamples s;
  if (cfg.independent && cfg.model.family != ModelFamily::sinusoidal) {
    s = sample_joint(make_gaussian_model(cfg.model).independent(), cfg.n, rng);
  } else {
    s = sample_model(cfg.model, cfg.n, rng);
    if (cfg.independent) s = shift_pairs(s);
  }
  Sink sink(cfg.output, out);
  write_paired_csv(s, sink.stream());
  sink.finish(cfg.output);
  return 0;
}

int run_estimate(const RunConfig& cfg, std::ostream& out) {
  const PairedSamples s = read_paired_csv(cfg.input);
  emit(report_table(estimate_ksmi(s, cfg.ksmi_config(), cfg.norms)), cfg, out);
  return 0;
}

int run_gaussian(const RunConfig& cfg, std::ostream& out) {
  const GaussianJoint model = make_gaussian_model(cfg.model);
  const ExactKsmi exact = gaussian_ksmi_exact_mc(
      model, cfg.k, cfg.m, RngStream::derive(cfg.seed, "cli_gaussian", 0),
      cfg.threads);
  for (const auto& w : asymptotic_conditions(model).warnings) warn(w);
  Table t{{"k", "m", "exact_nats", "exact_std", "asymptotic_nats", "full_mi_nats"},
          {}};
  t.rows.push_back({static_cast<double>(cfg.k), static_cast<double>(cfg.m),
                    exact.estimate, exact.std,
                    gaussian_ksmi_asymptotic(model, cfg.k), gaussian_mi(model)});
  emit(t, cfg, out);
  return 0;
}

int run_bound(const RunConfig& cfg, std::ostream& out) {
  const OperatorNorms& n = *cfg.norms;
  Table t{{"k", "dx", "dy", "m", "constant", "bound_nats"}, {}};
  t.rows.push_back({static_cast<double>(cfg.k), static_cast<double>(cfg.dx),
                    static_cast<double>(cfg.dy), static_cast<double>(cfg.m),
                    bound_constant(n.sigma_x, n.sigma_y, n.fisher),
                    mc_error_bound(cfg.k, cfg.dx, cfg.dy, cfg.m, n.sigma_x,
                                   n.sigma_y, n.fisher)});
  emit(t, cfg, out);
  return 0;
}

int run_residual(const RunConfig& cfg, std::ostream& out) {
  const PairedSamples s = read_paired_csv(cfg.input);
  const ResidualReport r = residual_vs_gaussian(s, cfg.ksmi_config(), cfg.oracle_m);
  Table t{{"residual_nats", "ksmi_hat_nats", "ksmi_gauss_nats", "ksmi_hat_mc_std",
           "ksmi_gauss_mc_std"},
          {}};
  t.rows.push_back({r.residual, r.ksmi_hat, r.ksmi_gauss, r.ksmi_hat_mc_std,
                    r.ksmi_gauss_mc_std});
  emit(t, cfg, out);
  return 0;
}

int run_lipschitz(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const GaussianJoint model = make_gaussian_model(cfg.model);
  RngStream rng = RngStream::derive(cfg.seed, "cli_lipschitz", 0);
  const double gap = lipschitz_check(model, cfg.k, cfg.trials, rng);
  Table t{{"d", "k", "trials", "max_gap"}, {}};
  t.rows.push_back({static_cast<double>(cfg.model.d), static_cast<double>(cfg.k),
                    static_cast<double>(cfg.trials), gap});
  emit(t, cfg, out);
  if (gap > 1e-9) {
    err << "error: Lipschitz inequality violated by " << gap << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    switch (cfg.subcommand) {
      case Subcommand::sample:
        return run_sample(cfg, out);
      case Subcommand::estimate:
        return run_estimate(cfg, out);
      case Subcommand::gaussian:
        return run_gaussian(cfg, out);
      case Subcommand::bound:
        return run_bound(cfg, out);
      case Subcommand::residual:
        return run_residual(cfg, out);
      case Subcommand::bench_independence: {
        const Table t = independence_table(run_independence_benchmark(trial_spec(cfg)));
        emit(t, cfg, out);
        emit_plot(t, cfg, "n", "auc", {"d", "k"});
        return 0;
      }
      case Subcommand::bench_dimension: {
        const Table t = dimension_table(run_dimension_sweep(trial_spec(cfg)));
        emit(t, cfg, out);
        emit_plot(t, cfg, "d", "population_ksmi_nats", {"k"});
        return 0;
      }
      case Subcommand::bench_neural: {
        const Table t = neural_rate_table(run_neural_rate_sweep(trial_spec(cfg)));
        emit(t, cfg, out);
        emit_plot(t, cfg, "n", "abs_error_nats", {"k", "d"});
        return 0;
      }
      case Subcommand::check_lipschitz:
        return run_lipschitz(cfg, out, err);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
        const char* env_seed) {
  RunConfig cfg;
  try {
    cfg = parse_args(argc, argv, env_seed);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n"
        << "run 'ksmi --help' for the list of subcommands and flags\n";
    return 2;
  } catch (const HelpRequested& h) {
    out << h.what();
    return 0;
  }
  return dispatch(cfg, out, err);
}

}  // namespace ksmi::cli
