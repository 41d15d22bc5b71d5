#include "ksmi/bench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ksmi/parallel.hpp"

namespace ksmi {

namespace {

std::vector<std::size_t> sorted(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

bool is_gaussian(const TrialSpec& spec) {
  if (std::holds_alternative<GaussianJoint>(spec.model)) return true;
  return std::get<SyntheticModelSpec>(spec.model).family !=
         ModelFamily::sinusoidal;
}

// Dimensions the grid actually visits.
std::vector<std::size_t> dims(const TrialSpec& spec) {
  if (const auto* g = std::get_if<GaussianJoint>(&spec.model)) {
    return {std::min(g->dx(), g->dy())};
  }
  return sorted(spec.d_grid);
}

GaussianJoint gaussian_at(const TrialSpec& spec, std::size_t d) {
  if (const auto* g = std::get_if<GaussianJoint>(&spec.model)) return *g;
  SyntheticModelSpec s = std::get<SyntheticModelSpec>(spec.model);
  s.d = d;
  return make_gaussian_model(s);
}

std::uint64_t cell_key(std::size_t d, std::size_t k, std::size_t n) {
  return mix64(mix64(mix64(d) ^ k) ^ n);
}

}  // namespace

void TrialSpec::validate() const {
  if (n_grid.empty() || k_grid.empty() || d_grid.empty()) {
    throw std::invalid_argument("benchmark: grids must be non-empty");
  }
  if (trials < 1) throw std::invalid_argument("benchmark: trials must be >= 1");
  if (m < 1) throw std::invalid_argument("benchmark: m must be >= 1");
  for (auto k : k_grid) {
    if (k < 1) throw std::invalid_argument("benchmark: k must be >= 1");
  }
  if (const auto* s = std::get_if<SyntheticModelSpec>(&model)) {
    for (auto d : d_grid) {
      SyntheticModelSpec copy = *s;
      copy.d = d;
      copy.validate();
    }
  }
}

std::vector<RocPoint> roc_curve(const std::vector<double>& null_scores,
                                const std::vector<double>& dep_scores) {
  if (null_scores.empty() || dep_scores.empty()) {
    throw std::invalid_argument("roc_curve: score sets must be non-empty");
  }
  std::vector<double> thresholds(null_scores);
  thresholds.insert(thresholds.end(), dep_scores.begin(), dep_scores.end());
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());

  std::vector<double> nulls(null_scores);
  std::vector<double> deps(dep_scores);
  std::sort(nulls.begin(), nulls.end());
  std::sort(deps.begin(), deps.end());
  const auto at_least = [](const std::vector<double>& v, double t) {
    return static_cast<double>(v.end() - std::lower_bound(v.begin(), v.end(), t)) /
           static_cast<double>(v.size());
  };

  std::vector<RocPoint> roc;
  roc.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  for (double t : thresholds) {
    roc.push_back({t, at_least(deps, t), at_least(nulls, t)});
  }
  return roc;
}

double auc_trapezoid(const std::vector<RocPoint>& roc) {
  double area = 0.0;
  for (std::size_t i = 1; i < roc.size(); ++i) {
    area += 0.5 * (roc[i].fpr - roc[i - 1].fpr) * (roc[i].tpr + roc[i - 1].tpr);
  }
  return area;
}

double auc_from_scores(const std::vector<double>& null_scores,
                       const std::vector<double>& dep_scores) {
  if (null_scores.empty() || dep_scores.empty()) {
    throw std::invalid_argument("auc_from_scores: score sets must be non-empty");
  }
  std::vector<double> nulls(null_scores);
  std::sort(nulls.begin(), nulls.end());
  // Twice the Mann-Whitney count keeps the accumulation in exact integers.
  std::uint64_t twice_u = 0;
  for (double s : dep_scores) {
    const auto lo = std::lower_bound(nulls.begin(), nulls.end(), s);
    const auto hi = std::upper_bound(lo, nulls.end(), s);
    twice_u += 2 * static_cast<std::uint64_t>(lo - nulls.begin()) +
               static_cast<std::uint64_t>(hi - lo);
  }
  return static_cast<double>(twice_u) /
         (2.0 * static_cast<double>(nulls.size()) *
          static_cast<double>(dep_scores.size()));
}

ScoreSets independence_scores(const TrialSpec& spec, std::size_t d,
                              std::size_t k, std::size_t n) {
  spec.validate();
  const std::uint64_t key = cell_key(d, k, n);
  const RngStream root = RngStream::derive(spec.seed, "independence", key);

  std::optional<GaussianJoint> dependent;
  std::optional<GaussianJoint> null;
  SyntheticModelSpec sample_spec;
  if (is_gaussian(spec)) {
    dependent = gaussian_at(spec, d);
    null = dependent->independent();
  } else {
    sample_spec = std::get<SyntheticModelSpec>(spec.model);
    sample_spec.d = d;
  }

  ScoreSets out;
  out.dep_scores.assign(spec.trials, 0.0);
  out.null_scores.assign(spec.trials, 0.0);
  parallel_for(2 * spec.trials, spec.threads, [&](std::size_t task) {
    const bool is_dep = task % 2 == 0;
    const std::size_t t = task / 2;
    RngStream data_rng = root.substream(is_dep ? "dep_data" : "null_data", t);
    PairedSamples data;
    if (dependent) {
      data = sample_joint(is_dep ? *dependent : *null, n, data_rng);
    } else {
      data = sample_model(sample_spec, n, data_rng);
      if (!is_dep) data = shift_pairs(data);
    }
    KsmiConfig cfg;
    cfg.k = k;
    cfg.m = spec.m;
    cfg.inner = spec.estimator;
    cfg.seed = root.substream(is_dep ? "dep_frames" : "null_frames", t)();
    cfg.threads = 1;
    const double score = estimate_ksmi(data, cfg).estimate;
    (is_dep ? out.dep_scores : out.null_scores)[t] = score;
  });
  return out;
}

std::vector<IndependenceRow> run_independence_benchmark(const TrialSpec& spec) {
  spec.validate();
  std::vector<IndependenceRow> rows;
  for (std::size_t d : dims(spec)) {
    for (std::size_t k : sorted(spec.k_grid)) {
      if (k > d) continue;
      for (std::size_t n : sorted(spec.n_grid)) {
        const ScoreSets scores = independence_scores(spec, d, k, n);
        rows.push_back({d, k, n, auc_from_scores(scores.null_scores,
                                                 scores.dep_scores)});
      }
    }
  }
  return rows;
}

std::vector<DimensionRow> run_dimension_sweep(const TrialSpec& spec) {
  spec.validate();
  if (!is_gaussian(spec)) {
    throw std::invalid_argument("dimension sweep needs a Gaussian model");
  }
  if (spec.m < 2) throw std::invalid_argument("dimension sweep needs m >= 2");
  std::vector<DimensionRow> rows;
  for (std::size_t d : dims(spec)) {
    const GaussianJoint model = gaussian_at(spec, d);
    const OperatorNorms norms = operator_norms(model);
    for (std::size_t k : sorted(spec.k_grid)) {
      if (k > std::min(model.dx(), model.dy())) continue;
      const ExactKsmi exact = gaussian_ksmi_exact_mc(
          model, k, spec.m,
          RngStream::derive(spec.seed, "dimension_sweep", cell_key(d, k, 0)),
          spec.threads);
      rows.push_back({d, k, exact.estimate, exact.std,
                      mc_error_bound(k, model.dx(), model.dy(), 1,
                                     norms.sigma_x, norms.sigma_y,
                                     norms.fisher)});
    }
  }
  return rows;
}

std::vector<NeuralRateRow> run_neural_rate_sweep(const TrialSpec& spec) {
  spec.validate();
  if (!is_gaussian(spec)) {
    throw std::invalid_argument("neural rate sweep needs a Gaussian model");
  }
  if (!std::holds_alternative<TrainConfig>(spec.estimator)) {
    throw std::invalid_argument("neural rate sweep needs a neural estimator");
  }
  std::vector<NeuralRateRow> rows;
  for (std::size_t k : sorted(spec.k_grid)) {
    for (std::size_t d : dims(spec)) {
      const GaussianJoint model = gaussian_at(spec, d);
      if (k > std::min(model.dx(), model.dy())) continue;
      const double truth =
          gaussian_ksmi_exact_mc(
              model, k, spec.oracle_m,
              RngStream::derive(spec.seed, "neural_truth", cell_key(d, k, 0)),
              spec.threads)
              .estimate;
      for (std::size_t n : sorted(spec.n_grid)) {
        RngStream data_rng =
            RngStream::derive(spec.seed, "neural_data", cell_key(d, k, n));
        const PairedSamples data = sample_joint(model, n, data_rng);
        KsmiConfig cfg;
        cfg.k = k;
        cfg.m = n;
        cfg.inner = spec.estimator;
        cfg.seed = mix64(spec.seed ^ cell_key(d, k, n));
        cfg.threads = spec.threads;
        const double estimate = estimate_ksmi(data, cfg).estimate;
        rows.push_back({k, d, n, estimate, truth, std::abs(estimate - truth)});
      }
    }
  }
  return rows;
}

}  // namespace ksmi
