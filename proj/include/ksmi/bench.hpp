#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "ksmi/gaussmodel.hpp"
#include "ksmi/ksmi_estimator.hpp"

namespace ksmi {

// One benchmark configuration. A SyntheticModelSpec is instantiated once per
// entry of d_grid; a fixed GaussianJoint ignores d_grid.
struct TrialSpec {
  std::variant<SyntheticModelSpec, GaussianJoint> model = SyntheticModelSpec{};
  std::vector<std::size_t> n_grid{1000};
  std::vector<std::size_t> k_grid{1};
  std::vector<std::size_t> d_grid{10};
  std::size_t m = 1000;
  std::size_t trials = 100;
  InnerEstimator estimator = KsgConfig{};
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  // Frames used for exact Gaussian ground truth.
  std::size_t oracle_m = 5000;

  void validate() const;
};

struct RocPoint {
  double threshold = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
};

// Threshold sweep over every distinct score, "dependent" declared when
// score >= threshold. Starts at (0, 0) and ends at (1, 1).
std::vector<RocPoint> roc_curve(const std::vector<double>& null_scores,
                                const std::vector<double>& dep_scores);

// Trapezoid area under a ROC curve.
double auc_trapezoid(const std::vector<RocPoint>& roc);

// Mann-Whitney statistic P(dep > null) + P(dep == null) / 2, exact.
double auc_from_scores(const std::vector<double>& null_scores,
                       const std::vector<double>& dep_scores);

struct ScoreSets {
  std::vector<double> null_scores;
  std::vector<double> dep_scores;
};

// k-SMI estimates from `trials` dependent datasets and `trials` null
// datasets of size n. The null keeps both marginals: C = 0 for Gaussian
// models, a cyclic shift of the y rows for sample-defined ones.
ScoreSets independence_scores(const TrialSpec& spec, std::size_t d,
                              std::size_t k, std::size_t n);

struct IndependenceRow {
  std::size_t d = 0;
  std::size_t k = 0;
  std::size_t n = 0;
  double auc = 0.0;
};

// AUC for every (d, k, n) cell, sorted by (d, k, n). Cells with k > d are
// skipped.
std::vector<IndependenceRow> run_independence_benchmark(const TrialSpec& spec);

struct DimensionRow {
  std::size_t d = 0;
  std::size_t k = 0;
  double population_ksmi = 0.0;  // exact-oracle mean, nats
  double empirical_std = 0.0;    // per-projection std of the exact MI
  double theory_bound = 0.0;     // C(mu) sqrt(k (dx + dy) / (dx dy))
};

// Exact-oracle k-SMI and its per-projection spread over the grid, with the
// coefficient of m^{-1/2} in the MC error bound alongside. Gaussian
// families only.
std::vector<DimensionRow> run_dimension_sweep(const TrialSpec& spec);

struct NeuralRateRow {
  std::size_t k = 0;
  std::size_t d = 0;
  std::size_t n = 0;  // also the number of projections m
  double estimate = 0.0;
  double truth = 0.0;
  double abs_error = 0.0;
};

// Neural k-SMI with n = m growing along n_grid, against the exact oracle.
// spec.estimator must hold a TrainConfig.
std::vector<NeuralRateRow> run_neural_rate_sweep(const TrialSpec& spec);

}  // namespace ksmi
