#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "ksmi/gaussmodel.hpp"
#include "ksmi/knn_mi.hpp"
#include "ksmi/matkit.hpp"
#include "ksmi/neural_mi.hpp"
#include "ksmi/samples.hpp"

namespace ksmi {

// Inner k-dimensional MI estimator: KSG or a DV-trained ReLU net.
using InnerEstimator = std::variant<KsgConfig, TrainConfig>;

struct KsmiConfig {
  std::size_t k = 1;
  std::size_t m = 100;
  InnerEstimator inner = KsgConfig{};
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void validate(std::size_t dx, std::size_t dy) const;
};

// Operator norms feeding the Monte-Carlo error bound.
struct OperatorNorms {
  double sigma_x = 0.0;  // ||Sigma_X||_op
  double sigma_y = 0.0;  // ||Sigma_Y||_op
  double fisher = 0.0;   // ||J_F(mu_XY)||_op
};

OperatorNorms operator_norms(const GaussianJoint& model);

struct KsmiReport {
  double estimate = 0.0;  // nats
  std::vector<double> per_projection_mi;
  double empirical_std = 0.0;  // 1/(m-1) sample std; 0 when m == 1
  std::optional<double> theory_bound;
  std::size_t k = 0;
  std::size_t m = 0;
  std::size_t n = 0;
};

// (A^T x_i, B^T y_i) for every row.
PairedSamples project_samples(const PairedSamples& samples,
                              const StiefelFrame& a, const StiefelFrame& b);

// Frame pair j of a run seeded with `seed`.
std::pair<StiefelFrame, StiefelFrame> projection_pair(std::uint64_t seed,
                                                      std::size_t j,
                                                      std::size_t k,
                                                      std::size_t dx,
                                                      std::size_t dy);

// Runs the inner estimator on one projected dataset; `j` keys the seed of
// a neural inner estimator.
double inner_mi(const PairedSamples& projected, const InnerEstimator& inner,
                std::uint64_t seed, std::size_t j);

// Average of the inner estimates over m i.i.d. Haar frame pairs. When norms
// are supplied, theory_bound is the Monte-Carlo part of the error bound at
// this m. A failure in any projection aborts with that projection's index.
KsmiReport estimate_ksmi(const PairedSamples& samples, const KsmiConfig& cfg,
                         const std::optional<OperatorNorms>& norms = {});

// 21 sqrt(fisher * max(sigma_x, sigma_y)).
double bound_constant(double sigma_x_op, double sigma_y_op, double fisher_op);

// C sqrt(k (dx + dy) / (dx dy)) / sqrt(m). The inner-estimator error term
// has no computable form and is left out.
double mc_error_bound(std::size_t k, std::size_t dx, std::size_t dy,
                      std::size_t m, double sigma_x_op, double sigma_y_op,
                      double fisher_op);

// Moment-matched Gaussian: blocks of the empirical covariance of (x, y),
// floored to PSD. Warns when n < dx + dy + 1.
GaussianJoint fit_gaussian_surrogate(const PairedSamples& samples);

struct ResidualReport {
  double residual = 0.0;    // ksmi_hat - ksmi_gauss
  double ksmi_hat = 0.0;
  double ksmi_gauss = 0.0;
  double ksmi_hat_mc_std = 0.0;    // empirical_std / sqrt(m)
  double ksmi_gauss_mc_std = 0.0;  // oracle std / sqrt(oracle_m)
};

// k-SMI of the data minus the exact k-SMI of its Gaussian surrogate.
ResidualReport residual_vs_gaussian(const PairedSamples& samples,
                                    const KsmiConfig& cfg,
                                    std::size_t oracle_m = 5000);

// Differential entropy of A^T X for X ~ N(0, sigma).
double projected_gaussian_entropy(const Matrix& sigma, const StiefelFrame& a);

// |h(A^T X) - h(B^T X)| - sqrt(k ||Sx^{-1}|| ||Sx||) ||A - B||_F for the
// X marginal of `model`; non-positive whenever the Lipschitz bound holds.
double lipschitz_gap(const GaussianJoint& model, const StiefelFrame& a,
                     const StiefelFrame& b);

// Checks |h(A^T X) - h(B^T X)| <= sqrt(k ||Sx^{-1}|| ||Sx||) ||A - B||_F on
// the X marginal over `trials` frame pairs and returns the largest
// LHS - RHS. Half the pairs are independent, half are small perturbations
// of one another so the local regime is exercised too.
double lipschitz_check(const GaussianJoint& model, std::size_t k,
                       std::size_t trials, RngStream& rng);

}  // namespace ksmi
