#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "ksmi/matkit.hpp"
#include "ksmi/samples.hpp"

namespace ksmi {

struct HiddenLayer {
  Matrix weights;  // out x in; row i is w_i
  Vector bias;     // b_i
};

/// ReLU potential over z = (u, v):
///
///   g(z) = sum_i beta_i relu(h_i(z)) + <w0, z> + b0
///
/// where h is the last of `layers` stacked affine-ReLU maps. With one hidden
/// layer this is the l-neuron class used for the DV bound; deeper stacks are
/// available for practical training but fall outside the constraint set.
/// The same struct carries gradients (one entry per parameter).
struct ReluNet {
  std::vector<HiddenLayer> layers;
  Vector beta;
  Vector skip_weights;  // w0
  double skip_bias = 0.0;  // b0

  std::size_t input_dim() const {
    return static_cast<std::size_t>(skip_weights.size());
  }
  std::size_t hidden() const { return static_cast<std::size_t>(beta.size()); }

  static ReluNet zeros(std::size_t input_dim, std::size_t hidden,
                       std::size_t depth = 1);
  // He-style weights, uniform hidden biases in [-1, 1], small output
  // weights, zero skip term.
  static ReluNet random(std::size_t input_dim, std::size_t hidden,
                        std::size_t depth, RngStream& rng);

  std::size_t parameter_count() const;
  Vector flatten() const;
  void assign(const Vector& params);
};

struct TrainConfig {
  std::size_t steps = 2000;
  std::size_t batch_size = 256;
  double learning_rate = 5e-3;
  double momentum = 0.9;
  std::size_t hidden = 64;  // l
  std::size_t depth = 1;
  bool constraint_projection = false;
  // Constraint bound a; defaults to max(log log l, 1).
  std::optional<double> bound;
  // Report the uniform average of all iterates instead of the last one.
  bool average_iterates = true;
  // When non-zero, record the full-sample DV value every this many steps.
  std::size_t checkpoint_every = 0;
  std::uint64_t seed = 0;

  void validate() const;
  double constraint_bound() const;
};

// g(z). Throws std::invalid_argument on a width mismatch.
double net_forward(const ReluNet& net, const Vector& z);
// g for every row of zs.
Vector net_forward_batch(const ReluNet& net, const Matrix& zs);

// mean_i g(pos_i) - log(mean_i exp g(neg_i)), log-sum-exp with max shift.
double dv_value(const ReluNet& net, const Matrix& pos, const Matrix& neg);

// Exact gradient of dv_value; ReLU'(0) = 0.
ReluNet net_gradient(const ReluNet& net, const Matrix& pos, const Matrix& neg);

// sigma(i) = i + 1 mod n; fixed-point free for n >= 2.
std::vector<std::size_t> derangement_shift(std::size_t n);

// Euclidean projection of v onto the l1 ball of the given radius.
Vector project_l1_ball(const Vector& v, double radius);

// Projects a single-hidden-layer net onto
//   ||w_i||_1 <= 1, |b_i| <= 1, |beta_i| <= a / (2l), ||w0||_1 <= a, |b0| <= a.
void project_onto_constraints(ReluNet& net, double bound);

// Rows (u_i, v_sigma(i)) for the given permutation of the v rows.
Matrix pair_rows(const Matrix& u, const Matrix& v,
                 const std::vector<std::size_t>& sigma);

struct DvTrainResult {
  double estimate = 0.0;  // full-sample DV value of the final net, nats
  ReluNet net;
  std::vector<double> checkpoints;
};

// Minibatch stochastic gradient ascent (momentum) on the DV objective, with
// optional iterate averaging.
// Positives are aligned rows, negatives shift the v half of each batch
// cyclically. Deterministic in cfg.seed.
DvTrainResult train_dv_mi(const PairedSamples& samples, const TrainConfig& cfg);

}  // namespace ksmi
