#include "ksmi/neural_mi.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace ksmi {

namespace {

struct ForwardCache {
  std::vector<Matrix> pre;   // pre-activations per layer
  std::vector<Matrix> post;  // ReLU outputs per layer
  Vector output;
};

void check_width(const ReluNet& net, Eigen::Index width) {
  if (static_cast<std::size_t>(width) != net.input_dim()) {
    throw std::invalid_argument("ReluNet: input width " + std::to_string(width) +
                                " does not match input_dim " +
                                std::to_string(net.input_dim()));
  }
}

ForwardCache forward(const ReluNet& net, const Matrix& zs) {
  check_width(net, zs.cols());
  ForwardCache cache;
  const Matrix* input = &zs;
  for (const auto& layer : net.layers) {
    Matrix pre = (*input) * layer.weights.transpose();
    pre.rowwise() += layer.bias.transpose();
    cache.pre.push_back(pre);
    cache.post.push_back(pre.cwiseMax(0.0));
    input = &cache.post.back();
  }
  cache.output = (*input) * net.beta + zs * net.skip_weights;
  cache.output.array() += net.skip_bias;
  return cache;
}

// Adds sum_r coeff_r * d g(z_r) / d theta into grad.
void backprop(const ReluNet& net, const Matrix& zs, const ForwardCache& cache,
              const Vector& coeff, ReluNet& grad) {
  const std::size_t depth = net.layers.size();
  grad.beta += cache.post.back().transpose() * coeff;
  grad.skip_weights += zs.transpose() * coeff;
  grad.skip_bias += coeff.sum();

  // delta = d(sum_r coeff_r g_r) / d pre_L
  Matrix delta = coeff * net.beta.transpose();
  for (std::size_t l = depth; l-- > 0;) {
    delta = delta.cwiseProduct(
        (cache.pre[l].array() > 0.0).cast<double>().matrix());
    const Matrix& input = l == 0 ? zs : cache.post[l - 1];
    grad.layers[l].weights += delta.transpose() * input;
    grad.layers[l].bias += delta.colwise().sum().transpose();
    if (l > 0) delta = delta * net.layers[l].weights;
  }
}

double log_mean_exp(const Vector& g) {
  const double top = g.maxCoeff();
  return top + std::log((g.array() - top).exp().mean());
}

}  // namespace

ReluNet ReluNet::zeros(std::size_t input_dim, std::size_t hidden,
                       std::size_t depth) {
  if (input_dim < 1 || hidden < 1 || depth < 1) {
    throw std::invalid_argument("ReluNet: input_dim, hidden, depth must be >= 1");
  }
  ReluNet net;
  const auto h = static_cast<Eigen::Index>(hidden);
  for (std::size_t l = 0; l < depth; ++l) {
    const auto in = static_cast<Eigen::Index>(l == 0 ? input_dim : hidden);
    net.layers.push_back({Matrix::Zero(h, in), Vector::Zero(h)});
  }
  net.beta = Vector::Zero(h);
  net.skip_weights = Vector::Zero(static_cast<Eigen::Index>(input_dim));
  net.skip_bias = 0.0;
  return net;
}

ReluNet ReluNet::random(std::size_t input_dim, std::size_t hidden,
                        std::size_t depth, RngStream& rng) {
  ReluNet net = zeros(input_dim, hidden, depth);
  for (auto& layer : net.layers) {
    const double scale = std::sqrt(2.0 / static_cast<double>(layer.weights.cols()));
    for (Eigen::Index i = 0; i < layer.weights.size(); ++i) {
      layer.weights.data()[i] = scale * rng.normal();
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
      layer.bias(i) = 2.0 * rng.uniform() - 1.0;
    }
  }
  const double out_scale = 0.1 / std::sqrt(static_cast<double>(hidden));
  for (Eigen::Index i = 0; i < net.beta.size(); ++i) {
    net.beta(i) = out_scale * rng.normal();
  }
  return net;
}

std::size_t ReluNet::parameter_count() const {
  std::size_t count = static_cast<std::size_t>(beta.size() + skip_weights.size() + 1);
  for (const auto& layer : layers) {
    count += static_cast<std::size_t>(layer.weights.size() + layer.bias.size());
  }
  return count;
}

Vector ReluNet::flatten() const {
  Vector out(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index at = 0;
  const auto put = [&](const double* data, Eigen::Index size) {
    out.segment(at, size) = Eigen::Map<const Vector>(data, size);
    at += size;
  };
  for (const auto& layer : layers) {
    put(layer.weights.data(), layer.weights.size());
    put(layer.bias.data(), layer.bias.size());
  }
  put(beta.data(), beta.size());
  put(skip_weights.data(), skip_weights.size());
  out(at) = skip_bias;
  return out;
}

void ReluNet::assign(const Vector& params) {
  if (static_cast<std::size_t>(params.size()) != parameter_count()) {
    throw std::invalid_argument("ReluNet::assign: parameter count mismatch");
  }
  Eigen::Index at = 0;
  const auto take = [&](double* data, Eigen::Index size) {
    Eigen::Map<Vector>(data, size) = params.segment(at, size);
    at += size;
  };
  for (auto& layer : layers) {
    take(layer.weights.data(), layer.weights.size());
    take(layer.bias.data(), layer.bias.size());
  }
  take(beta.data(), beta.size());
  take(skip_weights.data(), skip_weights.size());
  skip_bias = params(at);
}

void TrainConfig::validate() const {
  if (steps < 1) throw std::invalid_argument("train: steps must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("train: learning_rate must be > 0");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw std::invalid_argument("train: momentum must be in [0, 1)");
  }
  if (hidden < 1 || depth < 1) {
    throw std::invalid_argument("train: hidden and depth must be >= 1");
  }
  if (constraint_projection && depth != 1) {
    throw std::invalid_argument(
        "train: constraint projection needs a single hidden layer");
  }
  if (bound && !(*bound > 0.0)) {
    throw std::invalid_argument("train: constraint bound must be > 0");
  }
}

double TrainConfig::constraint_bound() const {
  if (bound) return *bound;
  const double l = static_cast<double>(hidden);
  // log log l is undefined or negative for l < e; the max with 1 covers it.
  if (l <= std::exp(1.0)) return 1.0;
  return std::max(std::log(std::log(l)), 1.0);
}

double net_forward(const ReluNet& net, const Vector& z) {
  check_width(net, z.size());
  return net_forward_batch(net, z.transpose())(0);
}

Vector net_forward_batch(const ReluNet& net, const Matrix& zs) {
  return forward(net, zs).output;
}

double dv_value(const ReluNet& net, const Matrix& pos, const Matrix& neg) {
  if (pos.rows() < 1 || neg.rows() < 1 || pos.cols() != neg.cols()) {
    throw std::invalid_argument("dv_value: need non-empty batches of equal width");
  }
  return net_forward_batch(net, pos).mean() -
         log_mean_exp(net_forward_batch(net, neg));
}

ReluNet net_gradient(const ReluNet& net, const Matrix& pos, const Matrix& neg) {
  if (pos.rows() < 1 || neg.rows() < 1 || pos.cols() != neg.cols()) {
    throw std::invalid_argument(
        "net_gradient: need non-empty batches of equal width");
  }
  ReluNet grad = ReluNet::zeros(net.input_dim(), net.hidden(), net.layers.size());
  const ForwardCache fp = forward(net, pos);
  const ForwardCache fn = forward(net, neg);

  const Vector pos_coeff =
      Vector::Constant(pos.rows(), 1.0 / static_cast<double>(pos.rows()));
  // d/dg_i of -log mean exp g is -softmax(g)_i.
  Vector neg_coeff = (fn.output.array() - fn.output.maxCoeff()).exp().matrix();
  neg_coeff /= -neg_coeff.sum();

  backprop(net, pos, fp, pos_coeff, grad);
  backprop(net, neg, fn, neg_coeff, grad);
  return grad;
}

std::vector<std::size_t> derangement_shift(std::size_t n) {
  if (n < 2) {
    throw std::invalid_argument("derangement_shift: need n >= 2");
  }
  std::vector<std::size_t> sigma(n);
  for (std::size_t i = 0; i < n; ++i) sigma[i] = (i + 1) % n;
  return sigma;
}

Vector project_l1_ball(const Vector& v, double radius) {
  if (v.lpNorm<1>() <= radius) return v;
  std::vector<double> mags(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) mags[i] = std::abs(v(i));
  std::sort(mags.begin(), mags.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < mags.size(); ++j) {
    cumulative += mags[j];
    const double candidate = (cumulative - radius) / static_cast<double>(j + 1);
    if (mags[j] - candidate > 0.0) theta = candidate;
  }
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double shrunk = std::max(std::abs(v(i)) - theta, 0.0);
    out(i) = v(i) < 0.0 ? -shrunk : shrunk;
  }
  return out;
}

void project_onto_constraints(ReluNet& net, double bound) {
  if (net.layers.size() != 1) {
    throw std::invalid_argument(
        "project_onto_constraints: needs a single hidden layer");
  }
  HiddenLayer& layer = net.layers.front();
  for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
    layer.weights.row(i) =
        project_l1_ball(layer.weights.row(i).transpose(), 1.0).transpose();
  }
  layer.bias = layer.bias.cwiseMax(-1.0).cwiseMin(1.0);
  const double beta_cap = bound / (2.0 * static_cast<double>(net.hidden()));
  net.beta = net.beta.cwiseMax(-beta_cap).cwiseMin(beta_cap);
  net.skip_weights = project_l1_ball(net.skip_weights, bound);
  net.skip_bias = std::clamp(net.skip_bias, -bound, bound);
}

Matrix pair_rows(const Matrix& u, const Matrix& v,
                 const std::vector<std::size_t>& sigma) {
  if (u.rows() != v.rows() ||
      static_cast<std::size_t>(u.rows()) != sigma.size()) {
    throw std::invalid_argument("pair_rows: row counts differ");
  }
  Matrix out(u.rows(), u.cols() + v.cols());
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    out.row(i) << u.row(i), v.row(static_cast<Eigen::Index>(sigma[i]));
  }
  return out;
}

DvTrainResult train_dv_mi(const PairedSamples& samples, const TrainConfig& cfg) {
  samples.validate();
  cfg.validate();
  const std::size_t n = samples.n();
  if (n < 2) throw std::invalid_argument("train_dv_mi: need n >= 2");

  const auto dx = samples.x.cols();
  const auto dy = samples.y.cols();
  const Matrix positives = hstack(samples.x, samples.y);
  const Matrix negatives = pair_rows(samples.x, samples.y, derangement_shift(n));
  const double bound = cfg.constraint_bound();

  RngStream init_rng = RngStream::derive(cfg.seed, "dv_init", 0);
  RngStream batch_rng = RngStream::derive(cfg.seed, "dv_batches", 0);
  DvTrainResult result;
  result.net = ReluNet::random(static_cast<std::size_t>(dx + dy), cfg.hidden,
                               cfg.depth, init_rng);
  if (cfg.constraint_projection) project_onto_constraints(result.net, bound);

  const std::size_t batch = std::clamp<std::size_t>(cfg.batch_size, 2, n);
  const auto b = static_cast<Eigen::Index>(batch);
  Matrix pos(b, dx + dy);
  Matrix neg(b, dx + dy);
  std::vector<Eigen::Index> rows(batch);
  Vector params = result.net.flatten();
  Vector velocity = Vector::Zero(params.size());
  Vector average = params;
  ReluNet reported = result.net;

  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    for (auto& r : rows) r = static_cast<Eigen::Index>(batch_rng.below(n));
    for (Eigen::Index j = 0; j < b; ++j) {
      pos.row(j) = positives.row(rows[j]);
      neg.row(j) << samples.x.row(rows[j]), samples.y.row(rows[(j + 1) % b]);
    }
    const Vector grad = net_gradient(result.net, pos, neg).flatten();
    velocity = cfg.momentum * velocity + grad;
    params += cfg.learning_rate * velocity;
    result.net.assign(params);
    if (cfg.constraint_projection) {
      project_onto_constraints(result.net, bound);
      params = result.net.flatten();
    }
    if (cfg.average_iterates) average += (params - average) / static_cast<double>(step);
    if (cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0) {
      if (cfg.average_iterates) reported.assign(average);
      const ReluNet& now = cfg.average_iterates ? reported : result.net;
      result.checkpoints.push_back(dv_value(now, positives, negatives));
    }
  }
  // The constraint set is convex, so the average stays inside it.
  if (cfg.average_iterates) result.net.assign(average);
  result.estimate = dv_value(result.net, positives, negatives);
  return result;
}

}  // namespace ksmi
