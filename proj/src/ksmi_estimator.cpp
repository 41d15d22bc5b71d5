#include "ksmi/ksmi_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ksmi/diagnostics.hpp"
#include "ksmi/parallel.hpp"

namespace ksmi {

void KsmiConfig::validate(std::size_t dx, std::size_t dy) const {
  if (k < 1 || k > std::min(dx, dy)) {
    throw std::invalid_argument("k-SMI: need 1 <= k <= min(dx, dy) = " +
                                std::to_string(std::min(dx, dy)) +
                                ", got k=" + std::to_string(k));
  }
  if (m < 1) throw std::invalid_argument("k-SMI: need m >= 1");
  if (const auto* train = std::get_if<TrainConfig>(&inner)) train->validate();
}

OperatorNorms operator_norms(const GaussianJoint& model) {
  return {operator_norm(model.sigma_x()), operator_norm(model.sigma_y()),
          fisher_opnorm(model)};
}

PairedSamples project_samples(const PairedSamples& samples,
                              const StiefelFrame& a, const StiefelFrame& b) {
  if (a.d() != samples.dx() || b.d() != samples.dy() || a.k() != b.k()) {
    throw std::invalid_argument(
        "project_samples: frame shapes do not match the samples");
  }
  return {samples.x * a.cols(), samples.y * b.cols()};
}

std::pair<StiefelFrame, StiefelFrame> projection_pair(std::uint64_t seed,
                                                      std::size_t j,
                                                      std::size_t k,
                                                      std::size_t dx,
                                                      std::size_t dy) {
  RngStream fx = RngStream::derive(seed, "frames_x", j);
  RngStream fy = RngStream::derive(seed, "frames_y", j);
  StiefelFrame a = sample_stiefel(k, dx, fx);
  StiefelFrame b = sample_stiefel(k, dy, fy);
  return {std::move(a), std::move(b)};
}

double inner_mi(const PairedSamples& projected, const InnerEstimator& inner,
                std::uint64_t seed, std::size_t j) {
  if (const auto* ksg = std::get_if<KsgConfig>(&inner)) {
    return ksg_mi(projected, *ksg);
  }
  TrainConfig train = std::get<TrainConfig>(inner);
  train.seed = mix64(seed ^ stream_id("neural_projection", j));
  return train_dv_mi(projected, train).estimate;
}

KsmiReport estimate_ksmi(const PairedSamples& samples, const KsmiConfig& cfg,
                         const std::optional<OperatorNorms>& norms) {
  samples.validate();
  cfg.validate(samples.dx(), samples.dy());

  KsmiReport report;
  report.k = cfg.k;
  report.m = cfg.m;
  report.n = samples.n();
  report.per_projection_mi.assign(cfg.m, 0.0);

  parallel_for(cfg.m, cfg.threads, [&](std::size_t j) {
    try {
      const auto [a, b] =
          projection_pair(cfg.seed, j, cfg.k, samples.dx(), samples.dy());
      report.per_projection_mi[j] =
          inner_mi(project_samples(samples, a, b), cfg.inner, cfg.seed, j);
    } catch (const std::exception& e) {
      throw std::runtime_error("projection " + std::to_string(j) + ": " +
                               e.what());
    }
  });

  double sum = 0.0;
  for (double v : report.per_projection_mi) sum += v;
  report.estimate = sum / static_cast<double>(cfg.m);
  if (cfg.m > 1) {
    double ss = 0.0;
    for (double v : report.per_projection_mi) {
      ss += (v - report.estimate) * (v - report.estimate);
    }
    report.empirical_std = std::sqrt(ss / static_cast<double>(cfg.m - 1));
  }
  if (norms) {
    report.theory_bound =
        mc_error_bound(cfg.k, samples.dx(), samples.dy(), cfg.m,
                       norms->sigma_x, norms->sigma_y, norms->fisher);
  }
  return report;
}

double bound_constant(double sigma_x_op, double sigma_y_op, double fisher_op) {
  return 21.0 * std::sqrt(fisher_op * std::max(sigma_x_op, sigma_y_op));
}

double mc_error_bound(std::size_t k, std::size_t dx, std::size_t dy,
                      std::size_t m, double sigma_x_op, double sigma_y_op,
                      double fisher_op) {
  if (k < 1 || dx < 1 || dy < 1 || m < 1 || !(sigma_x_op > 0.0) ||
      !(sigma_y_op > 0.0) || !(fisher_op > 0.0)) {
    throw std::invalid_argument("mc_error_bound: all inputs must be positive");
  }
  const double kk = static_cast<double>(k);
  const double x = static_cast<double>(dx);
  const double y = static_cast<double>(dy);
  return bound_constant(sigma_x_op, sigma_y_op, fisher_op) *
         std::sqrt(kk * (x + y) / (x * y)) /
         std::sqrt(static_cast<double>(m));
}

GaussianJoint fit_gaussian_surrogate(const PairedSamples& samples) {
  samples.validate();
  if (samples.n() < 2) {
    throw std::invalid_argument("fit_gaussian_surrogate: need n >= 2");
  }
  if (samples.n() < samples.dx() + samples.dy() + 1) {
    warn("fit_gaussian_surrogate: n = " + std::to_string(samples.n()) +
         " is below dx + dy + 1; the fitted covariance is singular");
  }
  const Matrix cov = empirical_covariance(hstack(samples.x, samples.y));
  const SymEig eig = sym_eig(cov);
  const Matrix floored = eig.vectors *
                         eig.values.cwiseMax(0.0).asDiagonal() *
                         eig.vectors.transpose();
  const Matrix sym = 0.5 * (floored + floored.transpose());
  const auto dx = static_cast<Eigen::Index>(samples.dx());
  const auto dy = static_cast<Eigen::Index>(samples.dy());
  return GaussianJoint(sym.topLeftCorner(dx, dx), sym.bottomRightCorner(dy, dy),
                       sym.topRightCorner(dx, dy));
}

ResidualReport residual_vs_gaussian(const PairedSamples& samples,
                                    const KsmiConfig& cfg,
                                    std::size_t oracle_m) {
  const KsmiReport hat = estimate_ksmi(samples, cfg);
  const GaussianJoint surrogate = fit_gaussian_surrogate(samples);
  const ExactKsmi gauss = gaussian_ksmi_exact_mc(
      surrogate, cfg.k, oracle_m, RngStream::derive(cfg.seed, "residual_oracle", 0),
      cfg.threads);
  ResidualReport out;
  out.ksmi_hat = hat.estimate;
  out.ksmi_gauss = gauss.estimate;
  out.residual = hat.estimate - gauss.estimate;
  out.ksmi_hat_mc_std = hat.empirical_std / std::sqrt(static_cast<double>(cfg.m));
  out.ksmi_gauss_mc_std = gauss.std / std::sqrt(static_cast<double>(oracle_m));
  return out;
}

double projected_gaussian_entropy(const Matrix& sigma, const StiefelFrame& a) {
  if (static_cast<std::size_t>(sigma.rows()) != a.d()) {
    throw std::invalid_argument("projected_gaussian_entropy: shape mismatch");
  }
  const double k = static_cast<double>(a.k());
  const Matrix projected = a.cols().transpose() * sigma * a.cols();
  return 0.5 * (k * std::log(2.0 * std::numbers::pi * std::numbers::e) +
                log_det_pd(projected));
}

double lipschitz_gap(const GaussianJoint& model, const StiefelFrame& a,
                     const StiefelFrame& b) {
  const SymEig eig = sym_eig(model.sigma_x());
  const double lmin = eig.values.minCoeff();
  if (!(lmin > 0.0)) {
    throw std::domain_error("lipschitz_gap: X covariance is singular");
  }
  const double k = static_cast<double>(a.k());
  const double constant = std::sqrt(k * eig.values.maxCoeff() / lmin);
  const double lhs = std::abs(projected_gaussian_entropy(model.sigma_x(), a) -
                              projected_gaussian_entropy(model.sigma_x(), b));
  return lhs - constant * (a.cols() - b.cols()).norm();
}

double lipschitz_check(const GaussianJoint& model, std::size_t k,
                       std::size_t trials, RngStream& rng) {
  if (trials < 1) throw std::invalid_argument("lipschitz_check: trials >= 1");
  double worst = -INFINITY;
  for (std::size_t t = 0; t < trials; ++t) {
    RngStream ra = rng.substream("lipschitz_a", t);
    RngStream rb = rng.substream("lipschitz_b", t);
    const StiefelFrame a = sample_stiefel(k, model.dx(), ra);
    const StiefelFrame b = [&] {
      if (t % 2 == 0) return sample_stiefel(k, model.dx(), rb);
      const double step = std::pow(10.0, -4.0 + 4.0 * rb.uniform());
      return StiefelFrame(qr_orthonormalize(
          a.cols() + step * sample_gaussian_matrix(model.dx(), k, rb)));
    }();
    worst = std::max(worst, lipschitz_gap(model, a, b));
  }
  return worst;
}

}  // namespace ksmi
