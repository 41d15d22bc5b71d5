#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ksmi/matkit.hpp"
#include "ksmi/samples.hpp"

namespace ksmi {

/// Zero-mean joint Gaussian N(0, [[Sx, C], [C^T, Sy]]).
///
/// Construction validates that the assembled covariance is symmetric PSD and
/// precomputes the square roots used by the sampler and the projected-MI
/// oracle. When both marginal covariances are positive definite the
/// correlation matrix R = Sx^{-1/2} C Sy^{-1/2} is cached as well; MI
/// queries on a model with a singular marginal throw.
class GaussianJoint {
 public:
  GaussianJoint(Matrix sigma_x, Matrix sigma_y, Matrix cross);

  std::size_t dx() const { return static_cast<std::size_t>(sigma_x_.rows()); }
  std::size_t dy() const { return static_cast<std::size_t>(sigma_y_.rows()); }
  const Matrix& sigma_x() const { return sigma_x_; }
  const Matrix& sigma_y() const { return sigma_y_; }
  const Matrix& cross() const { return cross_; }
  Matrix joint_covariance() const;

  bool nondegenerate_marginals() const { return correlation_.has_value(); }
  // Throws std::domain_error for singular marginals.
  const Matrix& correlation() const;
  const Matrix& sqrt_x() const { return sqrt_x_; }
  const Matrix& sqrt_y() const { return sqrt_y_; }
  const Matrix& joint_sqrt() const { return joint_sqrt_; }

  // Same marginals, C = 0.
  GaussianJoint independent() const;
  // Model of (sX, sY).
  GaussianJoint scaled(double s) const;
  // Model of (U X, V Y) for orthogonal U, V.
  GaussianJoint rotated(const Matrix& u, const Matrix& v) const;
  // Model of ((X1, X2), (Y1, Y2)) with the two pairs independent.
  static GaussianJoint direct_sum(const GaussianJoint& a,
                                  const GaussianJoint& b);

 private:
  Matrix sigma_x_;
  Matrix sigma_y_;
  Matrix cross_;
  Matrix sqrt_x_;
  Matrix sqrt_y_;
  Matrix joint_sqrt_;
  std::optional<Matrix> correlation_;
};

enum class ModelFamily { common_signal, sinusoidal, isotropic };

std::string to_string(ModelFamily family);
// Accepts "common-signal"/"common_signal", "sinusoidal", "isotropic".
ModelFamily parse_family(const std::string& name);

struct SyntheticModelSpec {
  ModelFamily family = ModelFamily::common_signal;
  std::size_t d = 10;
  std::size_t rank = 2;        // common_signal only
  double coupling = 0.5;       // isotropic only: C = coupling * I
  std::uint64_t seed = 0;

  void validate() const;
};

// I(X;Y) = -1/2 log det(I - R R^T), nats.
double gaussian_mi(const GaussianJoint& model);

// I(A^T X; B^T Y) = -1/2 log det(I_k - Rt Rt^T) with Rt = At^T R Bt,
// At = Sx^{1/2} A (A^T Sx A)^{-1/2}, Bt likewise. Singular values of Rt
// are clamped to 1 - 1e-10.
double projected_gaussian_mi(const GaussianJoint& model, const StiefelFrame& a,
                             const StiefelFrame& b);

struct ExactKsmi {
  double estimate = 0.0;  // mean projected MI over the frames
  double std = 0.0;       // sample std (1/(m-1)) of the projected MI values
};

// Monte-Carlo k-SMI with the closed-form integrand: no sample noise, only
// frame noise. Frame j uses substreams ("frame_x", j) and ("frame_y", j)
// of `rng`.
ExactKsmi gaussian_ksmi_exact_mc(const GaussianJoint& model, std::size_t k,
                                 std::size_t m, const RngStream& rng,
                                 std::size_t threads = 1);

// Same as above but for several k at once with nested frames: the k-frame
// is the leading k columns of a shared max(ks)-frame. Leading columns of a
// Haar frame are Haar, and the coupling makes the projected MI monotone in k
// frame by frame.
std::vector<ExactKsmi> gaussian_ksmi_exact_mc_nested(
    const GaussianJoint& model, const std::vector<std::size_t>& ks,
    std::size_t m, const RngStream& rng, std::size_t threads = 1);

// Large-dimension value k^2 ||C||_F^2 / (2 tr(Sx) tr(Sy)).
double gaussian_ksmi_asymptotic(const GaussianJoint& model, std::size_t k);

struct AsymptoticConditions {
  double condition_x = 0.0;  // ||Sx|| ||Sx^{-1}||
  double condition_y = 0.0;
  double rho = 0.0;          // ||Sx^{-1/2} C Sy^{-1}||
  std::vector<std::string> warnings;
};

// Hypotheses behind the asymptotic formula. Violations become warnings.
AsymptoticConditions asymptotic_conditions(const GaussianJoint& model);

// ||Sigma_XY^{-1}||_op = 1 / lambda_min(Sigma_XY), the operator norm of the
// Gaussian Fisher information matrix.
double fisher_opnorm(const GaussianJoint& model);

PairedSamples sample_joint(const GaussianJoint& model, std::size_t n,
                           RngStream& rng);

// Sx = I + P1 P1^T, Sy = I + P2 P2^T, C = P1 P2^T with P1, P2 d x rank
// standard normal, i.e. X = P1 V + Z1, Y = P2 V + Z2 with V ~ N(0, I_rank).
GaussianJoint make_common_signal_model(std::size_t d, std::size_t rank,
                                       std::uint64_t seed);

// Sx = Sy = I_d, C = coupling * I_d. Requires |coupling| < 1.
GaussianJoint make_isotropic_model(std::size_t d, double coupling);

// Gaussian model for a Gaussian family spec; throws for sinusoidal.
GaussianJoint make_gaussian_model(const SyntheticModelSpec& spec);

// X ~ N(0, I_d), Y = (sin(1^T X) 1 / sqrt(d) + Z) / sqrt(2), Z ~ N(0, I_d).
PairedSamples sample_sinusoidal_model(std::size_t d, std::size_t n,
                                      RngStream& rng);

// Dependent samples from any family.
PairedSamples sample_model(const SyntheticModelSpec& spec, std::size_t n,
                           RngStream& rng);

}  // namespace ksmi
