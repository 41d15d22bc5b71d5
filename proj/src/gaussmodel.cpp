#include "ksmi/gaussmodel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ksmi/diagnostics.hpp"
#include "ksmi/parallel.hpp"

namespace ksmi {

namespace {

constexpr double kMaxCorrelation = 1.0 - 1e-10;

Matrix assemble(const Matrix& sx, const Matrix& sy, const Matrix& c) {
  Matrix joint(sx.rows() + sy.rows(), sx.cols() + sy.cols());
  joint << sx, c, c.transpose(), sy;
  return joint;
}

// -1/2 sum log(1 - s_i^2) over the singular values s_i of r.
double log_det_mi(const Matrix& r) {
  const Matrix rrt = r * r.transpose();
  const SymEig eig = sym_eig(0.5 * (rrt + rrt.transpose()));
  double mi = 0.0;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    const double s2 =
        std::clamp(eig.values(i), 0.0, kMaxCorrelation * kMaxCorrelation);
    mi -= 0.5 * std::log1p(-s2);
  }
  return mi;
}

ExactKsmi summarize(const std::vector<double>& values) {
  ExactKsmi out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.estimate = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - out.estimate) * (v - out.estimate);
  out.std = values.size() > 1
                ? std::sqrt(ss / static_cast<double>(values.size() - 1))
                : 0.0;
  return out;
}

}  // namespace

GaussianJoint::GaussianJoint(Matrix sigma_x, Matrix sigma_y, Matrix cross)
    : sigma_x_(std::move(sigma_x)),
      sigma_y_(std::move(sigma_y)),
      cross_(std::move(cross)) {
  if (sigma_x_.rows() < 1 || sigma_x_.rows() != sigma_x_.cols() ||
      sigma_y_.rows() < 1 || sigma_y_.rows() != sigma_y_.cols() ||
      cross_.rows() != sigma_x_.rows() || cross_.cols() != sigma_y_.rows()) {
    throw std::invalid_argument("GaussianJoint: inconsistent block shapes");
  }
  try {
    sqrt_x_ = matrix_sqrt_psd(sigma_x_);
    sqrt_y_ = matrix_sqrt_psd(sigma_y_);
    joint_sqrt_ = matrix_sqrt_psd(assemble(sigma_x_, sigma_y_, cross_));
  } catch (const std::exception& e) {
    throw std::invalid_argument(
        std::string("GaussianJoint: covariance is not symmetric PSD: ") +
        e.what());
  }
  try {
    correlation_ = matrix_inv_sqrt_pd(sigma_x_) * cross_ *
                   matrix_inv_sqrt_pd(sigma_y_);
  } catch (const std::domain_error&) {
    correlation_.reset();
  }
}

Matrix GaussianJoint::joint_covariance() const {
  return assemble(sigma_x_, sigma_y_, cross_);
}

const Matrix& GaussianJoint::correlation() const {
  if (!correlation_) {
    throw std::domain_error("GaussianJoint: singular marginal covariance");
  }
  return *correlation_;
}

GaussianJoint GaussianJoint::independent() const {
  return GaussianJoint(sigma_x_, sigma_y_,
                       Matrix::Zero(cross_.rows(), cross_.cols()));
}

GaussianJoint GaussianJoint::scaled(double s) const {
  return GaussianJoint(s * s * sigma_x_, s * s * sigma_y_, s * s * cross_);
}

GaussianJoint GaussianJoint::rotated(const Matrix& u, const Matrix& v) const {
  return GaussianJoint(u * sigma_x_ * u.transpose(), v * sigma_y_ * v.transpose(),
                       u * cross_ * v.transpose());
}

GaussianJoint GaussianJoint::direct_sum(const GaussianJoint& a,
                                        const GaussianJoint& b) {
  const auto blockdiag = [](const Matrix& p, const Matrix& q) {
    Matrix out = Matrix::Zero(p.rows() + q.rows(), p.cols() + q.cols());
    out.topLeftCorner(p.rows(), p.cols()) = p;
    out.bottomRightCorner(q.rows(), q.cols()) = q;
    return out;
  };
  return GaussianJoint(blockdiag(a.sigma_x(), b.sigma_x()),
                       blockdiag(a.sigma_y(), b.sigma_y()),
                       blockdiag(a.cross(), b.cross()));
}

std::string to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::common_signal:
      return "common-signal";
    case ModelFamily::sinusoidal:
      return "sinusoidal";
    case ModelFamily::isotropic:
      return "isotropic";
  }
  return "unknown";
}

ModelFamily parse_family(const std::string& name) {
  if (name == "common-signal" || name == "common_signal") {
    return ModelFamily::common_signal;
  }
  if (name == "sinusoidal") return ModelFamily::sinusoidal;
  if (name == "isotropic") return ModelFamily::isotropic;
  throw std::invalid_argument("unknown model family '" + name + "'");
}

void SyntheticModelSpec::validate() const {
  if (d < 1) throw std::invalid_argument("model: d must be >= 1");
  if (family == ModelFamily::common_signal && (rank < 1 || rank > d)) {
    throw std::invalid_argument("model: need 1 <= rank <= d");
  }
  if (family == ModelFamily::isotropic && !(std::abs(coupling) < 1.0)) {
    throw std::invalid_argument("model: isotropic coupling must be in (-1, 1)");
  }
}

double gaussian_mi(const GaussianJoint& model) {
  const Matrix& r = model.correlation();
  if (operator_norm(r) >= kMaxCorrelation) {
    throw std::domain_error(
        "gaussian_mi: correlation operator norm reaches 1 (infinite MI)");
  }
  return log_det_mi(r);
}

double projected_gaussian_mi(const GaussianJoint& model, const StiefelFrame& a,
                             const StiefelFrame& b) {
  if (a.d() != model.dx() || b.d() != model.dy() || a.k() != b.k()) {
    throw std::invalid_argument(
        "projected_gaussian_mi: frame shapes do not match the model");
  }
  const Matrix& r = model.correlation();
  const Matrix ax = a.cols().transpose() * model.sigma_x() * a.cols();
  const Matrix by = b.cols().transpose() * model.sigma_y() * b.cols();
  const Matrix a_tilde = model.sqrt_x() * a.cols() * matrix_inv_sqrt_pd(ax);
  const Matrix b_tilde = model.sqrt_y() * b.cols() * matrix_inv_sqrt_pd(by);
  return log_det_mi(a_tilde.transpose() * r * b_tilde);
}

ExactKsmi gaussian_ksmi_exact_mc(const GaussianJoint& model, std::size_t k,
                                 std::size_t m, const RngStream& rng,
                                 std::size_t threads) {
  return gaussian_ksmi_exact_mc_nested(model, {k}, m, rng, threads).front();
}

std::vector<ExactKsmi> gaussian_ksmi_exact_mc_nested(
    const GaussianJoint& model, const std::vector<std::size_t>& ks,
    std::size_t m, const RngStream& rng, std::size_t threads) {
  if (ks.empty()) throw std::invalid_argument("exact k-SMI: empty k list");
  const std::size_t kmax = *std::max_element(ks.begin(), ks.end());
  for (std::size_t k : ks) {
    if (k < 1 || k > std::min(model.dx(), model.dy())) {
      throw std::invalid_argument("exact k-SMI: need 1 <= k <= min(dx, dy)");
    }
  }
  if (m < 2) throw std::invalid_argument("exact k-SMI: need m >= 2");
  model.correlation();  // fail early on singular marginals

  std::vector<std::vector<double>> values(ks.size(), std::vector<double>(m));
  parallel_for(m, threads, [&](std::size_t j) {
    RngStream fx = rng.substream("frame_x", j);
    RngStream fy = rng.substream("frame_y", j);
    const StiefelFrame a = sample_stiefel(kmax, model.dx(), fx);
    const StiefelFrame b = sample_stiefel(kmax, model.dy(), fy);
    for (std::size_t t = 0; t < ks.size(); ++t) {
      const auto k = static_cast<Eigen::Index>(ks[t]);
      if (ks[t] == kmax) {
        values[t][j] = projected_gaussian_mi(model, a, b);
      } else {
        values[t][j] = projected_gaussian_mi(
            model, StiefelFrame(a.cols().leftCols(k)),
            StiefelFrame(b.cols().leftCols(k)));
      }
    }
  });
  std::vector<ExactKsmi> out;
  out.reserve(ks.size());
  for (const auto& v : values) out.push_back(summarize(v));
  return out;
}

double gaussian_ksmi_asymptotic(const GaussianJoint& model, std::size_t k) {
  const double kk = static_cast<double>(k);
  return kk * kk * model.cross().squaredNorm() /
         (2.0 * model.sigma_x().trace() * model.sigma_y().trace());
}

AsymptoticConditions asymptotic_conditions(const GaussianJoint& model) {
  AsymptoticConditions out;
  const SymEig ex = sym_eig(model.sigma_x());
  const SymEig ey = sym_eig(model.sigma_y());
  const double min_x = ex.values.minCoeff();
  const double min_y = ey.values.minCoeff();
  if (!(min_x > 0.0) || !(min_y > 0.0)) {
    out.condition_x = min_x > 0.0 ? ex.values.maxCoeff() / min_x : INFINITY;
    out.condition_y = min_y > 0.0 ? ey.values.maxCoeff() / min_y : INFINITY;
    out.rho = INFINITY;
    out.warnings.push_back("singular marginal covariance");
  } else {
    out.condition_x = ex.values.maxCoeff() / min_x;
    out.condition_y = ey.values.maxCoeff() / min_y;
    const Matrix inv_y = ey.vectors * ey.values.cwiseInverse().asDiagonal() *
                         ey.vectors.transpose();
    out.rho = operator_norm(matrix_inv_sqrt_pd(model.sigma_x()) *
                            model.cross() * inv_y);
    if (out.rho >= 1.0) {
      out.warnings.push_back(
          "correlation bound ||Sx^{-1/2} C Sy^{-1}||_op = " +
          std::to_string(out.rho) +
          " is not below 1; the asymptotic value is outside its guarantee");
    }
  }
  for (const auto& w : out.warnings) warn(w);
  return out;
}

double fisher_opnorm(const GaussianJoint& model) {
  const SymEig eig = sym_eig(model.joint_covariance());
  const double lmin = eig.values.minCoeff();
  if (!(lmin > 1e-12 * eig.values.maxCoeff())) {
    throw std::domain_error("fisher_opnorm: joint covariance is singular");
  }
  return 1.0 / lmin;
}

PairedSamples sample_joint(const GaussianJoint& model, std::size_t n,
                           RngStream& rng) {
  if (n < 1) throw std::invalid_argument("sample_joint: need n >= 1");
  const Matrix z = sample_gaussian_matrix(n, model.dx() + model.dy(), rng);
  const Matrix joint = z * model.joint_sqrt();
  const auto dx = static_cast<Eigen::Index>(model.dx());
  const auto dy = static_cast<Eigen::Index>(model.dy());
  return {joint.leftCols(dx), joint.rightCols(dy)};
}

GaussianJoint make_common_signal_model(std::size_t d, std::size_t rank,
                                       std::uint64_t seed) {
  SyntheticModelSpec{ModelFamily::common_signal, d, rank, 0.0, seed}.validate();
  RngStream r1 = RngStream::derive(seed, "signal_loading_x", 0);
  RngStream r2 = RngStream::derive(seed, "signal_loading_y", 0);
  const Matrix p1 = sample_gaussian_matrix(d, rank, r1);
  const Matrix p2 = sample_gaussian_matrix(d, rank, r2);
  const auto dd = static_cast<Eigen::Index>(d);
  return GaussianJoint(Matrix::Identity(dd, dd) + p1 * p1.transpose(),
                       Matrix::Identity(dd, dd) + p2 * p2.transpose(),
                       p1 * p2.transpose());
}

GaussianJoint make_isotropic_model(std::size_t d, double coupling) {
  SyntheticModelSpec{ModelFamily::isotropic, d, 1, coupling, 0}.validate();
  const auto dd = static_cast<Eigen::Index>(d);
  return GaussianJoint(Matrix::Identity(dd, dd), Matrix::Identity(dd, dd),
                       coupling * Matrix::Identity(dd, dd));
}

GaussianJoint make_gaussian_model(const SyntheticModelSpec& spec) {
  spec.validate();
  switch (spec.family) {
    case ModelFamily::common_signal:
      return make_common_signal_model(spec.d, spec.rank, spec.seed);
    case ModelFamily::isotropic:
      return make_isotropic_model(spec.d, spec.coupling);
    case ModelFamily::sinusoidal:
      break;
  }
  throw std::invalid_argument(
      "the sinusoidal family has no Gaussian closed form");
}

PairedSamples sample_sinusoidal_model(std::size_t d, std::size_t n,
                                      RngStream& rng) {
  if (d < 1 || n < 1) {
    throw std::invalid_argument("sample_sinusoidal_model: need d, n >= 1");
  }
  PairedSamples out{sample_gaussian_matrix(n, d, rng),
                    sample_gaussian_matrix(n, d, rng)};
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  const double inv_sqrt_2 = 1.0 / std::sqrt(2.0);
  for (Eigen::Index i = 0; i < out.x.rows(); ++i) {
    const double signal = std::sin(out.x.row(i).sum()) * inv_sqrt_d;
    out.y.row(i) = (out.y.row(i).array() + signal) * inv_sqrt_2;
  }
  return out;
}

PairedSamples sample_model(const SyntheticModelSpec& spec, std::size_t n,
                           RngStream& rng) {
  spec.validate();
  if (spec.family == ModelFamily::sinusoidal) {
    return sample_sinusoidal_model(spec.d, n, rng);
  }
  return sample_joint(make_gaussian_model(spec), n, rng);
}

}  // namespace ksmi
