#include "ksmi/matkit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ksmi {

StiefelFrame::StiefelFrame(Matrix cols) : cols_(std::move(cols)) {
  if (cols_.cols() < 1 || cols_.rows() < cols_.cols()) {
    throw std::invalid_argument("StiefelFrame: need 1 <= k <= d, got d=" +
                                std::to_string(cols_.rows()) +
                                " k=" + std::to_string(cols_.cols()));
  }
  const Matrix gram = cols_.transpose() * cols_;
  const double err =
      (gram - Matrix::Identity(gram.rows(), gram.cols())).norm();
  if (!(err < 1e-10)) {
    throw std::invalid_argument("StiefelFrame: columns not orthonormal (err " +
                                std::to_string(err) + ")");
  }
}

StiefelFrame StiefelFrame::coordinate(std::size_t d, std::size_t k) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d),
                          static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < std::min(d, k); ++i) {
    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
  }
  return StiefelFrame(std::move(m));
}

Matrix sample_gaussian_matrix(std::size_t rows, std::size_t cols,
                              RngStream& rng) {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("sample_gaussian_matrix: shape " +
                                std::to_string(rows) + "x" +
                                std::to_string(cols) + " is empty");
  }
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  double* data = m.data();
  for (std::size_t i = 0; i < rows * cols; ++i) {
    data[i] = rng.normal();
  }
  return m;
}

Matrix qr_orthonormalize(const Matrix& m) {
  const Eigen::Index rows = m.rows();
  const Eigen::Index cols = m.cols();
  if (cols < 1 || rows < cols) {
    throw std::invalid_argument("qr_orthonormalize: need rows >= cols >= 1");
  }
  double scale = 0.0;
  for (Eigen::Index j = 0; j < cols; ++j) {
    scale = std::max(scale, m.col(j).norm());
  }
  Eigen::MatrixXd q = m;  // column-major for column sweeps
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i < j; ++i) {
        const double r = q.col(i).dot(q.col(j));
        q.col(j) -= r * q.col(i);
      }
    }
    const double norm = q.col(j).norm();
    if (!(norm > 1e-12 * scale)) {
      throw std::domain_error("qr_orthonormalize: column " + std::to_string(j) +
                              " is linearly dependent (rank deficient)");
    }
    q.col(j) /= norm;
  }
  return q;
}

StiefelFrame sample_stiefel(std::size_t k, std::size_t d, RngStream& rng) {
  if (k < 1 || k > d) {
    throw std::invalid_argument("sample_stiefel: need 1 <= k <= d, got k=" +
                                std::to_string(k) + " d=" + std::to_string(d));
  }
  return StiefelFrame(qr_orthonormalize(sample_gaussian_matrix(d, k, rng)));
}

SymEig sym_eig(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("sym_eig: matrix is not square");
  }
  const double scale = m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
  const double asym =
      m.size() == 0 ? 0.0 : (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * std::max(scale, 1e-300)) {
    throw std::invalid_argument("sym_eig: matrix is not symmetric (asymmetry " +
                                std::to_string(asym) + ")");
  }
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw std::domain_error("sym_eig: eigen decomposition did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Matrix matrix_sqrt_psd(const Matrix& m) {
  SymEig eig = sym_eig(m);
  if (eig.values.size() == 0) return m;
  const double lmax = eig.values.maxCoeff();
  const double lmin = eig.values.minCoeff();
  if (lmin < -1e-8 * std::max(lmax, 0.0)) {
    throw std::domain_error("matrix_sqrt_psd: matrix is not PSD (eigenvalue " +
                            std::to_string(lmin) + ")");
  }
  Vector roots(eig.values.size());
  for (Eigen::Index i = 0; i < roots.size(); ++i) {
    const double l = eig.values(i);
    roots(i) = l < 1e-12 * lmax ? 0.0 : std::sqrt(l);
  }
  Matrix s = eig.vectors * roots.asDiagonal() * eig.vectors.transpose();
  return 0.5 * (s + s.transpose());
}

Matrix matrix_inv_sqrt_pd(const Matrix& m) {
  SymEig eig = sym_eig(m);
  if (eig.values.size() == 0) return m;
  const double lmax = eig.values.maxCoeff();
  const double lmin = eig.values.minCoeff();
  if (!(lmin > 1e-12 * lmax) || !(lmax > 0.0)) {
    throw std::domain_error(
        "matrix_inv_sqrt_pd: matrix is singular or not positive definite");
  }
  Vector inv_roots = eig.values.cwiseSqrt().cwiseInverse();
  Matrix s = eig.vectors * inv_roots.asDiagonal() * eig.vectors.transpose();
  return 0.5 * (s + s.transpose());
}

double log_det_pd(const Matrix& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw std::domain_error("log_det_pd: matrix is not positive definite");
  }
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

Matrix empirical_covariance(const Matrix& samples) {
  if (samples.rows() < 2) {
    throw std::invalid_argument("empirical_covariance: need at least 2 rows");
  }
  const Eigen::RowVectorXd mean = samples.colwise().mean();
  const Matrix centered = samples.rowwise() - mean;
  Matrix cov = (centered.transpose() * centered) /
               static_cast<double>(samples.rows() - 1);
  return 0.5 * (cov + cov.transpose());
}

double digamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::domain_error("digamma: argument must be positive and finite");
  }
  double shift = 0.0;
  while (x < 6.0) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Bernoulli-number asymptotic series, truncated after the x^-14 term.
  const double series =
      inv2 * (1.0 / 12 -
              inv2 * (1.0 / 120 -
                      inv2 * (1.0 / 252 -
                              inv2 * (1.0 / 240 -
                                      inv2 * (1.0 / 132 -
                                              inv2 * (691.0 / 32760 -
                                                      inv2 / 12.0))))));
  return shift + std::log(x) - 0.5 * inv - series;
}

Matrix hstack(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw std::invalid_argument("hstack: row counts differ");
  }
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

}  // namespace ksmi
