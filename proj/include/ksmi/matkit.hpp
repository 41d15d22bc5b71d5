#pragma once

#include <cstddef>
#include <utility>

#include <Eigen/Dense>

#include "ksmi/rng.hpp"

namespace ksmi {

using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// d x k matrix with orthonormal columns.
class StiefelFrame {
 public:
  // Validates ||M^T M - I||_F < 1e-10; throws std::invalid_argument otherwise.
  explicit StiefelFrame(Matrix cols);

  // First k canonical axes of R^d.
  static StiefelFrame coordinate(std::size_t d, std::size_t k);

  std::size_t d() const { return static_cast<std::size_t>(cols_.rows()); }
  std::size_t k() const { return static_cast<std::size_t>(cols_.cols()); }
  const Matrix& cols() const { return cols_; }

 private:
  Matrix cols_;
};

// rows x cols matrix of i.i.d. N(0,1) draws, filled row-major from `rng`.
Matrix sample_gaussian_matrix(std::size_t rows, std::size_t cols,
                              RngStream& rng);

// Orthonormal basis of the column space via modified Gram-Schmidt with one
// reorthogonalization pass (Schwarz-Rutishauser). The implied R factor has a
// non-negative diagonal, which fixes the sign of every column.
// Throws std::domain_error when a column is dependent on its predecessors.
Matrix qr_orthonormalize(const Matrix& m);

// Haar-distributed frame on St(k, d): Gaussian d x k matrix, then QR.
StiefelFrame sample_stiefel(std::size_t k, std::size_t d, RngStream& rng);

struct SymEig {
  Vector values;   // ascending
  Matrix vectors;  // columns are eigenvectors
};

// Throws std::invalid_argument when asymmetry exceeds 1e-10 * max|m_ij|.
SymEig sym_eig(const Matrix& m);

// Symmetric PSD square root. Eigenvalues below 1e-12 * lambda_max are floored
// to zero; anything below -1e-8 * lambda_max is reported as not PSD.
Matrix matrix_sqrt_psd(const Matrix& m);

// Inverse square root of a symmetric positive definite matrix.
Matrix matrix_inv_sqrt_pd(const Matrix& m);

// log det of a symmetric positive definite matrix via Cholesky.
double log_det_pd(const Matrix& m);

// Largest singular value.
double operator_norm(const Matrix& m);

// Mean-centered covariance of the rows, normalized by n - 1.
Matrix empirical_covariance(const Matrix& samples);

// Digamma function for x > 0, accurate to about 1e-12.
double digamma(double x);

// Horizontal concatenation [a b].
Matrix hstack(const Matrix& a, const Matrix& b);

}  // namespace ksmi
