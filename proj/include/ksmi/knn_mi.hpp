#pragma once

#include <cstddef>

#include "ksmi/matkit.hpp"
#include "ksmi/samples.hpp"

namespace ksmi {

struct KsgConfig {
  std::size_t k_neighbors = 3;
  // Tie-breaking noise, relative to each coordinate's standard deviation.
  double jitter_scale = 1e-10;
};

// Joint data as the KSG estimator sees it: rows sorted lexicographically
// (x block, then y block) and perturbed by deterministic jitter keyed to the
// sorted data. Everything downstream is a function of this matrix, so the
// estimate does not depend on the order of the input rows.
struct KsgPrepared {
  Matrix joint;  // n x (dx + dy)
  std::size_t dx = 0;
  std::size_t dy = 0;
};

KsgPrepared prepare_ksg_data(const PairedSamples& samples,
                             const KsgConfig& cfg);

// Kraskov-Stoegbauer-Grassberger estimator (algorithm 1), in nats:
//   psi(k) + psi(n) - mean_i [psi(n_x(i) + 1) + psi(n_y(i) + 1)]
// with max-norm distances, eps(i) the joint k-th neighbor distance and
// n_x, n_y the marginal counts strictly inside eps(i). Not clamped at zero.
double ksg_mi(const PairedSamples& samples, const KsgConfig& cfg = {});

// Same estimator on already-prepared data.
double ksg_mi_prepared(const KsgPrepared& prepared, std::size_t k_neighbors);

// Max-norm distance from row `index` of `points` to its k-th nearest other
// row. Builds a k-d tree per call; use KdTree directly for repeated queries.
double knn_radius(const Matrix& points, std::size_t index,
                  std::size_t k_neighbors);

// Number of other rows at max-norm distance strictly less than `radius`.
std::size_t count_within(const Matrix& points, std::size_t index,
                         double radius);

}  // namespace ksmi
