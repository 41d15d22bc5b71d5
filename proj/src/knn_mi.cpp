#include "ksmi/knn_mi.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "ksmi/argsort.hpp"
#include "ksmi/kdtree.hpp"

namespace ksmi {

namespace {

constexpr double kEulerGamma = 0.57721566490153286061;

// psi(i) for i = 0..n (entry 0 unused) by the recurrence psi(i+1) = psi(i) + 1/i.
std::vector<double> integer_digamma(std::size_t n) {
  std::vector<double> table(n + 1, 0.0);
  if (n >= 1) table[1] = -kEulerGamma;
  for (std::size_t i = 1; i < n; ++i) {
    table[i + 1] = table[i] + 1.0 / static_cast<double>(i);
  }
  return table;
}

}  // namespace

KsgPrepared prepare_ksg_data(const PairedSamples& samples,
                             const KsgConfig& cfg) {
  samples.validate();
  const Matrix joint = hstack(samples.x, samples.y);
  const auto n = static_cast<std::size_t>(joint.rows());
  const auto dim = joint.cols();

  // Lexicographic row order: radix sort on the first column, then settle
  // runs of equal leading values by comparing the remaining columns.
  std::vector<std::uint32_t> order = argsort(joint.data(), n, static_cast<std::size_t>(dim));
  const auto lex_less = [&](std::uint32_t a, std::uint32_t b) {
    for (Eigen::Index c = 1; c < dim; ++c) {
      const double va = joint(a, c);
      const double vb = joint(b, c);
      if (va != vb) return va < vb;
    }
    return false;
  };
  for (std::size_t lo = 0; lo < n;) {
    std::size_t hi = lo + 1;
    while (hi < n && joint(order[hi], 0) == joint(order[lo], 0)) ++hi;
    if (hi - lo > 1) std::stable_sort(order.begin() + lo, order.begin() + hi, lex_less);
    lo = hi;
  }

  KsgPrepared out{Matrix(joint.rows(), dim), samples.dx(), samples.dy()};
  std::uint64_t hash = 0x6A09E667F3BCC908ULL;
  for (std::size_t i = 0; i < n; ++i) {
    const auto src = static_cast<Eigen::Index>(order[i]);
    for (Eigen::Index c = 0; c < dim; ++c) {
      const double v = joint(src, c);
      out.joint(static_cast<Eigen::Index>(i), c) = v;
      // -0.0 and 0.0 compare equal in the sort, so hash them alike.
      hash = mix64(hash ^ std::bit_cast<std::uint64_t>(v == 0.0 ? 0.0 : v));
    }
  }

  if (cfg.jitter_scale > 0.0) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      const auto column = out.joint.col(c);
      const double mean = column.mean();
      double var = 0.0;
      for (Eigen::Index i = 0; i < column.size(); ++i) {
        var += (column(i) - mean) * (column(i) - mean);
      }
      double scale =
          n > 1 ? std::sqrt(var / static_cast<double>(n - 1)) : 0.0;
      if (!(scale > 0.0)) scale = std::max(std::abs(mean), 1.0);
      RngStream rng(hash, stream_id("ksg_jitter", static_cast<std::uint64_t>(c)));
      for (Eigen::Index i = 0; i < column.size(); ++i) {
        out.joint(i, c) += cfg.jitter_scale * scale * (2.0 * rng.uniform() - 1.0);
      }
    }
  }
  return out;
}

double ksg_mi_prepared(const KsgPrepared& prepared, std::size_t k_neighbors) {
  const auto n = static_cast<std::size_t>(prepared.joint.rows());
  if (k_neighbors < 1 || n <= k_neighbors) {
    throw std::invalid_argument("ksg_mi: need 1 <= k_neighbors < n (k=" +
                                std::to_string(k_neighbors) +
                                ", n=" + std::to_string(n) + ")");
  }
  const auto dx = static_cast<Eigen::Index>(prepared.dx);
  const auto dy = static_cast<Eigen::Index>(prepared.dy);
  const KdTree joint_tree(prepared.joint);
  const std::vector<double> eps = joint_tree.all_kth_neighbor_distances(k_neighbors);
  const Matrix xs = prepared.joint.leftCols(dx);
  const Matrix ys = prepared.joint.rightCols(dy);
  const std::vector<std::size_t> cx = count_all_within(xs, eps);
  const std::vector<std::size_t> cy = count_all_within(ys, eps);
  const std::vector<double> psi = integer_digamma(n);

  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += psi[cx[i] + 1] + psi[cy[i] + 1];
  return psi[k_neighbors] + psi[n] - sum / static_cast<double>(n);
}

double ksg_mi(const PairedSamples& samples, const KsgConfig& cfg) {
  if (samples.n() <= cfg.k_neighbors || cfg.k_neighbors < 1) {
    throw std::invalid_argument("ksg_mi: need 1 <= k_neighbors < n (k=" +
                                std::to_string(cfg.k_neighbors) +
                                ", n=" + std::to_string(samples.n()) + ")");
  }
  return ksg_mi_prepared(prepare_ksg_data(samples, cfg), cfg.k_neighbors);
}

double knn_radius(const Matrix& points, std::size_t index,
                  std::size_t k_neighbors) {
  if (index >= static_cast<std::size_t>(points.rows())) {
    throw std::out_of_range("knn_radius: index out of range");
  }
  return KdTree(points).kth_neighbor_distance(index, k_neighbors);
}

std::size_t count_within(const Matrix& points, std::size_t index,
                         double radius) {
  if (index >= static_cast<std::size_t>(points.rows())) {
    throw std::out_of_range("count_within: index out of range");
  }
  if (!(radius > 0.0)) return 0;
  const KdTree tree(points);
  const std::size_t c = tree.count_within(tree.point(index), radius);
  return c > 0 ? c - 1 : 0;
}

}  // namespace ksmi
