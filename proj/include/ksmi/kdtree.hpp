#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ksmi/matkit.hpp"

namespace ksmi {

/// Static k-d tree over the rows of a matrix, specialised for the two
/// queries the KSG estimator needs under the max-norm: the distance to the
/// k-th nearest other point, and the number of points strictly inside an
/// open max-norm ball. Point storage is permuted into tree order so every
/// leaf is a contiguous block.
class KdTree {
 public:
  static constexpr std::size_t kMaxNeighbors = 64;

  explicit KdTree(const Matrix& points, std::size_t leaf_size = 12);

  std::size_t size() const { return n_; }
  std::size_t dim() const { return dim_; }

  // Max-norm distance from point `index` (a row of the input) to its
  // k-th nearest other point. Requires 1 <= k < size() and k <= 64.
  double kth_neighbor_distance(std::size_t index, std::size_t k) const;

  // kth_neighbor_distance for every input row, in input order.
  std::vector<double> all_kth_neighbor_distances(std::size_t k) const;

  // Number of stored points p with ||p - query||_inf < radius, the query
  // row itself included when it is one of the stored points.
  std::size_t count_within(const double* query, double radius) const;

  // Pointer to the coordinates of input row `index`.
  const double* point(std::size_t index) const {
    return &coords_[position_[index] * dim_];
  }

 private:
  struct Node {
    std::uint32_t begin;
    std::uint32_t end;
    std::int32_t left;  // -1 for leaves
    std::int32_t right;
    std::uint32_t split_dim;
    double split;  // left values <= split <= right values
  };

  double knn_slot(std::size_t self, std::size_t k) const;
  template <int Dim>
  double knn_impl(std::size_t self, std::size_t k) const;

  std::int32_t build(std::uint32_t begin, std::uint32_t end,
                     std::vector<std::uint32_t>& order, const Matrix& points);

  std::size_t n_;
  std::size_t dim_;
  std::size_t leaf_size_;
  std::vector<double> coords_;           // tree order, n x dim
  std::vector<std::uint32_t> position_;  // input row -> tree slot
  std::vector<Node> nodes_;
  std::vector<double> lo_;  // per-node bounding box, nodes x dim
  std::vector<double> hi_;
};

// For every row i of `points` (1 or more columns), the number of other rows
// j with ||p_j - p_i||_inf < radii[i]. One- and two-column inputs use an
// offline sort/sweep; wider inputs fall back to a k-d tree.
std::vector<std::size_t> count_all_within(const Matrix& points,
                                          const std::vector<double>& radii);

}  // namespace ksmi
