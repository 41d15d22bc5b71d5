#include "ksmi/kdtree.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ksmi/argsort.hpp"

namespace ksmi {

KdTree::KdTree(const Matrix& points, std::size_t leaf_size)
    : n_(static_cast<std::size_t>(points.rows())),
      dim_(static_cast<std::size_t>(points.cols())),
      leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
  if (n_ == 0 || dim_ == 0) {
    throw std::invalid_argument("KdTree: empty point set");
  }
  if (n_ > std::numeric_limits<std::uint32_t>::max() / 2) {
    throw std::invalid_argument("KdTree: too many points");
  }
  std::vector<std::uint32_t> order(n_);
  std::iota(order.begin(), order.end(), 0u);
  nodes_.reserve(4 * n_ / leaf_size_ + 2);
  build(0, static_cast<std::uint32_t>(n_), order, points);

  coords_.resize(n_ * dim_);
  position_.resize(n_);
  for (std::size_t slot = 0; slot < n_; ++slot) {
    const auto row = order[slot];
    position_[row] = static_cast<std::uint32_t>(slot);
    for (std::size_t c = 0; c < dim_; ++c) {
      coords_[slot * dim_ + c] = points(row, static_cast<Eigen::Index>(c));
    }
  }
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end,
                           std::vector<std::uint32_t>& order,
                           const Matrix& points) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({begin, end, -1, -1, 0, 0.0});
  lo_.resize(nodes_.size() * dim_);
  hi_.resize(nodes_.size() * dim_);

  std::size_t widest = 0;
  double widest_span = -1.0;
  for (std::size_t c = 0; c < dim_; ++c) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (auto i = begin; i < end; ++i) {
      const double v = points(order[i], static_cast<Eigen::Index>(c));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    lo_[id * dim_ + c] = lo;
    hi_[id * dim_ + c] = hi;
    if (hi - lo > widest_span) {
      widest_span = hi - lo;
      widest = c;
    }
  }
  if (end - begin <= leaf_size_ || widest_span <= 0.0) return id;

  const auto mid = begin + (end - begin) / 2;
  const auto col = static_cast<Eigen::Index>(widest);
  std::nth_element(order.begin() + begin, order.begin() + mid,
                   order.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return points(a, col) < points(b, col);
                   });
  nodes_[id].split_dim = static_cast<std::uint32_t>(widest);
  nodes_[id].split = points(order[mid], col);
  const auto left = build(begin, mid, order, points);
  const auto right = build(mid, end, order, points);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

namespace {

struct SearchItem {
  std::int32_t node;
  double bound;
};

template <int Dim>
inline double max_dist(const double* p, const double* q, std::size_t dim) {
  double d = 0.0;
  if constexpr (Dim > 0) {
    for (int c = 0; c < Dim; ++c) d = std::max(d, std::abs(p[c] - q[c]));
  } else {
    for (std::size_t c = 0; c < dim; ++c) d = std::max(d, std::abs(p[c] - q[c]));
  }
  return d;
}

}  // namespace

template <int Dim>
double KdTree::knn_impl(std::size_t self, std::size_t k) const {
  const double* q = &coords_[self * dim_];
  std::array<double, kMaxNeighbors> best;
  std::fill_n(best.begin(), k, std::numeric_limits<double>::infinity());
  double worst = best[k - 1];

  std::array<SearchItem, 128> stack;
  int top = 0;
  stack[top++] = {0, 0.0};
  while (top > 0) {
    const SearchItem item = stack[--top];
    if (item.bound >= worst) continue;
    const Node* node = &nodes_[item.node];
    while (node->left >= 0) {
      const double diff = q[node->split_dim] - node->split;
      const bool go_left = diff <= 0.0;
      const std::int32_t near = go_left ? node->left : node->right;
      const std::int32_t far = go_left ? node->right : node->left;
      const double far_bound = std::max(item.bound, std::abs(diff));
      stack[top] = {far, far_bound};
      top += far_bound < worst ? 1 : 0;
      node = &nodes_[near];
    }
    for (auto s = node->begin; s < node->end; ++s) {
      double t = s == self ? std::numeric_limits<double>::infinity()
                           : max_dist<Dim>(&coords_[s * dim_], q, dim_);
      // Branch-free insertion into the sorted list.
      for (std::size_t i = 0; i < k; ++i) {
        const double lo = std::min(best[i], t);
        t = std::max(best[i], t);
        best[i] = lo;
      }
    }
    worst = best[k - 1];
  }
  return worst;
}

double KdTree::knn_slot(std::size_t self, std::size_t k) const {
  switch (dim_) {
    case 1: return knn_impl<1>(self, k);
    case 2: return knn_impl<2>(self, k);
    case 3: return knn_impl<3>(self, k);
    case 4: return knn_impl<4>(self, k);
    case 6: return knn_impl<6>(self, k);
    default: return knn_impl<0>(self, k);
  }
}

double KdTree::kth_neighbor_distance(std::size_t index, std::size_t k) const {
  if (index >= n_) throw std::out_of_range("KdTree: index out of range");
  if (k < 1 || k >= n_ || k > kMaxNeighbors) {
    throw std::invalid_argument("KdTree: need 1 <= k < n and k <= 64");
  }
  return knn_slot(position_[index], k);
}

std::vector<double> KdTree::all_kth_neighbor_distances(std::size_t k) const {
  if (k < 1 || k >= n_ || k > kMaxNeighbors) {
    throw std::invalid_argument("KdTree: need 1 <= k < n and k <= 64");
  }
  // Tree order keeps consecutive queries close together.
  std::vector<double> by_slot(n_);
  for (std::size_t slot = 0; slot < n_; ++slot) by_slot[slot] = knn_slot(slot, k);
  std::vector<double> out(n_);
  for (std::size_t row = 0; row < n_; ++row) out[row] = by_slot[position_[row]];
  return out;
}

std::size_t KdTree::count_within(const double* query, double radius) const {
  if (!(radius > 0.0)) return 0;
  std::size_t count = 0;
  std::array<std::int32_t, 128> stack;
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const std::int32_t id = stack[--top];
    const Node& node = nodes_[id];
    const double* lo = &lo_[id * dim_];
    const double* hi = &hi_[id * dim_];
    bool outside = false;
    bool inside = true;
    for (std::size_t c = 0; c < dim_; ++c) {
      const double near = std::max(lo[c] - query[c], query[c] - hi[c]);
      if (near >= radius) {
        outside = true;
        break;
      }
      const double far = std::max(query[c] - lo[c], hi[c] - query[c]);
      if (far >= radius) inside = false;
    }
    if (outside) continue;
    if (inside) {
      count += node.end - node.begin;
      continue;
    }
    if (node.left < 0) {
      for (auto s = node.begin; s < node.end; ++s) {
        const double* p = &coords_[s * dim_];
        bool in = true;
        for (std::size_t c = 0; c < dim_; ++c) {
          if (!(std::abs(p[c] - query[c]) < radius)) {
            in = false;
            break;
          }
        }
        count += in ? 1 : 0;
      }
      continue;
    }
    stack[top++] = node.right;
    stack[top++] = node.left;
  }
  return count;
}

namespace {

// First position p in sorted[0, n) where pred(sorted[p]) holds; pred must be
// false then true along the array.
template <class Pred>
inline std::size_t first_true(const double* sorted, std::size_t n, Pred pred) {
  if (n == 0) return 0;
  std::size_t base = 0;
  std::size_t len = n;
  while (len > 1) {
    const std::size_t half = len / 2;
    base += half * static_cast<std::size_t>(!pred(sorted[base + half - 1]));
    len -= half;
  }
  return base + static_cast<std::size_t>(!pred(sorted[base]));
}

// Positions [lo, hi) of the sorted values s with |v - s| < r, using the same
// rounded differences as a direct distance computation. Floating-point
// subtraction is monotone, so both predicates switch exactly once.
struct Window {
  std::uint32_t lo;
  std::uint32_t hi;
};

inline Window open_window(const std::vector<double>& s, double v, double r) {
  const auto lo = first_true(s.data(), s.size(), [=](double x) { return v - x < r; });
  const auto hi = first_true(s.data(), s.size(), [=](double x) { return x - v >= r; });
  return {static_cast<std::uint32_t>(lo), static_cast<std::uint32_t>(std::max(lo, hi))};
}

std::vector<double> gather(const Matrix& points, Eigen::Index col,
                           const std::vector<std::uint32_t>& order) {
  std::vector<double> out(order.size());
  for (std::size_t p = 0; p < order.size(); ++p) out[p] = points(order[p], col);
  return out;
}

std::vector<std::size_t> count_1d(const Matrix& points,
                                  const std::vector<double>& radii) {
  const auto n = static_cast<std::size_t>(points.rows());
  const std::vector<double> sorted = gather(points, 0, argsort(points.data(), n));
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = points(static_cast<Eigen::Index>(i), 0);
    const double r = radii[i];
    if (!(r > 0.0)) {
      out[i] = 0;
      continue;
    }
    const Window w = open_window(sorted, v, r);  // self included
    const std::size_t inside = w.hi - w.lo;
    out[i] = inside > 0 ? inside - 1 : 0;
  }
  return out;
}

// Offline open-box counting in the plane. Points are sorted by x; the count
// for query i is F(hi_i) - F(lo_i), where F(p) counts points among the
// first p in x order whose y lies in (y_i - r, y_i + r). All F values are
// answered in one sweep over p with a Fenwick tree on y ranks.
std::vector<std::size_t> count_2d(const Matrix& points,
                                  const std::vector<double>& radii) {
  const auto n = static_cast<std::size_t>(points.rows());
  const std::vector<std::uint32_t> by_x = argsort(points.data(), n, 2);
  const std::vector<std::uint32_t> by_y = argsort(points.data() + 1, n, 2);
  const std::vector<double> xs = gather(points, 0, by_x);
  const std::vector<double> ys_sorted = gather(points, 1, by_y);
  // Rank of each point's y; tied values share the lowest position.
  std::vector<std::uint32_t> y_rank(n);
  for (std::size_t p = 0; p < n; ++p) {
    y_rank[by_y[p]] = (p > 0 && ys_sorted[p] == ys_sorted[p - 1])
                          ? y_rank[by_y[p - 1]]
                          : static_cast<std::uint32_t>(p);
  }

  // Ranks in [lo, hi) have y inside the window of query i.
  std::vector<Window> windows(n, Window{0, 0});
  std::vector<std::uint32_t> x_lo(n, 0), x_hi(n, 0);
  // Events bucketed by sweep position: after inserting p points in x order,
  // evaluate the y-window of each query whose lo or hi equals p.
  std::vector<std::uint32_t> event_start(n + 2, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = radii[i];
    if (!(r > 0.0)) continue;
    const double x = points(static_cast<Eigen::Index>(i), 0);
    const double y = points(static_cast<Eigen::Index>(i), 1);
    const Window xw = open_window(xs, x, r);
    x_lo[i] = xw.lo;
    x_hi[i] = xw.hi;
    windows[i] = open_window(ys_sorted, y, r);
    ++event_start[x_lo[i] + 1];
    ++event_start[x_hi[i] + 1];
  }
  for (std::size_t p = 1; p < event_start.size(); ++p) {
    event_start[p] += event_start[p - 1];
  }
  std::vector<std::uint32_t> cursor(event_start.begin(), event_start.end() - 1);
  // Query index times two, plus one for the upper end.
  std::vector<std::uint32_t> events(event_start[n + 1]);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(radii[i] > 0.0)) continue;
    events[cursor[x_lo[i]]++] = static_cast<std::uint32_t>(2 * i);
    events[cursor[x_hi[i]]++] = static_cast<std::uint32_t>(2 * i + 1);
  }

  std::vector<std::uint32_t> fenwick(n + 1, 0);
  const auto prefix = [&](std::uint32_t r) {  // count of ranks < r
    std::int64_t s = 0;
    for (; r > 0; r &= r - 1) s += fenwick[r];
    return s;
  };
  std::vector<std::int64_t> total(n, 0);
  for (std::size_t p = 0; p <= n; ++p) {
    for (auto e = event_start[p]; e < event_start[p + 1]; ++e) {
      const std::uint32_t q = events[e] >> 1;
      const std::int64_t inside = prefix(windows[q].hi) - prefix(windows[q].lo);
      const std::int64_t sign = 2 * static_cast<std::int64_t>(events[e] & 1u) - 1;
      total[q] += sign * inside;
    }
    if (p == n) break;
    for (std::uint32_t r = y_rank[by_x[p]] + 1; r <= n; r += r & (~r + 1)) {
      ++fenwick[r];
    }
  }
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = total[i] > 0 ? static_cast<std::size_t>(total[i] - 1) : 0;
  }
  return out;
}

}  // namespace

std::vector<std::size_t> count_all_within(const Matrix& points,
                                          const std::vector<double>& radii) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (radii.size() != n) {
    throw std::invalid_argument("count_all_within: one radius per row needed");
  }
  if (n == 0) return {};
  if (points.cols() == 1) return count_1d(points, radii);
  if (points.cols() == 2) return count_2d(points, radii);
  const KdTree tree(points);
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = tree.count_within(tree.point(i), radii[i]);
    out[i] = c > 0 ? c - 1 : 0;
  }
  return out;
}

}  // namespace ksmi
