#include "ksmi/argsort.hpp"

#include <array>
#include <bit>
#include <stdexcept>

namespace ksmi {

namespace {

// Monotone map from doubles to unsigned integers.
inline std::uint64_t order_key(double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v == 0.0 ? 0.0 : v);
  return (bits >> 63) ? ~bits : bits | (std::uint64_t{1} << 63);
}

}  // namespace

std::vector<std::uint32_t> argsort(const double* values, std::size_t n,
                                   std::size_t stride) {
  if (n > UINT32_MAX) throw std::invalid_argument("argsort: too many values");
  std::vector<std::uint64_t> keys(n), keys_tmp(n);
  std::vector<std::uint32_t> idx(n), idx_tmp(n);
  for (std::size_t i = 0; i < n; ++i) {
    keys[i] = order_key(values[i * stride]);
    idx[i] = static_cast<std::uint32_t>(i);
  }
  constexpr int kBits = 11;
  constexpr std::size_t kBuckets = std::size_t{1} << kBits;
  std::array<std::uint32_t, kBuckets> count;
  for (int shift = 0; shift < 64; shift += kBits) {
    count.fill(0);
    for (std::size_t i = 0; i < n; ++i) ++count[(keys[i] >> shift) & (kBuckets - 1)];
    // All keys share this digit: the pass would be the identity.
    if (n > 0 && count[(keys[0] >> shift) & (kBuckets - 1)] == n) continue;
    std::uint32_t sum = 0;
    for (auto& c : count) {
      const auto t = c;
      c = sum;
      sum += t;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto slot = count[(keys[i] >> shift) & (kBuckets - 1)]++;
      keys_tmp[slot] = keys[i];
      idx_tmp[slot] = idx[i];
    }
    keys.swap(keys_tmp);
    idx.swap(idx_tmp);
  }
  return idx;
}

}  // namespace ksmi
