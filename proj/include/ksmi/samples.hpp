#pragma once

#include <cstddef>

#include "ksmi/matkit.hpp"

namespace ksmi {

// n paired observations; row i of x pairs with row i of y.
struct PairedSamples {
  Matrix x;
  Matrix y;

  std::size_t n() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t dx() const { return static_cast<std::size_t>(x.cols()); }
  std::size_t dy() const { return static_cast<std::size_t>(y.cols()); }

  // Throws std::invalid_argument on mismatched rows, empty data, or any
  // non-finite entry.
  void validate() const;
};

// y rows moved by the cyclic shift i -> i+1 (mod n); marginals preserved,
// pairing broken.
PairedSamples shift_pairs(const PairedSamples& s);

}  // namespace ksmi
