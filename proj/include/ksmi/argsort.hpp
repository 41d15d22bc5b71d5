#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ksmi {

// Stable ascending order of values[i * stride], i < n, by LSD radix sort on
// the IEEE bit patterns. -0.0 sorts equal to 0.0. Inputs must not be NaN.
std::vector<std::uint32_t> argsort(const double* values, std::size_t n,
                                   std::size_t stride = 1);

}  // namespace ksmi
