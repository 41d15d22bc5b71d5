#include "ksmi/samples.hpp"

#include <stdexcept>
#include <string>

namespace ksmi {

void PairedSamples::validate() const {
  if (x.rows() < 1 || x.rows() != y.rows()) {
    throw std::invalid_argument("PairedSamples: x has " +
                                std::to_string(x.rows()) + " rows, y has " +
                                std::to_string(y.rows()));
  }
  if (x.cols() < 1 || y.cols() < 1) {
    throw std::invalid_argument("PairedSamples: empty x or y block");
  }
  if (!x.allFinite() || !y.allFinite()) {
    throw std::invalid_argument("PairedSamples: non-finite entry");
  }
}

PairedSamples shift_pairs(const PairedSamples& s) {
  const Eigen::Index n = s.y.rows();
  PairedSamples out{s.x, Matrix(s.y.rows(), s.y.cols())};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.y.row(i) = s.y.row((i + 1) % n);
  }
  return out;
}

}  // namespace ksmi
