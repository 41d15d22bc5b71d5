#include "ksmi/rng.hpp"

namespace ksmi {

namespace {
constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t stream_id(std::string_view purpose, std::uint64_t index) {
  return mix64(hash_tag(purpose) ^ mix64(index + kGoldenGamma));
}

RngStream::RngStream(std::uint64_t base_seed, std::uint64_t stream)
    : base_seed_(base_seed),
      stream_(stream),
      key_(mix64(mix64(base_seed) ^ mix64(stream + kGoldenGamma))) {}

RngStream RngStream::derive(std::uint64_t base_seed, std::string_view purpose,
                            std::uint64_t index) {
  return RngStream(base_seed, stream_id(purpose, index));
}

RngStream RngStream::substream(std::string_view purpose,
                               std::uint64_t index) const {
  return RngStream(base_seed_, mix64(stream_ + stream_id(purpose, index)));
}

RngStream::result_type RngStream::operator()() {
  ++counter_;
  return mix64(key_ + counter_ * kGoldenGamma);
}

double RngStream::uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double RngStream::normal() { return normal_(*this); }

std::uint64_t RngStream::below(std::uint64_t bound) {
  std::uniform_int_distribution<std::uint64_t> dist(0, bound - 1);
  return dist(*this);
}

}  // namespace ksmi
