#include "parkmatch/rng.hpp"

#include <cmath>

namespace parkmatch {
namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), key_(mix(mix(seed) ^ mix(stream * kGolden + 0x632be59bd9b4e019ULL))) {}

std::uint64_t Rng::next_u64() {
  ++counter_;
  return mix(key_ + counter_ * kGolden);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::size_t Rng::below(std::size_t n) {
  // Lemire's multiply-shift; the bias is below 2^-64 * n and irrelevant here.
  const unsigned __int128 product = static_cast<unsigned __int128>(next_u64()) * n;
  return static_cast<std::size_t>(product >> 64);
}

Eigen::Index Rng::sample(const Eigen::Ref<const Eigen::VectorXd>& probs) {
  const double total = probs.sum();
  const double target = uniform() * total;
  double cumulative = 0.0;
  Eigen::Index last_positive = -1;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last_positive = i;
    cumulative += probs[i];
    if (target < cumulative) return i;
  }
  return last_positive;
}

Rng Rng::split(std::uint64_t stream) const { return Rng(seed_, mix(stream_ + 1) ^ mix(stream * kGolden)); }

}  // namespace parkmatch
