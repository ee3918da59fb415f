#include "patchpnp/random.hpp"

#include <cmath>
#include <numbers>

namespace patchpnp {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  return splitmix64(splitmix64(seed) ^ (salt * 0xD1B54A32D192ED03ULL));
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(derive_seed(seed, stream)) {}

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
  return splitmix64(key_ + counter * kGolden);
}

double CounterRng::uniform(std::uint64_t counter) const {
  return static_cast<double>((bits(counter) >> 11) + 1) * 0x1.0p-53;
}

std::uint64_t CounterRng::below(std::uint64_t counter, std::uint64_t n) const {
  const unsigned __int128 wide = static_cast<unsigned __int128>(bits(counter)) * n;
  return static_cast<std::uint64_t>(wide >> 64);
}

double CounterRng::gaussian(std::uint64_t counter) const {
  const double u1 = uniform(2 * counter);
  const double u2 = uniform(2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace patchpnp
