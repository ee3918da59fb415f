#include "patchpnp/schedule.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "patchpnp/random.hpp"

namespace patchpnp {

SigmaSchedule karras_sigmas(int n_steps, double sigma_min, double sigma_max, double rho) {
  if (n_steps < 2) throw std::invalid_argument("schedule needs at least 2 steps");
  if (!(sigma_min > 0.0) || !(sigma_max > sigma_min) || !std::isfinite(sigma_max)) {
    throw std::invalid_argument("schedule needs 0 < sigma_min < sigma_max");
  }
  if (!(rho > 0.0) || !std::isfinite(rho)) throw std::invalid_argument("schedule rho must be > 0");

  const double lo = std::pow(sigma_min, 1.0 / rho);
  const double hi = std::pow(sigma_max, 1.0 / rho);
  SigmaSchedule s;
  s.values_.resize(static_cast<std::size_t>(n_steps) + 1);
  for (int i = 0; i < n_steps; ++i) {
    const double t = static_cast<double>(i) / (n_steps - 1);
    s.values_[i] = std::pow(hi + t * (lo - hi), rho);
  }
  // pow round-trips are not exact; pin the endpoints.
  s.values_.front() = sigma_max;
  s.values_[n_steps - 1] = sigma_min;
  s.values_.back() = 0.0;
  for (int i = 1; i < n_steps; ++i) {
    if (!(s.values_[i] < s.values_[i - 1])) {
      throw std::invalid_argument("schedule is not strictly decreasing at step " +
                                  std::to_string(i));
    }
  }
  return s;
}

void renoise_in_place(const Image& x0_hat, Image& x, double sigma_cur, double sigma_next,
                      double zeta, std::uint64_t seed) {
  require_same_shape(x0_hat, x, "renoise");
  if (!(sigma_cur > 0.0)) throw std::invalid_argument("renoise: sigma_cur must be positive");
  if (!(sigma_next >= 0.0) || !(sigma_next < sigma_cur)) {
    throw std::invalid_argument("renoise: need 0 <= sigma_next < sigma_cur");
  }
  if (!(zeta >= 0.0 && zeta <= 1.0)) throw std::invalid_argument("renoise: zeta outside [0,1]");

  auto xd = x.data();
  const auto x0 = x0_hat.data();
  if (sigma_next == 0.0) {
    std::copy(x0.begin(), x0.end(), xd.begin());
    return;
  }
  const double keep = std::sqrt(1.0 - zeta);
  const double fresh = std::sqrt(zeta);
  const CounterRng rng(seed, /*stream=*/0x72656E6FULL);
  for (std::size_t i = 0; i < xd.size(); ++i) {
    const double eps_hat = (xd[i] - x0[i]) / sigma_cur;
    double noise = keep * eps_hat;
    if (zeta > 0.0) noise += fresh * rng.gaussian(i);
    xd[i] = x0[i] + sigma_next * noise;
  }
}

Image renoise(const Image& x0_hat, const Image& x_cur, double sigma_cur, double sigma_next,
              double zeta, std::uint64_t seed) {
  Image out = x_cur;
  renoise_in_place(x0_hat, out, sigma_cur, sigma_next, zeta, seed);
  return out;
}

}  // namespace patchpnp
