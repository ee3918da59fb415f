#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "patchpnp/image.hpp"

namespace patchpnp {

/// Decreasing noise levels sigma_0 > ... > sigma_{N-1} > 0, plus the
/// terminal sigma_N = 0. Variance-exploding convention: x_t = x_0 + sigma_t eps.
class SigmaSchedule {
 public:
  int n_steps() const { return static_cast<int>(values_.size()) - 1; }
  /// i in [0, N]; sigma(N) == 0.
  double sigma(int i) const { return values_.at(static_cast<std::size_t>(i)); }
  std::span<const double> values() const { return values_; }

  double sigma_max() const { return values_.front(); }
  double sigma_min() const { return values_[values_.size() - 2]; }

 private:
  friend SigmaSchedule karras_sigmas(int, double, double, double);
  std::vector<double> values_;
};

struct ScheduleParams {
  int n_steps = 50;
  double sigma_min = 0.01;
  double sigma_max = 10.0;
  double rho = 7.0;
};

/// sigma_i = (smax^(1/rho) + i/(N-1) (smin^(1/rho) - smax^(1/rho)))^rho, endpoints exact.
SigmaSchedule karras_sigmas(int n_steps, double sigma_min, double sigma_max, double rho = 7.0);
inline SigmaSchedule karras_sigmas(const ScheduleParams& p) {
  return karras_sigmas(p.n_steps, p.sigma_min, p.sigma_max, p.rho);
}

/// Return-to-manifold step:
///   x_next = x0_hat + sigma_next (sqrt(1-zeta) eps_hat + sqrt(zeta) g),
///   eps_hat = (x_cur - x0_hat) / sigma_cur, g ~ CounterRng(seed).
Image renoise(const Image& x0_hat, const Image& x_cur, double sigma_cur, double sigma_next,
              double zeta, std::uint64_t seed);

/// Same as renoise() but overwrites `x` (holding x_cur) with x_next.
void renoise_in_place(const Image& x0_hat, Image& x, double sigma_cur, double sigma_next,
                      double zeta, std::uint64_t seed);

}  // namespace patchpnp
