#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "patchpnp/image.hpp"

namespace patchpnp {

/// Sigma-conditioned denoiser D(x, sigma) used as the plug-and-play prior.
/// Implementations must be pure: denoise/vjp are called concurrently on
/// independent patches.
class DenoiserPrior {
 public:
  virtual ~DenoiserPrior() = default;

  virtual Image denoise(const Image& x, double sigma) const = 0;
  /// (dD/dx)^T v at (x, sigma).
  virtual Image vjp(const Image& x, double sigma, const Image& v) const = 0;
  /// Max pixel distance over which an output depends on its input.
  virtual int receptive_radius() const = 0;
  /// Scratch memory one denoise/vjp call holds for a height x width input,
  /// excluding its input and output.
  virtual std::size_t workspace_bytes(int height, int width) const = 0;
  virtual std::string name() const = 0;
};

/// Exact MMSE denoiser for x ~ N(mu, tau^2 I): mu + (x - mu) tau^2 / (tau^2 + sigma^2).
class GaussianAnalyticPrior final : public DenoiserPrior {
 public:
  explicit GaussianAnalyticPrior(double tau, double mu = 0.0);

  double tau() const { return tau_; }
  double mu() const { return mu_; }
  double shrinkage(double sigma) const;

  Image denoise(const Image& x, double sigma) const override;
  Image vjp(const Image& x, double sigma, const Image& v) const override;
  int receptive_radius() const override { return 0; }
  std::size_t workspace_bytes(int, int) const override { return 0; }
  std::string name() const override { return "gaussian"; }

 private:
  double tau_;
  double mu_;
};

/// Odd-sized, non-negative kernel normalized to unit sum.
class ConvKernel {
 public:
  ConvKernel(int size, std::vector<double> weights);

  static ConvKernel box(int size);
  /// Outer product of binomial coefficients, e.g. [1 2 1]^T [1 2 1] / 16.
  static ConvKernel binomial(int size);
  /// Text format: first line k (odd), then k rows of k reals.
  static ConvKernel load(const std::filesystem::path& path);
  /// "box3", "box5", "binomial3", "binomial5", or a kernel file path.
  static ConvKernel from_spec(const std::string& spec);

  int size() const { return size_; }
  int radius() const { return size_ / 2; }
  double at(int dy, int dx) const { return weights_[(dy + radius()) * size_ + dx + radius()]; }
  bool is_symmetric() const;

 private:
  int size_;
  std::vector<double> weights_;
};

/// D(x, sigma) = (1 - l(sigma)) x + l(sigma) (k * x), l(sigma) = sigma^2 / (sigma^2 + c^2).
/// `border` decides how the convolution reads past the input's edge.
class ConvSmootherPrior final : public DenoiserPrior {
 public:
  explicit ConvSmootherPrior(ConvKernel kernel, double c = 0.5,
                             PaddingMode border = PaddingMode::Reflect);

  double blend(double sigma) const;
  const ConvKernel& kernel() const { return kernel_; }
  double calibration() const { return c_; }
  PaddingMode border() const { return border_; }

  /// k * x with the configured border rule.
  Image convolve(const Image& x) const;
  /// Exact transpose of convolve().
  Image convolve_transpose(const Image& v) const;

  Image denoise(const Image& x, double sigma) const override;
  Image vjp(const Image& x, double sigma, const Image& v) const override;
  int receptive_radius() const override { return kernel_.radius(); }
  std::size_t workspace_bytes(int height, int width) const override;
  std::string name() const override { return "conv"; }

 private:
  ConvKernel kernel_;
  double c_;
  PaddingMode border_;
};

}  // namespace patchpnp
