#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "patchpnp/image.hpp"
#include "patchpnp/memory.hpp"

namespace patchpnp {

enum class OperatorKind { Identity, DownsampleAvg2 };

std::string_view to_string(OperatorKind kind);

/// Linear degradation H. Identity models denoising; DownsampleAvg2 models x2
/// super-resolution as 2x2 block averaging, for which H H^T = I/4 exactly.
class ForwardOperator {
 public:
  static ForwardOperator identity(int height, int width);
  static ForwardOperator downsample_avg2(int height, int width);

  OperatorKind kind() const { return kind_; }
  int input_height() const { return in_h_; }
  int input_width() const { return in_w_; }
  int output_height() const { return out_h_; }
  int output_width() const { return out_w_; }

 private:
  ForwardOperator(OperatorKind kind, int in_h, int in_w, int out_h, int out_w)
      : kind_(kind), in_h_(in_h), in_w_(in_w), out_h_(out_h), out_w_(out_w) {}

  OperatorKind kind_;
  int in_h_, in_w_, out_h_, out_w_;
};

Image apply(const ForwardOperator& op, const Image& x);
Image adjoint(const ForwardOperator& op, const Image& r);

/// ||y - H x||_2 without materialising H x.
double residual_norm(const ForwardOperator& op, const Image& x, const Image& y);

struct NoiseModel {
  double sigma_n = 0.0;
  std::uint64_t seed = 0;
};

/// y = H x + sigma_n * g, g drawn from CounterRng(seed) indexed by pixel.
Image measure(const ForwardOperator& op, const NoiseModel& noise, const Image& x);

struct CgResult {
  Image solution;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
  /// ||r_k|| / ||b|| for k = 0..iterations.
  std::vector<double> residual_history;
};

/// Conjugate gradients on (H^T H + rho I) x = b, starting from zero.
/// Non-convergence is reported through `converged`, never thrown.
CgResult cg_solve(const ForwardOperator& op, double rho, const Image& b, double tol, int max_iter,
                  MemoryLedger* ledger = nullptr);

}  // namespace patchpnp
