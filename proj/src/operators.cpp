#include "patchpnp/operators.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "patchpnp/random.hpp"

namespace patchpnp {

std::string_view to_string(OperatorKind kind) {
  return kind == OperatorKind::Identity ? "identity" : "downsample_avg2";
}

ForwardOperator ForwardOperator::identity(int height, int width) {
  if (height <= 0 || width <= 0) throw std::invalid_argument("operator dims must be positive");
  return {OperatorKind::Identity, height, width, height, width};
}

ForwardOperator ForwardOperator::downsample_avg2(int height, int width) {
  if (height <= 0 || width <= 0 || height % 2 != 0 || width % 2 != 0) {
    throw std::invalid_argument("downsample_avg2 needs positive even dimensions, got " +
                                std::to_string(height) + "x" + std::to_string(width));
  }
  return {OperatorKind::DownsampleAvg2, height, width, height / 2, width / 2};
}

namespace {

void check_dims(const Image& img, int h, int w, const char* what) {
  if (img.height() != h || img.width() != w) {
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(h) + "x" +
                                std::to_string(w) + " image, got " +
                                std::to_string(img.height()) + "x" + std::to_string(img.width()));
  }
}

}  // namespace

Image apply(const ForwardOperator& op, const Image& x) {
  check_dims(x, op.input_height(), op.input_width(), "apply");
  if (op.kind() == OperatorKind::Identity) return x;

  Image out(op.output_height(), op.output_width());
  for (int y = 0; y < out.height(); ++y) {
    for (int c = 0; c < out.width(); ++c) {
      out(y, c) = 0.25 * (x(2 * y, 2 * c) + x(2 * y, 2 * c + 1) + x(2 * y + 1, 2 * c) +
                          x(2 * y + 1, 2 * c + 1));
    }
  }
  return out;
}

Image adjoint(const ForwardOperator& op, const Image& r) {
  check_dims(r, op.output_height(), op.output_width(), "adjoint");
  if (op.kind() == OperatorKind::Identity) return r;

  Image out(op.input_height(), op.input_width());
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) out(y, x) = 0.25 * r(y / 2, x / 2);
  }
  return out;
}

double residual_norm(const ForwardOperator& op, const Image& x, const Image& y) {
  check_dims(x, op.input_height(), op.input_width(), "residual_norm");
  check_dims(y, op.output_height(), op.output_width(), "residual_norm");
  double acc = 0.0;
  for (int r = 0; r < y.height(); ++r) {
    for (int c = 0; c < y.width(); ++c) {
      const double hx = op.kind() == OperatorKind::Identity
                            ? x(r, c)
                            : 0.25 * (x(2 * r, 2 * c) + x(2 * r, 2 * c + 1) +
                                      x(2 * r + 1, 2 * c) + x(2 * r + 1, 2 * c + 1));
      const double d = y(r, c) - hx;
      acc += d * d;
    }
  }
  return std::sqrt(acc);
}

Image measure(const ForwardOperator& op, const NoiseModel& noise, const Image& x) {
  if (!(noise.sigma_n >= 0.0) || !std::isfinite(noise.sigma_n)) {
    throw std::invalid_argument("sigma_n must be finite and non-negative");
  }
  Image y = apply(op, x);
  if (noise.sigma_n == 0.0) return y;
  const CounterRng rng(noise.seed, /*stream=*/0x6E6F697365ULL);
  auto d = y.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += noise.sigma_n * rng.gaussian(i);
  return y;
}

CgResult cg_solve(const ForwardOperator& op, double rho, const Image& b, double tol, int max_iter,
                  MemoryLedger* ledger) {
  if (!(rho > 0.0)) throw std::invalid_argument("cg_solve: rho must be positive");
  if (max_iter < 0) throw std::invalid_argument("cg_solve: max_iter must be non-negative");
  check_dims(b, op.input_height(), op.input_width(), "cg_solve");
  if (!b.all_finite()) throw std::invalid_argument("cg_solve: right-hand side is not finite");

  const std::size_t bytes = b.bytes();
  BufferHold hold_x(ledger, "cg.x", bytes);
  BufferHold hold_r(ledger, "cg.r", bytes);
  BufferHold hold_p(ledger, "cg.p", bytes);
  BufferHold hold_ap(ledger, "cg.Ap", bytes);

  auto normal_op = [&](const Image& v) {
    Image out = adjoint(op, apply(op, v));
    axpy(rho, v, out);
    return out;
  };

  CgResult result;
  result.solution = Image(b.height(), b.width());
  const double b_norm = norm2(b);
  if (b_norm == 0.0) {
    result.converged = true;
    result.residual_history.push_back(0.0);
    return result;
  }

  Image& x = result.solution;
  Image r = b;
  Image p = r;
  double rr = dot(r, r);
  result.residual_history.push_back(std::sqrt(rr) / b_norm);

  while (result.residual_history.back() > tol && result.iterations < max_iter) {
    const Image ap = normal_op(p);
    const double alpha = rr / dot(p, ap);
    axpy(alpha, p, x);
    axpy(-alpha, ap, r);
    const double rr_next = dot(r, r);
    ++result.iterations;
    result.residual_history.push_back(std::sqrt(rr_next) / b_norm);
    const double beta = rr_next / rr;
    rr = rr_next;
    for (std::size_t i = 0; i < p.size(); ++i) p.data()[i] = r.data()[i] + beta * p.data()[i];
  }
  result.relative_residual = result.residual_history.back();
  result.converged = result.relative_residual <= tol;
  return result;
}

}  // namespace patchpnp
