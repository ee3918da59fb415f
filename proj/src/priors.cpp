#include "patchpnp/priors.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "patchpnp/image_io.hpp"
#include "patchpnp/memory.hpp"

namespace patchpnp {

namespace {

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("denoiser sigma must be positive and finite, got " +
                                std::to_string(sigma));
  }
}

void check_input(const Image& x) {
  if (x.empty()) throw std::invalid_argument("denoiser input is empty");
  if (!x.all_finite()) throw std::invalid_argument("denoiser input is not finite");
}

}  // namespace

GaussianAnalyticPrior::GaussianAnalyticPrior(double tau, double mu) : tau_(tau), mu_(mu) {
  if (!(tau > 0.0) || !std::isfinite(tau) || !std::isfinite(mu)) {
    throw std::invalid_argument("gaussian prior needs tau > 0 and finite mu");
  }
}

double GaussianAnalyticPrior::shrinkage(double sigma) const {
  const double t2 = tau_ * tau_;
  return t2 / (t2 + sigma * sigma);
}

Image GaussianAnalyticPrior::denoise(const Image& x, double sigma) const {
  check_sigma(sigma);
  check_input(x);
  const double s = shrinkage(sigma);
  Image out = x;
  for (double& v : out.data()) v = mu_ + (v - mu_) * s;
  return out;
}

Image GaussianAnalyticPrior::vjp(const Image& x, double sigma, const Image& v) const {
  check_sigma(sigma);
  require_same_shape(x, v, "gaussian vjp");
  return shrinkage(sigma) * v;
}

ConvKernel::ConvKernel(int size, std::vector<double> weights)
    : size_(size), weights_(std::move(weights)) {
  if (size <= 0 || size % 2 == 0) {
    throw std::invalid_argument("kernel size must be a positive odd integer");
  }
  if (weights_.size() != static_cast<std::size_t>(size) * size) {
    throw std::invalid_argument("kernel needs size*size weights");
  }
  double sum = 0.0;
  for (double w : weights_) {
    if (!std::isfinite(w) || w < 0.0) {
      throw std::invalid_argument("kernel weights must be finite and non-negative");
    }
    sum += w;
  }
  if (!(sum > 0.0)) throw std::invalid_argument("kernel weights sum to zero");
  for (double& w : weights_) w /= sum;
}

ConvKernel ConvKernel::box(int size) {
  return ConvKernel(size, std::vector<double>(static_cast<std::size_t>(size) * size, 1.0));
}

ConvKernel ConvKernel::binomial(int size) {
  std::vector<double> row(static_cast<std::size_t>(size), 1.0);
  for (int n = 1; n < size; ++n) {
    for (int k = n - 1; k > 0; --k) row[k] += row[k - 1];
  }
  std::vector<double> w;
  w.reserve(row.size() * row.size());
  for (double a : row) {
    for (double b : row) w.push_back(a * b);
  }
  return ConvKernel(size, std::move(w));
}

ConvKernel ConvKernel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open kernel file '" + path.string() + "'");
  int k = 0;
  if (!(in >> k) || k <= 0 || k % 2 == 0) {
    throw IoError("kernel file '" + path.string() + "' must start with an odd size");
  }
  std::vector<double> w(static_cast<std::size_t>(k) * k);
  for (double& v : w) {
    if (!(in >> v)) throw IoError("kernel file '" + path.string() + "' has too few values");
  }
  for (double v : w) {
    if (v < 0.0) throw IoError("kernel file '" + path.string() + "' has negative weights");
  }
  try {
    return ConvKernel(k, std::move(w));
  } catch (const std::invalid_argument& e) {
    throw IoError("kernel file '" + path.string() + "': " + e.what());
  }
}

ConvKernel ConvKernel::from_spec(const std::string& spec) {
  if (spec == "box3") return box(3);
  if (spec == "box5") return box(5);
  if (spec == "binomial3") return binomial(3);
  if (spec == "binomial5") return binomial(5);
  return load(spec);
}

bool ConvKernel::is_symmetric() const {
  const int r = radius();
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      if (at(dy, dx) != at(-dy, -dx)) return false;
    }
  }
  return true;
}

ConvSmootherPrior::ConvSmootherPrior(ConvKernel kernel, double c, PaddingMode border)
    : kernel_(std::move(kernel)), c_(c), border_(border) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw std::invalid_argument("blend calibration constant must be positive");
  }
}

double ConvSmootherPrior::blend(double sigma) const {
  const double s2 = sigma * sigma;
  return s2 / (s2 + c_ * c_);
}

Image ConvSmootherPrior::convolve(const Image& x) const {
  const int r = kernel_.radius();
  const Image padded = pad(x, r, r, r, r, border_);
  Image out(x.height(), x.width());
  for (int y = 0; y < x.height(); ++y) {
    for (int c = 0; c < x.width(); ++c) {
      double acc = 0.0;
      for (int a = -r; a <= r; ++a) {
        for (int b = -r; b <= r; ++b) acc += kernel_.at(a, b) * padded(y - a + r, c - b + r);
      }
      out(y, c) = acc;
    }
  }
  return out;
}

Image ConvSmootherPrior::convolve_transpose(const Image& v) const {
  const int r = kernel_.radius();
  const int h = v.height();
  const int w = v.width();
  if (border_ == PaddingMode::Reflect && (r > h - 1 || r > w - 1)) {
    throw std::invalid_argument("reflect border larger than image");
  }
  Image out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int c = 0; c < w; ++c) {
      const double vy = v(y, c);
      for (int a = -r; a <= r; ++a) {
        const int sy = border_index(y - a, h, border_);
        if (sy < 0) continue;
        for (int b = -r; b <= r; ++b) {
          const int sx = border_index(c - b, w, border_);
          if (sx < 0) continue;
          out(sy, sx) += kernel_.at(a, b) * vy;
        }
      }
    }
  }
  return out;
}

Image ConvSmootherPrior::denoise(const Image& x, double sigma) const {
  check_sigma(sigma);
  check_input(x);
  const double lam = blend(sigma);
  Image out = convolve(x);
  auto o = out.data();
  auto in = x.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = (1.0 - lam) * in[i] + lam * o[i];
  return out;
}

Image ConvSmootherPrior::vjp(const Image& x, double sigma, const Image& v) const {
  check_sigma(sigma);
  require_same_shape(x, v, "conv vjp");
  const double lam = blend(sigma);
  Image out = convolve_transpose(v);
  auto o = out.data();
  auto in = v.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = (1.0 - lam) * in[i] + lam * o[i];
  return out;
}

std::size_t ConvSmootherPrior::workspace_bytes(int height, int width) const {
  const int r = kernel_.radius();
  return image_bytes(height + 2 * r, width + 2 * r);
}

}  // namespace patchpnp
