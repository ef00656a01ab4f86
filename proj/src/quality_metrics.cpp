#include "corona/quality_metrics.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace corona {

double psnr(const Image& reference, const Image& candidate, double peak) {
  if (!reference.same_shape(candidate)) throw std::invalid_argument("psnr: shape mismatch");
  if (reference.empty()) throw std::invalid_argument("psnr: empty image");
  double sse = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = reference.data()[i] - candidate.data()[i];
    sse += d * d;
  }
  const double mse = sse / static_cast<double>(reference.size());
  if (mse == 0.0) return kInfinitePsnr;
  return 10.0 * std::log10(peak * peak / mse);
}

namespace {

constexpr int kWindow = 11;
constexpr double kWindowSigma = 1.5;

std::array<double, kWindow> gaussian_taps() {
  std::array<double, kWindow> taps{};
  double total = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    taps[i] = std::exp(-d * d / (2.0 * kWindowSigma * kWindowSigma));
    total += taps[i];
  }
  for (double& t : taps) t /= total;
  return taps;
}

// Separable 'valid' filtering of one plane.
std::vector<double> filter_valid(const std::vector<double>& src, int w, int h,
                                 const std::array<double, kWindow>& taps) {
  const int ow = w - kWindow + 1;
  const int oh = h - kWindow + 1;
  std::vector<double> rows(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += taps[k] * src[static_cast<std::size_t>(y) * w + x + k];
      rows[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += taps[k] * rows[static_cast<std::size_t>(y + k) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  return out;
}

double ssim_plane(const Image& a, const Image& b, int c) {
  const int w = a.width();
  const int h = a.height();
  const auto taps = gaussian_taps();
  const std::size_t plane = static_cast<std::size_t>(w) * h;
  std::vector<double> x(plane), y(plane), xx(plane), yy(plane), xy(plane);
  for (std::size_t i = 0; i < plane; ++i) {
    x[i] = a.data()[c * plane + i];
    y[i] = b.data()[c * plane + i];
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mx = filter_valid(x, w, h, taps);
  const auto my = filter_valid(y, w, h, taps);
  const auto sxx = filter_valid(xx, w, h, taps);
  const auto syy = filter_valid(yy, w, h, taps);
  const auto sxy = filter_valid(xy, w, h, taps);
  constexpr double c1 = (0.01 * 255.0) * (0.01 * 255.0);
  constexpr double c2 = (0.03 * 255.0) * (0.03 * 255.0);
  double total = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double vx = sxx[i] - mx[i] * mx[i];
    const double vy = syy[i] - my[i] * my[i];
    const double cov = sxy[i] - mx[i] * my[i];
    total += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mx.size());
}

}  // namespace

double ssim(const Image& reference, const Image& candidate) {
  if (!reference.same_shape(candidate)) throw std::invalid_argument("ssim: shape mismatch");
  if (reference.width() < kWindow || reference.height() < kWindow) {
    throw std::invalid_argument("ssim: image smaller than the 11x11 window");
  }
  if (reference == candidate) return 1.0;
  double total = 0.0;
  for (int c = 0; c < reference.channels(); ++c) total += ssim_plane(reference, candidate, c);
  return total / reference.channels();
}

QualityScore quality(const Image& reference, const Image& candidate) {
  return {psnr(reference, candidate), ssim(reference, candidate)};
}

GaussianityReport gaussianity_check(std::span<const double> samples, double expected_variance) {
  if (samples.size() < 10000) throw std::invalid_argument("gaussianity_check: need >= 1e4 samples");
  if (!(expected_variance > 0.0)) {
    throw std::invalid_argument("gaussianity_check: expected variance must be positive");
  }
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double s : samples) {
    const double d = s - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;

  GaussianityReport rep;
  rep.expected_variance = expected_variance;
  rep.variance = m2;
  rep.relative_variance_error = std::abs(m2 - expected_variance) / expected_variance;
  if (m2 <= 0.0) {
    rep.skewness = std::numeric_limits<double>::quiet_NaN();
    rep.excess_kurtosis = std::numeric_limits<double>::quiet_NaN();
    rep.passed = false;
    return rep;
  }
  rep.skewness = m3 / std::pow(m2, 1.5);
  rep.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  rep.passed = rep.relative_variance_error <= 0.02 && std::abs(rep.skewness) <= 0.05 &&
               std::abs(rep.excess_kurtosis) <= 0.05;
  return rep;
}

}  // namespace corona
