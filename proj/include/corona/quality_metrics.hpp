#pragma once

#include <limits>
#include <span>

#include "corona/image.hpp"

namespace corona {

inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

struct QualityScore {
  double psnr = 0.0;  // dB, kInfinitePsnr for identical images
  double ssim = 0.0;
};

// 10 log10(peak^2 / MSE) over every sample; kInfinitePsnr when MSE is zero.
double psnr(const Image& reference, const Image& candidate, double peak = 255.0);

// Mean SSIM over all valid 11x11 Gaussian (sigma 1.5) windows, K1 = 0.01,
// K2 = 0.03, L = 255. Multi-channel images average the per-channel scores.
double ssim(const Image& reference, const Image& candidate);

QualityScore quality(const Image& reference, const Image& candidate);

struct GaussianityReport {
  double variance = 0.0;
  double expected_variance = 0.0;
  double relative_variance_error = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  bool passed = false;
};

// Passes iff the sample variance is within 2% of the expectation and both
// |skewness| and |excess kurtosis| are at most 0.05. Needs >= 10^4 samples.
GaussianityReport gaussianity_check(std::span<const double> samples, double expected_variance);

}  // namespace corona
