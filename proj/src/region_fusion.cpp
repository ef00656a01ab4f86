#include "corona/region_fusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace corona {

int bin_index(double intensity, int bin_count) {
  if (bin_count < 2) throw std::invalid_argument("bin_count must be >= 2");
  const double width = 256.0 / bin_count;
  const double v = std::clamp(intensity, 0.0, 255.0);
  return std::min(bin_count - 1, static_cast<int>(std::floor(v / width)));
}

IntensityBins bin_pixels(const Image& image, int bin_count) {
  if (bin_count < 2) throw std::invalid_argument("bin_count must be >= 2");
  IntensityBins bins;
  bins.bin_count = bin_count;
  bins.width = 256.0 / bin_count;
  bins.width_px = image.width();
  bins.height_px = image.height();
  bins.channels = image.channels();
  bins.assignment.reserve(image.size());
  for (double v : image.data()) bins.assignment.push_back(bin_index(v, bin_count));
  return bins;
}

Image IntensityBins::mask(int bin, int channel) const {
  Image m(width_px, height_px, 1);
  const std::size_t plane = static_cast<std::size_t>(width_px) * height_px;
  for (std::size_t i = 0; i < plane; ++i) {
    m.data()[i] = assignment[channel * plane + i] == bin ? 255.0 : 0.0;
  }
  return m;
}

Image bin_mask_grid(const IntensityBins& bins, int channel) {
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(bins.bin_count))));
  const int rows = (bins.bin_count + cols - 1) / cols;
  Image grid(cols * bins.width_px, rows * bins.height_px, 1);
  for (int b = 0; b < bins.bin_count; ++b) {
    const Image m = bins.mask(b, channel);
    const int ox = (b % cols) * bins.width_px;
    const int oy = (b / cols) * bins.height_px;
    for (int y = 0; y < bins.height_px; ++y) {
      for (int x = 0; x < bins.width_px; ++x) grid.at(ox + x, oy + y) = m.at(x, y);
    }
  }
  return grid;
}

Image region_grow_smooth(const Image& image, int bin_count, int min_component) {
  if (min_component < 1) throw std::invalid_argument("min_component must be >= 1");
  const IntensityBins bins = bin_pixels(image, bin_count);
  const int w = image.width();
  const int h = image.height();
  const std::size_t plane = static_cast<std::size_t>(w) * h;

  Image out = image;
  std::vector<int> label(plane);
  std::vector<std::size_t> stack;
  std::vector<std::size_t> component;
  for (int c = 0; c < image.channels(); ++c) {
    const int* bin = bins.assignment.data() + c * plane;
    const double* src = image.data().data() + c * plane;
    double* dst = out.data().data() + c * plane;
    std::fill(label.begin(), label.end(), -1);
    int next = 0;
    for (std::size_t seed = 0; seed < plane; ++seed) {
      if (label[seed] >= 0) continue;
      component.clear();
      stack.assign(1, seed);
      label[seed] = next;
      double sum = 0.0;
      while (!stack.empty()) {
        const std::size_t idx = stack.back();
        stack.pop_back();
        component.push_back(idx);
        sum += src[idx];
        const int x = static_cast<int>(idx % w);
        const int y = static_cast<int>(idx / w);
        auto visit = [&](int nx, int ny) {
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) return;
          const std::size_t n = static_cast<std::size_t>(ny) * w + nx;
          if (label[n] < 0 && bin[n] == bin[seed]) {
            label[n] = next;
            stack.push_back(n);
          }
        };
        visit(x - 1, y);
        visit(x + 1, y);
        visit(x, y - 1);
        visit(x, y + 1);
      }
      if (static_cast<int>(component.size()) >= min_component) {
        const double mean = sum / static_cast<double>(component.size());
        for (std::size_t idx : component) dst[idx] = mean;
      }
      ++next;
    }
  }
  return out;
}

FusionWeights fusion_weights(double noise_sigma) {
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise sigma must be >= 0");
  FusionWeights wts;
  wts.region = std::min(0.5, noise_sigma / 100.0);
  wts.denoised = 1.0 - wts.region;
  return wts;
}

Image fuse(const Image& denoised, const Image& region, double noise_sigma) {
  if (!denoised.same_shape(region)) throw std::invalid_argument("fuse: shape mismatch");
  const FusionWeights wts = fusion_weights(noise_sigma);
  Image out = denoised;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double d = denoised.data()[i];
    out.data()[i] = d + wts.region * (region.data()[i] - d);
  }
  return out;
}

}  // namespace corona
