#pragma once

#include <vector>

#include "corona/image.hpp"

namespace corona {

struct IntensityBins {
  int bin_count = 64;
  double width = 4.0;        // 256 / bin_count intensity units
  int width_px = 0;
  int height_px = 0;
  int channels = 1;
  std::vector<int> assignment;  // 0-based bin per sample, same layout as Image::data()

  // Binary mask (255 inside the bin) for one channel.
  Image mask(int bin, int channel = 0) const;
};

struct FusionWeights {
  double denoised = 1.0;  // rho_1
  double region = 0.0;    // rho_2
};

// 0-based bin of an intensity; the 1-based group number is bin_index + 1.
int bin_index(double intensity, int bin_count);

IntensityBins bin_pixels(const Image& image, int bin_count = 64);

// Every bin mask tiled into one image, row-major, ceil(sqrt(B)) tiles per row.
Image bin_mask_grid(const IntensityBins& bins, int channel = 0);

// Per channel: 4-connected components of same-bin pixels; each component of at
// least min_component pixels is replaced by its mean.
Image region_grow_smooth(const Image& image, int bin_count = 64, int min_component = 32);

// rho_2 = min(0.5, sigma / 100), rho_1 = 1 - rho_2.
FusionWeights fusion_weights(double noise_sigma);

// rho_1 * denoised + rho_2 * region, evaluated as denoised + rho_2 (region - denoised).
Image fuse(const Image& denoised, const Image& region, double noise_sigma);

}  // namespace corona
