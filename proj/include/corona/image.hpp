#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace corona {

// Planar real-valued image. Intensities are on the 8-bit scale but held as
// doubles so intermediate results keep their precision.
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels = 1, double fill = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
  double at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  // Single plane copy.
  Image channel(int c) const;
  void set_channel(int c, const Image& plane);

  bool same_shape(const Image& other) const {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

  void clamp(double lo = 0.0, double hi = 255.0);

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

// Binary Netpbm: P5 (grayscale) and P6 (RGB), maxval <= 255.
// Throws std::runtime_error on unreadable or malformed files.
Image read_pnm(const std::filesystem::path& path);

// Writes P5 for one channel, P6 for three. Values are rounded and clamped to [0,255].
void write_pnm(const std::filesystem::path& path, const Image& image);

}  // namespace corona
