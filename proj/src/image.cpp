#include "corona/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

namespace corona {

Image::Image(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
  if (width < 0 || height < 0 || (channels != 1 && channels != 3)) {
    throw std::invalid_argument("Image: bad geometry");
  }
  data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

Image Image::channel(int c) const {
  Image plane(width_, height_, 1);
  const auto n = static_cast<std::size_t>(width_) * height_;
  std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(c * n), n, plane.data_.begin());
  return plane;
}

void Image::set_channel(int c, const Image& plane) {
  if (plane.width_ != width_ || plane.height_ != height_ || plane.channels_ != 1) {
    throw std::invalid_argument("Image::set_channel: shape mismatch");
  }
  const auto n = static_cast<std::size_t>(width_) * height_;
  std::copy_n(plane.data_.begin(), n, data_.begin() + static_cast<std::ptrdiff_t>(c * n));
}

void Image::clamp(double lo, double hi) {
  for (double& v : data_) v = std::clamp(v, lo, hi);
}

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in) {
  std::string token;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(static_cast<char>(ch));
  }
  return token;
}

int header_int(std::istream& in, const std::filesystem::path& path) {
  const std::string tok = header_token(in);
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("malformed PNM header in " + path.string());
  }
}

}  // namespace

Image read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::string magic = header_token(in);
  int channels = 0;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    throw std::runtime_error("unsupported PNM format in " + path.string());
  }
  const int width = header_int(in, path);
  const int height = header_int(in, path);
  const int maxval = header_int(in, path);
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255) {
    throw std::runtime_error("unsupported PNM geometry in " + path.string());
  }
  const auto plane = static_cast<std::size_t>(width) * height;
  std::vector<unsigned char> raw(plane * channels);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw std::runtime_error("truncated pixel data in " + path.string());
  }
  Image img(width, height, channels);
  const double scale = 255.0 / maxval;
  for (std::size_t i = 0; i < plane; ++i) {
    for (int c = 0; c < channels; ++c) {
      img.data()[c * plane + i] = raw[i * channels + c] * scale;
    }
  }
  return img;
}

void write_pnm(const std::filesystem::path& path, const Image& image) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw std::invalid_argument("write_pnm: need 1 or 3 channels");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << (image.channels() == 1 ? "P5" : "P6") << '\n'
      << image.width() << ' ' << image.height() << "\n255\n";
  const auto plane = static_cast<std::size_t>(image.width()) * image.height();
  std::vector<unsigned char> raw(plane * image.channels());
  for (std::size_t i = 0; i < plane; ++i) {
    for (int c = 0; c < image.channels(); ++c) {
      const double v = std::clamp(std::round(image.data()[c * plane + i]), 0.0, 255.0);
      raw[i * image.channels() + c] = static_cast<unsigned char>(v);
    }
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace corona
