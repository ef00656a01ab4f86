#include "doctest.h"

#include <algorithm>
#include <random>
#include <set>

#include "corona/region_fusion.hpp"

using namespace corona;

TEST_CASE("intensity bins") {
  CHECK(bin_index(5.0, 64) + 1 == 2);
  CHECK(bin_index(4.0, 64) == 1);
  CHECK(bin_index(7.99, 64) == 1);
  CHECK(bin_index(0.0, 64) == 0);
  CHECK(bin_index(255.0, 64) == 63);
  CHECK(bin_index(-3.0, 64) == 0);
  CHECK(bin_index(300.0, 64) == 63);

  const IntensityBins b = bin_pixels(Image(8, 8, 1, 77.0));
  std::set<int> used(b.assignment.begin(), b.assignment.end());
  CHECK(used == std::set<int>{19});
  CHECK(b.width == 4.0);
  CHECK(b.mask(19).at(3, 3) == 255.0);
  CHECK(b.mask(18).at(3, 3) == 0.0);
  CHECK_THROWS_AS(bin_pixels(Image(4, 4), 1), std::invalid_argument);

  const Image grid = bin_mask_grid(b);
  CHECK(grid.width() == 8 * 8);
  CHECK(grid.height() == 8 * 8);
}

TEST_CASE("constant image is unchanged") {
  const Image flat(32, 32, 1, 123.0);
  CHECK(region_grow_smooth(flat) == flat);
}

TEST_CASE("components are smoothed separately") {
  Image img(40, 20, 1, 200.0);
  // two 10x10 squares, same bin, not touching
  for (int y = 5; y < 15; ++y) {
    for (int x = 2; x < 12; ++x) img.at(x, y) = (x + y) % 2 == 0 ? 10.0 : 11.0;
    for (int x = 25; x < 35; ++x) img.at(x, y) = 9.0;
  }
  const Image out = region_grow_smooth(img, 64, 32);
  CHECK(out.at(2, 5) == doctest::Approx(10.5));
  CHECK(out.at(11, 14) == doctest::Approx(10.5));
  CHECK(out.at(30, 10) == 9.0);
  CHECK(out.at(0, 0) == 200.0);

  // threshold above every component: untouched
  CHECK(region_grow_smooth(img, 64, 10000) == img);
}

TEST_CASE("4-connectivity keeps diagonal neighbours apart") {
  Image img(8, 8, 1, 100.0);
  for (int i = 0; i < 8; ++i) img.at(i, i) = i % 2 == 0 ? 20.0 : 21.0;
  // diagonal pixels share a bin but no edge, so each is its own tiny component
  const Image out = region_grow_smooth(img, 64, 2);
  for (int i = 0; i < 8; ++i) CHECK(out.at(i, i) == img.at(i, i));
}

TEST_CASE("smoothing stays within each component's range and settles") {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> u(0, 255);
  Image img(64, 64);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) img.at(x, y) = (x / 16) * 60 + u(rng) % 4;
  }
  const Image once = region_grow_smooth(img);
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double base = img.data()[i] - std::fmod(img.data()[i], 4.0);
    CHECK(once.data()[i] >= base);
    CHECK(once.data()[i] < base + 4.0);
  }
  CHECK(region_grow_smooth(once) == once);
}

TEST_CASE("fusion weights and convexity") {
  CHECK(fusion_weights(0.0).region == 0.0);
  CHECK(fusion_weights(20.0).region == doctest::Approx(0.2));
  CHECK(fusion_weights(50.0).region == 0.5);
  CHECK(fusion_weights(80.0).region == 0.5);
  CHECK(fusion_weights(20.0).denoised == doctest::Approx(0.8));

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 255.0);
  Image d(16, 16), r(16, 16);
  for (double& v : d.data()) v = u(rng);
  for (double& v : r.data()) v = u(rng);
  CHECK(fuse(d, r, 0.0) == d);
  CHECK(fuse(d, d, 30.0) == d);

  Image a(1, 1, 1, 100.0), b(1, 1, 1, 200.0);
  CHECK(fuse(a, b, 50.0).at(0, 0) == 150.0);

  const Image f = fuse(d, r, 25.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(f.data()[i] >= std::min(d.data()[i], r.data()[i]));
    CHECK(f.data()[i] <= std::max(d.data()[i], r.data()[i]));
  }
  CHECK_THROWS_AS(fuse(d, Image(8, 8), 10.0), std::invalid_argument);
}

TEST_CASE("color channels are grown independently") {
  Image img(16, 16, 3, 0.0);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      img.at(x, y, 0) = 40.0 + (x % 2);
      img.at(x, y, 1) = 100.0;
      img.at(x, y, 2) = 200.0 + (y % 3);
    }
  }
  const Image out = region_grow_smooth(img, 64, 32);
  CHECK(out.at(3, 3, 0) == doctest::Approx(40.5));
  CHECK(out.at(3, 3, 1) == 100.0);
  CHECK(out.at(3, 3, 2) == doctest::Approx((200.0 * 6 + 201.0 * 5 + 202.0 * 5) / 16.0));
}
