#pragma once

#include <filesystem>
#include <vector>

#include "crowdloc/common/error.hpp"

namespace crowdloc::data {

// Planar (CHW) float image with values in [0, 1].
class Image {
 public:
  Image() = default;
  Image(int channels, int height, int width, float fill = 0.0f)
      : channels_(channels), height_(height), width_(width),
        data_(static_cast<std::size_t>(channels) * height * width, fill) {
    check(channels >= 1 && height >= 1 && width >= 1, ErrorKind::shape, "image dimensions must be positive");
  }

  int channels() const noexcept { return channels_; }
  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  bool empty() const noexcept { return data_.empty(); }

  float& at(int c, int r, int col) { return data_[index(c, r, col)]; }
  float at(int c, int r, int col) const { return data_[index(c, r, col)]; }

  std::vector<float>& values() noexcept { return data_; }
  const std::vector<float>& values() const noexcept { return data_; }

  Image crop(int row, int col, int height, int width) const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int c, int r, int col) const noexcept {
    return (static_cast<std::size_t>(c) * height_ + r) * width_ + col;
  }

  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
};

// 8-bit PNG; grey and alpha inputs are converted to RGB.
Image read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& image);

}  // namespace crowdloc::data
