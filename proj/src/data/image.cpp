#include "crowdloc/data/image.hpp"

namespace crowdloc::data {

Image Image::crop(int row, int col, int height, int width) const {
  check(row >= 0 && col >= 0 && row + height <= height_ && col + width <= width_, ErrorKind::shape,
        "crop window exceeds image bounds");
  Image out(channels_, height, width);
  for (int c = 0; c < channels_; ++c) {
    for (int r = 0; r < height; ++r) {
      for (int q = 0; q < width; ++q) out.at(c, r, q) = at(c, row + r, col + q);
    }
  }
  return out;
}

}  // namespace crowdloc::data
