#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "crowdloc/data/image.hpp"

namespace crowdloc::data {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

Image read_png(const std::filesystem::path& path) {
  File file(std::fopen(path.c_str(), "rb"));
  check(file != nullptr, ErrorKind::io, "cannot open image " + path.string());
  png_byte header[8];
  check(std::fread(header, 1, 8, file.get()) == 8 && png_sig_cmp(header, 0, 8) == 0, ErrorKind::load,
        path.string() + " is not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  check(png && info, ErrorKind::io, "libpng initialisation failed");
  std::vector<png_byte> pixels;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorKind::load, "corrupt PNG " + path.string());
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  png_set_strip_16(png);
  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  png_set_gray_to_rgb(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);
  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const std::size_t stride = png_get_rowbytes(png, info);
  pixels.resize(stride * height);
  rows.resize(height);
  for (int r = 0; r < height; ++r) rows[r] = pixels.data() + stride * r;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Image image(3, height, width);
  for (int r = 0; r < height; ++r) {
    for (int q = 0; q < width; ++q) {
      for (int c = 0; c < 3; ++c) image.at(c, r, q) = float(rows[r][q * 3 + c]) / 255.0f;
    }
  }
  return image;
}

void write_png(const std::filesystem::path& path, const Image& image) {
  check(image.channels() == 3 || image.channels() == 1, ErrorKind::shape, "PNG output needs 1 or 3 channels");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  File file(std::fopen(path.c_str(), "wb"));
  check(file != nullptr, ErrorKind::io, "cannot write image " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  check(png && info, ErrorKind::io, "libpng initialisation failed");
  const int w = image.width();
  const int h = image.height();
  std::vector<png_byte> pixels(std::size_t(w) * h * 3);
  for (int r = 0; r < h; ++r) {
    for (int q = 0; q < w; ++q) {
      for (int c = 0; c < 3; ++c) {
        const float v = image.at(image.channels() == 3 ? c : 0, r, q);
        pixels[(std::size_t(r) * w + q) * 3 + c] =
            static_cast<png_byte>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
      }
    }
  }
  std::vector<png_bytep> rows(h);
  for (int r = 0; r < h; ++r) rows[r] = pixels.data() + std::size_t(r) * w * 3;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorKind::io, "PNG encoding failed for " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, w, h, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace crowdloc::data
