#include "crowdloc/data/tiling.hpp"

#include <algorithm>
#include <cmath>

namespace crowdloc::data {

std::vector<int> tile_offsets(int size, int tile, int overlap) {
  check(tile >= 1, ErrorKind::invalid_argument, "tile size must be positive");
  check(overlap >= 0 && overlap < tile, ErrorKind::invalid_argument, "overlap must satisfy 0 <= overlap < tile");
  check(size >= 1, ErrorKind::invalid_argument, "image size must be positive");
  if (size <= tile) return {0};
  const int stride = tile - overlap;
  std::vector<int> out;
  for (int start = 0;; start += stride) {
    if (start + tile >= size) {
      out.push_back(size - tile);
      break;
    }
    out.push_back(start);
  }
  return out;
}

std::vector<Tile> tile_for_inference(const Image& image, int tile, int overlap) {
  const auto rows = tile_offsets(image.height(), tile, overlap);
  const auto cols = tile_offsets(image.width(), tile, overlap);
  const int th = std::min(tile, image.height());
  const int tw = std::min(tile, image.width());
  std::vector<Tile> out;
  out.reserve(rows.size() * cols.size());
  for (int r : rows) {
    for (int c : cols) out.push_back({image.crop(r, c, th, tw), r, c});
  }
  return out;
}

decode::DetectionSet merge_detections(const std::vector<TileDetections>& tiles, int height, int width,
                                      double min_distance, const decode::LmdsParams& params) {
  std::vector<decode::Detection> all;
  for (const auto& t : tiles) {
    for (const auto& d : t.detections.detections) {
      const decode::Detection g{d.row + t.row_offset, d.col + t.col_offset, d.score};
      check(g.row >= 0 && g.row < height && g.col >= 0 && g.col < width, ErrorKind::shape,
            "tile detection falls outside the merged image");
      all.push_back(g);
    }
  }
  // strongest first; ties resolved by position so the result is order-free
  std::sort(all.begin(), all.end(), [](const decode::Detection& a, const decode::Detection& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.row != b.row) return a.row < b.row;
    return a.col < b.col;
  });
  std::vector<decode::Detection> kept;
  for (const auto& d : all) {
    const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const decode::Detection& k) {
      return std::hypot(double(k.row - d.row), double(k.col - d.col)) < min_distance;
    });
    if (!duplicate) kept.push_back(d);
  }

  decode::DetectionSet out{height, width, {}};
  if (!kept.empty()) {
    const double peak = kept.front().score;
    if (peak >= params.empty_threshold) {
      const double delta = params.relative_threshold * peak;
      for (const auto& d : kept) {
        if (d.score >= delta) out.detections.push_back(d);
      }
    }
  }
  std::sort(out.detections.begin(), out.detections.end(), [](const decode::Detection& a, const decode::Detection& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  return out;
}

}  // namespace crowdloc::data
