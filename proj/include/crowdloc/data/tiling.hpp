#pragma once

#include <vector>

#include "crowdloc/data/image.hpp"
#include "crowdloc/decode/lmds.hpp"

namespace crowdloc::data {

// Start offsets along one axis: 0, stride, 2*stride, ... with the last tile
// shifted inward so it ends at `size`. A size <= tile yields {0}.
std::vector<int> tile_offsets(int size, int tile, int overlap);

struct Tile {
  Image image;
  int row_offset = 0;
  int col_offset = 0;
};

// Tiles are min(tile, H) x min(tile, W) crops that cover the image.
std::vector<Tile> tile_for_inference(const Image& image, int tile = 256, int overlap = 32);

struct TileDetections {
  decode::DetectionSet detections;  // tile-local coordinates
  int row_offset = 0;
  int col_offset = 0;
};

// Offsets detections to global coordinates, drops the lower-scored member of
// any pair closer than min_distance, then re-applies the LMDS empty and
// relative thresholds against the global maximum score.
decode::DetectionSet merge_detections(const std::vector<TileDetections>& tiles, int height, int width,
                                      double min_distance = 1.0, const decode::LmdsParams& params = {});

}  // namespace crowdloc::data
