#pragma once

#include <vector>

#include "crowdloc/common/grid.hpp"
#include "crowdloc/common/json_io.hpp"

namespace crowdloc::decode {

struct Detection {
  int row = 0;
  int col = 0;
  float score = 0.0f;
  friend bool operator==(const Detection&, const Detection&) = default;
};

struct DetectionSet {
  int source_height = 0;
  int source_width = 0;
  std::vector<Detection> detections;  // row-major scan order
  friend bool operator==(const DetectionSet&, const DetectionSet&) = default;
};

struct LmdsParams {
  double empty_threshold = 0.10;       // below this map maximum nothing is reported
  double relative_threshold = 100.0 / 255.0;  // delta = relative_threshold * max
};

// Local-maxima decoding: a pixel is kept iff it equals the maximum of its 3x3
// window (replicate padding, plateaus kept) and is >= delta.
DetectionSet lmds(const Grid<float>& location_map, const LmdsParams& params = {});

// Detections are [row, col, score] triples.
Json to_json(const DetectionSet& set);
DetectionSet detection_set_from_json(const Json& value);

}  // namespace crowdloc::decode
