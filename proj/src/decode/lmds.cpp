#include "crowdloc/decode/lmds.hpp"

#include <algorithm>
#include <cmath>

#include "crowdloc/common/error.hpp"

namespace crowdloc::decode {

DetectionSet lmds(const Grid<float>& map, const LmdsParams& params) {
  DetectionSet out{map.height(), map.width(), {}};
  if (map.empty()) return out;
  float peak = map.values()[0];
  for (float v : map.values()) {
    check(!std::isnan(v), ErrorKind::numeric, "lmds: location map contains NaN");
    peak = std::max(peak, v);
  }
  if (double(peak) < params.empty_threshold) return out;
  const double delta = params.relative_threshold * double(peak);

  const int h = map.height();
  const int w = map.width();
  // Separable 3x3 max with replicate padding.
  Grid<float> row_max(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      float m = map(r, c);
      if (c > 0) m = std::max(m, map(r, c - 1));
      if (c + 1 < w) m = std::max(m, map(r, c + 1));
      row_max(r, c) = m;
    }
  }
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      float m = row_max(r, c);
      if (r > 0) m = std::max(m, row_max(r - 1, c));
      if (r + 1 < h) m = std::max(m, row_max(r + 1, c));
      const float v = map(r, c);
      if (v == m && double(v) >= delta) out.detections.push_back({r, c, v});
    }
  }
  return out;
}

Json to_json(const DetectionSet& set) {
  Json dets = Json::array();
  for (const auto& d : set.detections) dets.push_back({d.row, d.col, d.score});
  return Json{{"height", set.source_height}, {"width", set.source_width}, {"detections", dets}};
}

DetectionSet detection_set_from_json(const Json& value) {
  try {
    DetectionSet set;
    set.source_height = value.at("height").get<int>();
    set.source_width = value.at("width").get<int>();
    for (const auto& d : value.at("detections")) {
      set.detections.push_back({d.at(0).get<int>(), d.at(1).get<int>(), d.at(2).get<float>()});
    }
    return set;
  } catch (const Json::exception& e) {
    fail(ErrorKind::load, std::string("malformed detection JSON: ") + e.what());
  }
}

}  // namespace crowdloc::decode
