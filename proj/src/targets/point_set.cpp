#include "crowdloc/targets/point_set.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "crowdloc/common/error.hpp"

namespace crowdloc::targets {

PointSet::PointSet(int height, int width, std::vector<Point> points)
    : height_(height), width_(width), points_(std::move(points)) {
  check(height >= 1 && width >= 1, ErrorKind::invalid_argument,
        "point set needs a positive image size");
  std::set<Cell> seen;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const Point& p = points_[i];
    if (!(p.row >= 0.0 && p.row < height && p.col >= 0.0 && p.col < width)) {
      std::ostringstream msg;
      msg << "point " << i << " at [" << p.row << ", " << p.col << "] is out of bounds for "
          << height << "x" << width;
      fail(ErrorKind::invalid_argument, msg.str());
    }
    const Cell cell = cell_of(p, height, width);
    if (!seen.insert(cell).second) {
      std::ostringstream msg;
      msg << "duplicate point: pixel [" << cell.row << ", " << cell.col
          << "] holds more than one annotation";
      fail(ErrorKind::invalid_argument, msg.str());
    }
  }
}

Cell PointSet::cell_of(const Point& p, int height, int width) {
  const int row = static_cast<int>(std::floor(p.row + 0.5));
  const int col = static_cast<int>(std::floor(p.col + 0.5));
  return {std::clamp(row, 0, height - 1), std::clamp(col, 0, width - 1)};
}

std::vector<Cell> PointSet::cells() const {
  std::vector<Cell> out;
  out.reserve(points_.size());
  for (const Point& p : points_) out.push_back(cell_of(p, height_, width_));
  return out;
}

}  // namespace crowdloc::targets
