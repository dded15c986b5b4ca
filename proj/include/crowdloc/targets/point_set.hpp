#pragma once

#include <compare>
#include <vector>

namespace crowdloc::targets {

struct Point {
  double row = 0.0;
  double col = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct Cell {
  int row = 0;
  int col = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

// Annotated individual centers for one image patch. Construction validates
// bounds and the one-point-per-pixel rule.
class PointSet {
 public:
  PointSet() = default;
  PointSet(int height, int width, std::vector<Point> points = {});

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  const std::vector<Point>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }

  // Integer pixel cell each point is anchored to (round half up, clamped).
  std::vector<Cell> cells() const;
  static Cell cell_of(const Point& p, int height, int width);

  friend bool operator==(const PointSet&, const PointSet&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<Point> points_;
};

}  // namespace crowdloc::targets
