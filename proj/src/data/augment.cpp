#include "crowdloc/data/augment.hpp"

#include <algorithm>
#include <cmath>

namespace crowdloc::data {

using targets::Point;
using targets::PointSet;

AnnotatedPatch hflip(const AnnotatedPatch& patch) {
  const Image& src = patch.image;
  AnnotatedPatch out{Image(src.channels(), src.height(), src.width()), {}, patch.id};
  const int w = src.width();
  for (int c = 0; c < src.channels(); ++c) {
    for (int r = 0; r < src.height(); ++r) {
      for (int q = 0; q < w; ++q) out.image.at(c, r, q) = src.at(c, r, w - 1 - q);
    }
  }
  std::vector<Point> pts;
  for (const auto& p : patch.points.points()) pts.push_back({p.row, double(w - 1) - p.col});
  out.points = PointSet(src.height(), w, std::move(pts));
  return out;
}

AnnotatedPatch vflip(const AnnotatedPatch& patch) {
  const Image& src = patch.image;
  AnnotatedPatch out{Image(src.channels(), src.height(), src.width()), {}, patch.id};
  const int h = src.height();
  for (int c = 0; c < src.channels(); ++c) {
    for (int r = 0; r < h; ++r) {
      for (int q = 0; q < src.width(); ++q) out.image.at(c, r, q) = src.at(c, h - 1 - r, q);
    }
  }
  std::vector<Point> pts;
  for (const auto& p : patch.points.points()) pts.push_back({double(h - 1) - p.row, p.col});
  out.points = PointSet(h, src.width(), std::move(pts));
  return out;
}

std::optional<AnnotatedPatch> cutmix(const AnnotatedPatch& target, const AnnotatedPatch& partner, const Rect& dst,
                                     int src_row, int src_col) {
  const Image& ti = target.image;
  const Image& pi = partner.image;
  check(ti.channels() == pi.channels(), ErrorKind::shape, "cutmix: channel mismatch");
  check(dst.height > 0 && dst.width > 0 && dst.row >= 0 && dst.col >= 0 && dst.row + dst.height <= ti.height() &&
            dst.col + dst.width <= ti.width(),
        ErrorKind::invalid_argument, "cutmix: destination rectangle outside target");
  check(src_row >= 0 && src_col >= 0 && src_row + dst.height <= pi.height() && src_col + dst.width <= pi.width(),
        ErrorKind::invalid_argument, "cutmix: source window outside partner");

  AnnotatedPatch out{ti, {}, target.id};
  for (int c = 0; c < ti.channels(); ++c) {
    for (int r = 0; r < dst.height; ++r) {
      for (int q = 0; q < dst.width; ++q) {
        out.image.at(c, dst.row + r, dst.col + q) = pi.at(c, src_row + r, src_col + q);
      }
    }
  }
  std::vector<Point> pts;
  const auto tcells = target.points.cells();
  for (std::size_t i = 0; i < tcells.size(); ++i) {
    if (!dst.contains(tcells[i].row, tcells[i].col)) pts.push_back(target.points.points()[i]);
  }
  const Rect src{src_row, src_col, dst.height, dst.width};
  const auto pcells = partner.points.cells();
  const double drow = dst.row - src_row;
  const double dcol = dst.col - src_col;
  for (std::size_t i = 0; i < pcells.size(); ++i) {
    if (!src.contains(pcells[i].row, pcells[i].col)) continue;
    const Point& p = partner.points.points()[i];
    Point moved{p.row + drow, p.col + dcol};
    const auto cell = PointSet::cell_of(moved, ti.height(), ti.width());
    // clamped border cells can drift by one pixel; snap those to the translated cell
    if (!dst.contains(cell.row, cell.col)) moved = {pcells[i].row + drow, pcells[i].col + dcol};
    pts.push_back(moved);
  }
  if (pts.empty()) return std::nullopt;
  out.points = PointSet(ti.height(), ti.width(), std::move(pts));
  return out;
}

std::optional<AnnotatedPatch> augment(const AnnotatedPatch& patch, const AnnotatedPatch* partner, Rng& rng,
                                      const AugmentConfig& config) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  AnnotatedPatch out = patch;
  if (config.hflip && unit(rng) < config.flip_probability) out = hflip(out);
  if (config.vflip && unit(rng) < config.flip_probability) out = vflip(out);
  if (config.cutmix && partner && unit(rng) < config.cutmix_probability) {
    const int h = out.image.height();
    const int w = out.image.width();
    const double area = config.cutmix_min_area + unit(rng) * (config.cutmix_max_area - config.cutmix_min_area);
    const double side = std::sqrt(area);
    const int rh = std::clamp(int(std::lround(side * h)), 1, std::min(h, partner->image.height()));
    const int rw = std::clamp(int(std::lround(side * w)), 1, std::min(w, partner->image.width()));
    std::uniform_int_distribution<int> dr(0, h - rh);
    std::uniform_int_distribution<int> dc(0, w - rw);
    std::uniform_int_distribution<int> sr(0, partner->image.height() - rh);
    std::uniform_int_distribution<int> sc(0, partner->image.width() - rw);
    const Rect dst{dr(rng), dc(rng), rh, rw};
    const int src_row = sr(rng);
    const int src_col = sc(rng);
    return cutmix(out, *partner, dst, src_row, src_col);
  }
  if (out.points.empty()) return std::nullopt;
  return out;
}

}  // namespace crowdloc::data
