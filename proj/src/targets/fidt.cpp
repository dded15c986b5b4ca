#include "crowdloc/targets/fidt.hpp"

#include <cmath>
#include <limits>

#include "crowdloc/common/error.hpp"

namespace crowdloc::targets {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Squared distance transform of a sampled 1-D function (Felzenszwalb & Huttenlocher).
void squared_edt_1d(const double* f, double* out, int n, std::vector<int>& v,
                    std::vector<double>& z) {
  v.assign(static_cast<std::size_t>(n), 0);
  z.assign(static_cast<std::size_t>(n) + 1, 0.0);
  int k = 0;
  int first = 0;
  while (first < n && f[first] == kInf) ++first;
  if (first == n) {
    for (int q = 0; q < n; ++q) out[q] = kInf;
    return;
  }
  v[0] = first;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = first + 1; q < n; ++q) {
    if (f[q] == kInf) continue;
    auto intersect = [&](int p) {
      return ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * q - 2.0 * p);
    };
    double s = intersect(v[k]);
    // z[0] is -inf, so this stops at k == 0
    while (s <= z[k]) {
      --k;
      s = intersect(v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double d = q - v[k];
    out[q] = d * d + f[v[k]];
  }
}

}  // namespace

DistanceMap distance_transform(const PointSet& points) {
  check(!points.empty(), ErrorKind::invalid_argument, "no annotations");
  const int h = points.height();
  const int w = points.width();
  Grid<double> sq(h, w, kInf);
  for (const Cell& c : points.cells()) sq(c.row, c.col) = 0.0;

  std::vector<int> v;
  std::vector<double> z;
  std::vector<double> in(static_cast<std::size_t>(std::max(h, w)));
  std::vector<double> out(in.size());

  for (int col = 0; col < w; ++col) {
    for (int row = 0; row < h; ++row) in[row] = sq(row, col);
    squared_edt_1d(in.data(), out.data(), h, v, z);
    for (int row = 0; row < h; ++row) sq(row, col) = out[row];
  }
  for (int row = 0; row < h; ++row) {
    squared_edt_1d(&sq(row, 0), out.data(), w, v, z);
    for (int col = 0; col < w; ++col) sq(row, col) = std::sqrt(out[col]);
  }
  return sq;
}

double fidt_value(double distance, const FidtParams& params) {
  check(params.c > 0.0, ErrorKind::invalid_argument, "division-by-zero guard violated");
  check(params.alpha >= 0.0 && params.beta >= 0.0, ErrorKind::invalid_argument,
        "FIDT alpha and beta must be non-negative");
  const double exponent = params.alpha * distance + params.beta;
  const double powered = distance == 0.0 ? 0.0 : std::pow(distance, exponent);
  return 1.0 / (powered + params.c);
}

Grid<float> fidt_from_distance(const DistanceMap& distance, const FidtParams& params) {
  check(params.c > 0.0, ErrorKind::invalid_argument, "division-by-zero guard violated");
  Grid<float> out(distance.height(), distance.width());
  auto src = distance.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = static_cast<float>(fidt_value(src[i], params));
  }
  return out;
}

FidtMap fidt_map(const PointSet& points, const FidtParams& params) {
  check(params.c > 0.0, ErrorKind::invalid_argument, "division-by-zero guard violated");
  return {fidt_from_distance(distance_transform(points), params), params};
}

}  // namespace crowdloc::targets
