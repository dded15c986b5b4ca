#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "crowdloc/common/grid.hpp"
#include "crowdloc/targets/point_set.hpp"

namespace crowdloc::targets {

// Per-pixel Euclidean distance to the nearest annotated cell.
using DistanceMap = Grid<double>;

struct FidtParams {
  double alpha = 0.02;
  double beta = 0.75;
  double c = 1.0;
};

struct FidtMap {
  Grid<float> values;
  FidtParams params;
};

// Exact Euclidean distance transform (separable lower-envelope algorithm).
DistanceMap distance_transform(const PointSet& points);

// 1 / (d^(alpha*d + beta) + c), with 0^x = 0 so annotated cells map to 1/c.
double fidt_value(double distance, const FidtParams& params = {});

FidtMap fidt_map(const PointSet& points, const FidtParams& params = {});
Grid<float> fidt_from_distance(const DistanceMap& distance, const FidtParams& params = {});

// Binary grid file: "FIDTMAP1", u32 height, u32 width, row-major f32, all little-endian.
std::vector<std::uint8_t> encode_fidt_file(const Grid<float>& values);
Grid<float> decode_fidt_file(const std::vector<std::uint8_t>& bytes);
void write_fidt_file(const std::filesystem::path& path, const Grid<float>& values);
Grid<float> read_fidt_file(const std::filesystem::path& path);

}  // namespace crowdloc::targets
