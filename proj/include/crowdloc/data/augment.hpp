#pragma once

#include <optional>
#include <random>

#include "crowdloc/data/annotations.hpp"

namespace crowdloc::data {

using Rng = std::mt19937_64;

struct Rect {
  int row = 0;
  int col = 0;
  int height = 0;
  int width = 0;

  bool contains(int r, int c) const noexcept {
    return r >= row && r < row + height && c >= col && c < col + width;
  }
};

AnnotatedPatch hflip(const AnnotatedPatch& patch);  // col -> W - 1 - col
AnnotatedPatch vflip(const AnnotatedPatch& patch);  // row -> H - 1 - row

// Pastes partner[src_row.., src_col..] (dst-sized) into target at dst. Target points
// whose cell lies inside dst are dropped; partner points inside the source window
// are imported, translated by (dst - src). Returns nullopt if no point survives.
std::optional<AnnotatedPatch> cutmix(const AnnotatedPatch& target, const AnnotatedPatch& partner, const Rect& dst,
                                     int src_row, int src_col);

struct AugmentConfig {
  bool hflip = true;
  bool vflip = true;
  bool cutmix = true;
  double flip_probability = 0.5;
  double cutmix_probability = 0.5;
  double cutmix_min_area = 0.1;  // fraction of the patch area
  double cutmix_max_area = 0.4;
};

// Random flips, then CutMix with the partner when one is supplied.
std::optional<AnnotatedPatch> augment(const AnnotatedPatch& patch, const AnnotatedPatch* partner, Rng& rng,
                                      const AugmentConfig& config = {});

}  // namespace crowdloc::data
