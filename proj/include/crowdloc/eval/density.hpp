#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crowdloc/eval/matching.hpp"

namespace crowdloc::eval {

struct DensityBucket {
  std::string label;
  int min_count = 1;
  std::optional<int> max_count;  // inclusive; none = open-ended

  std::string range() const;
};

// 1-5, 6-20, 21-45, 46-100, 101-800, 800+ (the last holds counts above 800).
const std::array<DensityBucket, 6>& density_buckets();
std::size_t bucket_index(int ref_count);

struct BucketRow {
  DensityBucket bucket;
  int n_images = 0;
  Counts counts;
  Metrics metrics;
};

struct DensityBucketTable {
  std::vector<BucketRow> rows;
};

struct ImageResult {
  MatchReport report;
  int ref_count = 0;
};

DensityBucketTable density_bucket_report(const std::vector<ImageResult>& images);

// Metric lines over image-count bars, one group per bucket.
std::string density_plot_svg(const DensityBucketTable& table);

}  // namespace crowdloc::eval
