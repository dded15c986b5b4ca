#pragma once

#include <vector>

#include "crowdloc/decode/lmds.hpp"
#include "crowdloc/targets/point_set.hpp"

namespace crowdloc::eval {

using targets::Point;

struct MatchPair {
  int pred = 0;
  int ref = 0;
  double distance = 0.0;
  friend bool operator==(const MatchPair&, const MatchPair&) = default;
};

struct Counts {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;

  Counts& operator+=(const Counts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const Counts&, const Counts&) = default;
};

struct MatchReport {
  Counts counts;
  std::vector<MatchPair> pairs;
  double gamma = 1.0;
  friend bool operator==(const MatchReport&, const MatchReport&) = default;
};

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Greedy one-to-one matching: all pairs within gamma, ascending by distance
// (ties by pred index, then ref index), accepted while both ends are free.
MatchReport match_points(const std::vector<Point>& pred, const std::vector<Point>& ref, double gamma = 1.0);
MatchReport match_points(const decode::DetectionSet& pred, const targets::PointSet& ref, double gamma = 1.0);

// 0/0 evaluates to 0.
Metrics metrics(const Counts& counts);
inline Metrics metrics(const MatchReport& report) { return metrics(report.counts); }

std::vector<Point> detection_points(const decode::DetectionSet& set);

}  // namespace crowdloc::eval
