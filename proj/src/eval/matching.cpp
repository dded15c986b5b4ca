#include "crowdloc/eval/matching.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "crowdloc/common/error.hpp"

namespace crowdloc::eval {

MatchReport match_points(const std::vector<Point>& pred, const std::vector<Point>& ref, double gamma) {
  check(gamma > 0.0, ErrorKind::invalid_argument, "match_points: gamma must be positive");
  std::vector<MatchPair> candidates;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t j = 0; j < ref.size(); ++j) {
      const double d = std::hypot(pred[i].row - ref[j].row, pred[i].col - ref[j].col);
      if (d <= gamma) candidates.push_back({int(i), int(j), d});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const MatchPair& a, const MatchPair& b) {
    return std::tie(a.distance, a.pred, a.ref) < std::tie(b.distance, b.pred, b.ref);
  });
  std::vector<char> pred_used(pred.size(), 0);
  std::vector<char> ref_used(ref.size(), 0);
  MatchReport report;
  report.gamma = gamma;
  for (const auto& c : candidates) {
    if (pred_used[c.pred] || ref_used[c.ref]) continue;
    pred_used[c.pred] = 1;
    ref_used[c.ref] = 1;
    report.pairs.push_back(c);
  }
  report.counts.tp = static_cast<long long>(report.pairs.size());
  report.counts.fp = static_cast<long long>(pred.size()) - report.counts.tp;
  report.counts.fn = static_cast<long long>(ref.size()) - report.counts.tp;
  return report;
}

std::vector<Point> detection_points(const decode::DetectionSet& set) {
  std::vector<Point> out;
  out.reserve(set.detections.size());
  for (const auto& d : set.detections) out.push_back({double(d.row), double(d.col)});
  return out;
}

MatchReport match_points(const decode::DetectionSet& pred, const targets::PointSet& ref, double gamma) {
  return match_points(detection_points(pred), ref.points(), gamma);
}

Metrics metrics(const Counts& c) {
  auto ratio = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };
  Metrics m;
  m.recall = ratio(double(c.tp), double(c.tp + c.fn));
  m.precision = ratio(double(c.tp), double(c.tp + c.fp));
  m.f1 = ratio(2.0 * m.recall * m.precision, m.recall + m.precision);
  return m;
}

}  // namespace crowdloc::eval
