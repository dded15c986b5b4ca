#include "crowdloc/eval/report_io.hpp"

#include <iomanip>
#include <sstream>

#include "crowdloc/common/error.hpp"

namespace crowdloc::eval {

Json to_json(const Counts& c) { return Json{{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}}; }

Counts counts_from_json(const Json& value) {
  try {
    return {value.at("tp").get<long long>(), value.at("fp").get<long long>(), value.at("fn").get<long long>()};
  } catch (const Json::exception& e) {
    fail(ErrorKind::load, std::string("malformed counts JSON: ") + e.what());
  }
}

Json to_json(const Metrics& m) {
  return Json{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
}

Json to_json(const MatchReport& report) {
  Json pairs = Json::array();
  for (const auto& p : report.pairs) pairs.push_back({p.pred, p.ref, p.distance});
  Json out = to_json(report.counts);
  out["gamma"] = report.gamma;
  out["pairs"] = pairs;
  return out;
}

MatchReport match_report_from_json(const Json& value) {
  MatchReport r;
  r.counts = counts_from_json(value);
  try {
    r.gamma = value.at("gamma").get<double>();
    for (const auto& p : value.at("pairs")) {
      r.pairs.push_back({p.at(0).get<int>(), p.at(1).get<int>(), p.at(2).get<double>()});
    }
  } catch (const Json::exception& e) {
    fail(ErrorKind::load, std::string("malformed match report JSON: ") + e.what());
  }
  return r;
}

Json to_json(const DensityBucketTable& table) {
  Json rows = Json::array();
  for (const auto& r : table.rows) {
    Json row{{"label", r.bucket.label}, {"range", r.bucket.range()}, {"min_count", r.bucket.min_count},
             {"n_images", r.n_images}};
    row["max_count"] = r.bucket.max_count ? Json(*r.bucket.max_count) : Json(nullptr);
    row.update(to_json(r.counts));
    row.update(to_json(r.metrics));
    rows.push_back(row);
  }
  return Json{{"buckets", rows}};
}

std::string to_csv(const DensityBucketTable& table) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "label,range,n_images,tp,fp,fn,precision,recall,f1\n";
  for (const auto& r : table.rows) {
    out << r.bucket.label << "," << r.bucket.range() << "," << r.n_images << "," << r.counts.tp << ","
        << r.counts.fp << "," << r.counts.fn << "," << r.metrics.precision << "," << r.metrics.recall << ","
        << r.metrics.f1 << "\n";
  }
  return out.str();
}

}  // namespace crowdloc::eval
