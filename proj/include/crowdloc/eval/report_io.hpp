#pragma once

#include <string>

#include "crowdloc/common/json_io.hpp"
#include "crowdloc/eval/density.hpp"

namespace crowdloc::eval {

Json to_json(const Counts& counts);
Counts counts_from_json(const Json& value);
Json to_json(const Metrics& metrics);

// {"tp","fp","fn","gamma","pairs":[[pred, ref, distance], ...]}
Json to_json(const MatchReport& report);
MatchReport match_report_from_json(const Json& value);

Json to_json(const DensityBucketTable& table);
std::string to_csv(const DensityBucketTable& table);

}  // namespace crowdloc::eval
