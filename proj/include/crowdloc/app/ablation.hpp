#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "crowdloc/app/run_config.hpp"
#include "crowdloc/eval/matching.hpp"

namespace crowdloc::app {

struct AblationVariant {
  std::string name;
  bool dcpan = false;
  nn::Upsampler upsampler = nn::Upsampler::bilinear;
  // Reference row (F1, recall, precision in percent).
  double reference_f1 = 0.0;
  double reference_recall = 0.0;
  double reference_precision = 0.0;
};

// baseline, +DCPAN, +HFGDU, full.
const std::vector<AblationVariant>& ablation_variants();

struct AblationRow {
  AblationVariant variant;
  eval::Counts counts;
  eval::Metrics metrics;
  int best_epoch = -1;
  std::string eval_dir;  // relative to the report directory
};

struct AblationReport {
  std::vector<AblationRow> rows;
  double gamma = 1.0;
};

// Trains and evaluates every variant under the same seed and data split in
// <output_dir>/<variant>/, then writes ablation.{json,csv,md} to output_dir.
AblationReport cmd_ablate(const RunConfig& config);

Json to_json(const AblationReport& report);
AblationReport ablation_report_from_json(const Json& value);
std::string to_csv(const AblationReport& report);
std::string to_markdown(const AblationReport& report);

}  // namespace crowdloc::app
