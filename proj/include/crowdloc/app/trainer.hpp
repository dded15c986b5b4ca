#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "crowdloc/app/predictor.hpp"
#include "crowdloc/app/run_config.hpp"
#include "crowdloc/nn/adam.hpp"

namespace crowdloc::app {

struct StepResult {
  double total = 0.0;
  std::vector<double> stage_losses;
};

// One optimizer update on a batch: sum of the per-stage focal losses.
// A non-finite loss raises ErrorKind::training naming the batch ids, before
// any parameter is touched.
StepResult train_step(nn::CrowdNet<float>& net, nn::Adam<float>& adam,
                      const std::vector<const data::AnnotatedPatch*>& batch, const Normalization& norm);

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  std::vector<double> stage_losses;
  eval::Counts val_counts;
  eval::Metrics val;
};

Json to_json(const EpochRecord& record);
EpochRecord epoch_record_from_json(const Json& value);

struct TrainResult {
  std::vector<EpochRecord> history;
  int best_epoch = -1;
  double best_f1 = -1.0;
  std::filesystem::path output_dir;
  std::filesystem::path best_checkpoint;  // stem
  std::filesystem::path last_checkpoint;  // stem
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Writes into resolve_output(config.output_dir): best.{bin,json}, last.{bin,json},
// optim_last.bin, train_log.{json,csv}, config.toml. With config.resume the run
// continues after the epoch stored in last.json.
TrainResult train(const RunConfig& config, const std::vector<data::AnnotatedPatch>& train_set,
                  const std::vector<data::AnnotatedPatch>& val_set, const EpochCallback& on_epoch = {});

struct DataSplit {
  std::vector<data::AnnotatedPatch> train;
  std::vector<data::AnnotatedPatch> val;
};

// train_dir/val_dir datasets, or a seeded split of train_dir; patches without
// points are dropped from training.
DataSplit load_training_data(const RunConfig& config);

}  // namespace crowdloc::app
