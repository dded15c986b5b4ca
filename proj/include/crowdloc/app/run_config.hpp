#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "crowdloc/common/json_io.hpp"
#include "crowdloc/data/augment.hpp"
#include "crowdloc/nn/adam.hpp"
#include "crowdloc/nn/model.hpp"

namespace crowdloc::app {

struct RunConfig {
  // [data]
  std::string train_dir;
  std::string val_dir;         // empty: split train_dir
  double train_fraction = 0.8;
  // [model]
  nn::ModelConfig model;
  // [optim]
  double lr = 3e-4;
  double weight_decay = 1e-3;
  int batch_size = 8;
  int epochs = 150;
  // [augment]
  bool augment = true;
  data::AugmentConfig augmentation;
  // [run]
  std::uint64_t seed = 0;
  std::string output_dir = "runs/default";
  bool validate_on_train = false;  // validation set = training set (overfit checks)
  double gamma = 1.0;
  bool resume = false;

  nn::AdamOptions adam() const;
  void validate() const;
};

// Flat "[section]\nkey = value" text; '#' starts a comment, strings may be quoted.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string to_text(const RunConfig& config);

// "section.key=value" (or "key=value" for unambiguous keys).
void apply_override(RunConfig& config, const std::string& assignment);
// Ablation switches: "dcpan=on|off", "hfgdu=on|off|bilinear|nearest".
void apply_ablation(RunConfig& config, const std::string& assignment);

Json to_json(const RunConfig& config);
RunConfig run_config_from_json(const Json& value);

Json to_json(const nn::ModelConfig& config);
nn::ModelConfig model_config_from_json(const Json& value);

// Relative paths resolve against $CROWDLOC_OUTPUT_ROOT when it is set.
std::filesystem::path resolve_output(const std::filesystem::path& path);

}  // namespace crowdloc::app
