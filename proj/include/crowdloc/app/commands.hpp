#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "crowdloc/app/predictor.hpp"
#include "crowdloc/app/run_config.hpp"
#include "crowdloc/app/trainer.hpp"
#include "crowdloc/data/synth.hpp"
#include "crowdloc/targets/fidt.hpp"

namespace crowdloc::app {

// One <id>.fidt per patch listed in annotations_dir/manifest.txt (or every
// *.png with a sidecar when there is no manifest), plus out_dir/manifest.txt.
std::vector<std::string> cmd_fidt(const std::filesystem::path& annotations_dir, const std::filesystem::path& out_dir,
                                  const targets::FidtParams& params = {});

std::vector<std::string> cmd_synth(const data::SynthConfig& config, int count, const std::filesystem::path& out_dir,
                                   const std::string& prefix = "synth");

TrainResult cmd_train(const RunConfig& config, const EpochCallback& on_epoch = {});

DatasetEvaluation cmd_eval(const std::filesystem::path& checkpoint, const std::filesystem::path& data_dir,
                           const std::filesystem::path& out_dir, double gamma = 1.0);

struct InferOptions {
  int tile = 256;
  int overlap = 32;
  std::optional<std::filesystem::path> overlay;  // PNG with detections marked
};

decode::DetectionSet cmd_infer(const std::filesystem::path& checkpoint, const std::filesystem::path& image_path,
                               const std::filesystem::path& out_json, const InferOptions& options = {});

// Red plus markers at each detection.
data::Image draw_overlay(const data::Image& image, const decode::DetectionSet& detections);

}  // namespace crowdloc::app
