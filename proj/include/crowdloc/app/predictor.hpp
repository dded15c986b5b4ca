#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "crowdloc/app/run_config.hpp"
#include "crowdloc/data/annotations.hpp"
#include "crowdloc/decode/lmds.hpp"
#include "crowdloc/eval/density.hpp"
#include "crowdloc/nn/model.hpp"

namespace crowdloc::app {

// Per-channel standardization computed once on the training images.
struct Normalization {
  std::vector<float> mean;
  std::vector<float> stddev;
};

Normalization compute_normalization(const std::vector<data::AnnotatedPatch>& patches);
Json to_json(const Normalization& norm);
Normalization normalization_from_json(const Json& value);

// Standardized N x C x H x W batch; all images must share one size.
nn::Tensor<float> make_input(const std::vector<const data::Image*>& images, const Normalization& norm);

// Checkpoints are <stem>.bin (parameter archive) + <stem>.json (metadata).
std::filesystem::path checkpoint_stem(const std::filesystem::path& path);
void save_checkpoint(const std::filesystem::path& stem, nn::CrowdNet<float>& net, Json meta);

struct LoadedModel {
  std::unique_ptr<nn::CrowdNet<float>> net;
  Normalization norm;
  Json meta;
};

LoadedModel load_checkpoint(const std::filesystem::path& path);

class Predictor {
 public:
  Predictor(nn::CrowdNet<float>& net, Normalization norm, int tile = 256, int overlap = 32);

  // Final-stage location map at the image's own size (inputs are replicate-padded
  // up to the hourglass granularity and the map cropped back).
  Grid<float> location_map(const data::Image& image);

  // Whole-image LMDS when the image fits in one tile, tiled + merged otherwise.
  decode::DetectionSet detect(const data::Image& image);

 private:
  nn::CrowdNet<float>& net_;
  Normalization norm_;
  int tile_;
  int overlap_;
};

struct DatasetEvaluation {
  std::vector<std::string> ids;
  std::vector<decode::DetectionSet> detections;
  std::vector<eval::MatchReport> reports;
  std::vector<int> ref_counts;
  eval::Counts counts;
  eval::Metrics metrics;
  double gamma = 1.0;
};

DatasetEvaluation evaluate(Predictor& predictor, const std::vector<data::AnnotatedPatch>& patches, double gamma);

// Images with at least one reference point; empty scenes have no density bucket.
eval::DensityBucketTable density_table(const DatasetEvaluation& evaluation);

// metrics.json, metrics.csv, per_image.json, density.json, density.csv, density.svg.
void write_evaluation(const std::filesystem::path& dir, const DatasetEvaluation& evaluation, const Json& context);

// Sums the per-image reports in per_image.json back into dataset counts.
eval::Counts recompute_counts(const std::filesystem::path& per_image_json);

}  // namespace crowdloc::app
