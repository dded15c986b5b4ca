#include "crowdloc/app/commands.hpp"

#include <algorithm>

#include "crowdloc/data/annotations.hpp"

namespace crowdloc::app {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> dataset_ids(const fs::path& dir) {
  check(fs::is_directory(dir), ErrorKind::io, "not a directory: " + dir.string());
  if (fs::exists(dir / "manifest.txt")) return data::read_manifest(dir);
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto& p = entry.path();
    if (p.extension() == ".png" && fs::exists(fs::path(p).replace_extension(".json"))) ids.push_back(p.stem().string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace

std::vector<std::string> cmd_fidt(const fs::path& annotations_dir, const fs::path& out_dir,
                                  const targets::FidtParams& params) {
  const auto ids = dataset_ids(annotations_dir);
  check(!ids.empty(), ErrorKind::load, "no annotated patches in " + annotations_dir.string());
  fs::create_directories(out_dir);
  for (const auto& id : ids) {
    const auto patch = data::load_annotations(annotations_dir / (id + ".png"));
    check(!patch.points.empty(), ErrorKind::load, "patch '" + id + "': no annotations, cannot build a FIDT map");
    targets::write_fidt_file(out_dir / (id + ".fidt"), targets::fidt_map(patch.points, params).values);
  }
  data::write_manifest(out_dir, ids);
  return ids;
}

std::vector<std::string> cmd_synth(const data::SynthConfig& config, int count, const fs::path& out_dir,
                                   const std::string& prefix) {
  check(count >= 1, ErrorKind::invalid_argument, "synth count must be >= 1");
  const auto patches = data::synth_dataset(config, count, prefix);
  data::save_dataset(out_dir, patches);
  std::vector<std::string> ids;
  for (const auto& p : patches) ids.push_back(p.id);
  return ids;
}

TrainResult cmd_train(const RunConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  const auto split = load_training_data(config);
  return train(config, split.train, split.val, on_epoch);
}

DatasetEvaluation cmd_eval(const fs::path& checkpoint, const fs::path& data_dir, const fs::path& out_dir,
                           double gamma) {
  check(gamma > 0.0, ErrorKind::invalid_argument, "gamma must be > 0");
  auto model = load_checkpoint(checkpoint);
  const auto patches = data::load_dataset(data_dir);
  Predictor predictor(*model.net, model.norm);
  auto ev = evaluate(predictor, patches, gamma);
  write_evaluation(out_dir, ev,
                   {{"checkpoint", checkpoint_stem(checkpoint).string()}, {"data", data_dir.string()}});
  return ev;
}

data::Image draw_overlay(const data::Image& image, const decode::DetectionSet& detections) {
  data::Image out(3, image.height(), image.width());
  for (int c = 0; c < 3; ++c) {
    const int src = std::min(c, image.channels() - 1);
    for (int r = 0; r < image.height(); ++r) {
      for (int q = 0; q < image.width(); ++q) out.at(c, r, q) = image.at(src, r, q);
    }
  }
  const float colour[3] = {1.0f, 0.0f, 0.0f};
  for (const auto& d : detections.detections) {
    for (int k = -2; k <= 2; ++k) {
      for (const auto& [r, q] : {std::pair{d.row + k, d.col}, std::pair{d.row, d.col + k}}) {
        if (r < 0 || q < 0 || r >= out.height() || q >= out.width()) continue;
        for (int c = 0; c < 3; ++c) out.at(c, r, q) = colour[c];
      }
    }
  }
  return out;
}

decode::DetectionSet cmd_infer(const fs::path& checkpoint, const fs::path& image_path, const fs::path& out_json,
                               const InferOptions& options) {
  auto model = load_checkpoint(checkpoint);
  const auto image = data::read_png(image_path);
  Predictor predictor(*model.net, model.norm, options.tile, options.overlap);
  auto detections = predictor.detect(image);
  if (out_json.has_parent_path()) fs::create_directories(out_json.parent_path());
  write_json_file(out_json, decode::to_json(detections));
  if (options.overlay) data::write_png(*options.overlay, draw_overlay(image, detections));
  return detections;
}

}  // namespace crowdloc::app
