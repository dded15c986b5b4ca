#include "crowdloc/app/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "crowdloc/data/tiling.hpp"
#include "crowdloc/eval/report_io.hpp"
#include "crowdloc/nn/checkpoint.hpp"

namespace crowdloc::app {

namespace fs = std::filesystem;

Normalization compute_normalization(const std::vector<data::AnnotatedPatch>& patches) {
  check(!patches.empty(), ErrorKind::invalid_argument, "normalization needs at least one image");
  const int channels = patches.front().image.channels();
  std::vector<double> sum(std::size_t(channels), 0.0);
  std::vector<double> sq(std::size_t(channels), 0.0);
  double count = 0.0;
  for (const auto& p : patches) {
    check(p.image.channels() == channels, ErrorKind::shape, "patch '" + p.id + "' has a different channel count");
    const std::size_t plane = std::size_t(p.image.height()) * p.image.width();
    const auto& v = p.image.values();
    for (int c = 0; c < channels; ++c) {
      for (std::size_t i = 0; i < plane; ++i) {
        const double x = v[std::size_t(c) * plane + i];
        sum[std::size_t(c)] += x;
        sq[std::size_t(c)] += x * x;
      }
    }
    count += double(plane);
  }
  Normalization norm;
  for (int c = 0; c < channels; ++c) {
    const double mean = sum[std::size_t(c)] / count;
    const double var = std::max(sq[std::size_t(c)] / count - mean * mean, 0.0);
    norm.mean.push_back(float(mean));
    norm.stddev.push_back(float(std::max(std::sqrt(var), 1e-3)));
  }
  return norm;
}

Json to_json(const Normalization& norm) { return Json{{"mean", norm.mean}, {"std", norm.stddev}}; }

Normalization normalization_from_json(const Json& value) {
  Normalization norm;
  try {
    norm.mean = value.at("mean").get<std::vector<float>>();
    norm.stddev = value.at("std").get<std::vector<float>>();
  } catch (const Json::exception& e) {
    fail(ErrorKind::load, std::string("malformed normalization block: ") + e.what());
  }
  check(norm.mean.size() == norm.stddev.size() && !norm.mean.empty(), ErrorKind::load,
        "normalization mean/std lengths differ");
  return norm;
}

nn::Tensor<float> make_input(const std::vector<const data::Image*>& images, const Normalization& norm) {
  check(!images.empty(), ErrorKind::invalid_argument, "empty image batch");
  const int c = images.front()->channels();
  const int h = images.front()->height();
  const int w = images.front()->width();
  check(std::size_t(c) == norm.mean.size(), ErrorKind::shape,
        "image has " + std::to_string(c) + " channels but normalization has " + std::to_string(norm.mean.size()));
  nn::Tensor<float> out(nn::Shape{int(images.size()), c, h, w});
  for (std::size_t n = 0; n < images.size(); ++n) {
    const auto& img = *images[n];
    check(img.channels() == c && img.height() == h && img.width() == w, ErrorKind::shape,
          "batch images must share one size");
    for (int ch = 0; ch < c; ++ch) {
      const float m = norm.mean[std::size_t(ch)];
      const float inv = 1.0f / norm.stddev[std::size_t(ch)];
      float* dst = out.plane(int(n), ch);
      for (int r = 0; r < h; ++r) {
        for (int q = 0; q < w; ++q) dst[std::size_t(r) * w + q] = (img.at(ch, r, q) - m) * inv;
      }
    }
  }
  return out;
}

fs::path checkpoint_stem(const fs::path& path) {
  if (path.extension() == ".bin" || path.extension() == ".json") {
    fs::path stem = path;
    return stem.replace_extension();
  }
  return path;
}

void save_checkpoint(const fs::path& stem, nn::CrowdNet<float>& net, Json meta) {
  if (stem.has_parent_path()) fs::create_directories(stem.parent_path());
  const auto entries = nn::model_state(net);
  Json manifest = Json::array();
  for (const auto& e : entries) {
    const auto& s = e.tensor.shape();
    manifest.push_back({{"name", e.name}, {"shape", {s.n, s.c, s.h, s.w}}});
  }
  meta["format"] = "crowdloc-checkpoint";
  meta["model"] = to_json(net.config());
  meta["manifest"] = std::move(manifest);
  nn::write_archive(fs::path(stem.string() + ".bin"), entries);
  write_json_file(fs::path(stem.string() + ".json"), meta);
}

LoadedModel load_checkpoint(const fs::path& path) {
  const fs::path stem = checkpoint_stem(path);
  const fs::path meta_path = stem.string() + ".json";
  const fs::path bin_path = stem.string() + ".bin";
  check(fs::exists(meta_path), ErrorKind::load, "checkpoint metadata not found: " + meta_path.string());
  check(fs::exists(bin_path), ErrorKind::load, "checkpoint archive not found: " + bin_path.string());
  LoadedModel out;
  out.meta = read_json_file(meta_path);
  check(out.meta.value("format", "") == "crowdloc-checkpoint", ErrorKind::load,
        meta_path.string() + " is not a checkpoint sidecar");
  const nn::ModelConfig config = model_config_from_json(out.meta.at("model"));
  out.net = std::make_unique<nn::CrowdNet<float>>(config, 0);
  nn::load_model_state(*out.net, nn::read_archive(bin_path));
  out.net->set_training(false);
  out.norm = normalization_from_json(out.meta.at("normalization"));
  return out;
}

Predictor::Predictor(nn::CrowdNet<float>& net, Normalization norm, int tile, int overlap)
    : net_(net), norm_(std::move(norm)), tile_(tile), overlap_(overlap) {
  check(tile >= 1 && overlap >= 0 && overlap < tile, ErrorKind::config, "tile/overlap must satisfy 0 <= overlap < tile");
}

Grid<float> Predictor::location_map(const data::Image& image) {
  const int unit = 1 << net_.config().hourglass_levels;
  const int h = image.height();
  const int w = image.width();
  const int ph = (h + unit - 1) / unit * unit;
  const int pw = (w + unit - 1) / unit * unit;
  data::Image padded = image;
  if (ph != h || pw != w) {
    padded = data::Image(image.channels(), ph, pw);
    for (int c = 0; c < image.channels(); ++c) {
      for (int r = 0; r < ph; ++r) {
        for (int q = 0; q < pw; ++q) padded.at(c, r, q) = image.at(c, std::min(r, h - 1), std::min(q, w - 1));
      }
    }
  }
  nn::NoGradGuard no_grad;
  const bool was_training = net_.training();
  net_.set_training(false);
  const auto maps = net_.forward(nn::Var<float>(make_input({&padded}, norm_)));
  net_.set_training(was_training);
  const auto& last = maps.back().value();
  Grid<float> out(h, w);
  for (int r = 0; r < h; ++r) {
    for (int q = 0; q < w; ++q) out(r, q) = last.at(0, 0, r, q);
  }
  return out;
}

decode::DetectionSet Predictor::detect(const data::Image& image) {
  if (image.height() <= tile_ && image.width() <= tile_) return decode::lmds(location_map(image));
  std::vector<data::TileDetections> parts;
  for (const auto& t : data::tile_for_inference(image, tile_, overlap_)) {
    parts.push_back({decode::lmds(location_map(t.image)), t.row_offset, t.col_offset});
  }
  return data::merge_detections(parts, image.height(), image.width());
}

DatasetEvaluation evaluate(Predictor& predictor, const std::vector<data::AnnotatedPatch>& patches, double gamma) {
  DatasetEvaluation out;
  out.gamma = gamma;
  for (const auto& p : patches) {
    auto detections = predictor.detect(p.image);
    auto report = eval::match_points(detections, p.points, gamma);
    out.counts += report.counts;
    out.ids.push_back(p.id);
    out.detections.push_back(std::move(detections));
    out.reports.push_back(std::move(report));
    out.ref_counts.push_back(int(p.points.size()));
  }
  out.metrics = eval::metrics(out.counts);
  return out;
}

eval::DensityBucketTable density_table(const DatasetEvaluation& evaluation) {
  std::vector<eval::ImageResult> images;
  for (std::size_t i = 0; i < evaluation.reports.size(); ++i) {
    if (evaluation.ref_counts[i] >= 1) images.push_back({evaluation.reports[i], evaluation.ref_counts[i]});
  }
  return eval::density_bucket_report(images);
}

void write_evaluation(const fs::path& dir, const DatasetEvaluation& ev, const Json& context) {
  fs::create_directories(dir);
  Json metrics = context;
  metrics["gamma"] = ev.gamma;
  metrics["images"] = ev.ids.size();
  metrics["counts"] = eval::to_json(ev.counts);
  metrics["metrics"] = eval::to_json(ev.metrics);
  write_json_file(dir / "metrics.json", metrics);

  std::ostringstream csv;
  csv.precision(17);
  csv << "images,tp,fp,fn,precision,recall,f1,gamma\n"
      << ev.ids.size() << ',' << ev.counts.tp << ',' << ev.counts.fp << ',' << ev.counts.fn << ','
      << ev.metrics.precision << ',' << ev.metrics.recall << ',' << ev.metrics.f1 << ',' << ev.gamma << "\n";
  write_text_file(dir / "metrics.csv", csv.str());

  Json per_image = Json::array();
  for (std::size_t i = 0; i < ev.ids.size(); ++i) {
    per_image.push_back({{"id", ev.ids[i]},
                         {"ref_count", ev.ref_counts[i]},
                         {"report", eval::to_json(ev.reports[i])},
                         {"detections", decode::to_json(ev.detections[i])}});
  }
  write_json_file(dir / "per_image.json", per_image);

  const auto table = density_table(ev);
  write_json_file(dir / "density.json", eval::to_json(table));
  write_text_file(dir / "density.csv", eval::to_csv(table));
  write_text_file(dir / "density.svg", eval::density_plot_svg(table));
}

eval::Counts recompute_counts(const fs::path& per_image_json) {
  eval::Counts total;
  for (const auto& item : read_json_file(per_image_json)) {
    total += eval::match_report_from_json(item.at("report")).counts;
  }
  return total;
}

}  // namespace crowdloc::app
