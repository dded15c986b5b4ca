#include "crowdloc/app/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "crowdloc/data/split.hpp"
#include "crowdloc/eval/report_io.hpp"
#include "crowdloc/nn/checkpoint.hpp"
#include "crowdloc/nn/focal_loss.hpp"
#include "crowdloc/nn/ops.hpp"
#include "crowdloc/targets/fidt.hpp"

namespace crowdloc::app {

namespace fs = std::filesystem;

namespace {

std::string id_list(const std::vector<const data::AnnotatedPatch*>& batch) {
  std::string out;
  for (const auto* p : batch) out += (out.empty() ? "" : ", ") + p->id;
  return out;
}

nn::Tensor<float> fidt_batch(const std::vector<const data::AnnotatedPatch*>& batch) {
  const int h = batch.front()->image.height();
  const int w = batch.front()->image.width();
  nn::Tensor<float> out(nn::Shape{int(batch.size()), 1, h, w});
  for (std::size_t n = 0; n < batch.size(); ++n) {
    const auto map = targets::fidt_map(batch[n]->points);
    std::copy(map.values.data(), map.values.data() + map.values.size(), out.plane(int(n), 0));
  }
  return out;
}

Json history_json(const std::vector<EpochRecord>& history) {
  Json out = Json::array();
  for (const auto& r : history) out.push_back(to_json(r));
  return out;
}

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::ostringstream out;
  out.precision(10);
  out << "epoch,loss,stage1_loss,stage2_loss,val_tp,val_fp,val_fn,val_precision,val_recall,val_f1\n";
  for (const auto& r : history) {
    out << r.epoch << ',' << r.loss;
    for (std::size_t s = 0; s < 2; ++s) out << ',' << (s < r.stage_losses.size() ? r.stage_losses[s] : 0.0);
    out << ',' << r.val_counts.tp << ',' << r.val_counts.fp << ',' << r.val_counts.fn << ',' << r.val.precision << ','
        << r.val.recall << ',' << r.val.f1 << "\n";
  }
  return out.str();
}

// Flips + CutMix with a random partner; a patch CutMix empties falls back to the original.
data::AnnotatedPatch augmented(const RunConfig& config, const std::vector<data::AnnotatedPatch>& set, std::size_t index,
                               int epoch) {
  const auto& patch = set[index];
  data::Rng rng(derive_seed(config.seed, "augment:" + std::to_string(epoch) + ":" + patch.id));
  const data::AnnotatedPatch* partner = nullptr;
  if (set.size() > 1) {
    std::size_t j = std::uniform_int_distribution<std::size_t>(0, set.size() - 2)(rng);
    if (j >= index) ++j;
    if (set[j].image.height() == patch.image.height() && set[j].image.width() == patch.image.width()) {
      partner = &set[j];
    }
  }
  auto out = data::augment(patch, partner, rng, config.augmentation);
  return out ? std::move(*out) : patch;
}

}  // namespace

StepResult train_step(nn::CrowdNet<float>& net, nn::Adam<float>& adam,
                      const std::vector<const data::AnnotatedPatch*>& batch, const Normalization& norm) {
  check(!batch.empty(), ErrorKind::invalid_argument, "train_step: empty batch");
  std::vector<const data::Image*> images;
  std::vector<targets::PointSet> points;
  for (const auto* p : batch) {
    images.push_back(&p->image);
    points.push_back(p->points);
  }
  const auto target = fidt_batch(batch);
  const auto centers = nn::center_mask<float>(points);

  net.set_training(true);
  adam.zero_grad();
  const auto maps = net.forward(nn::Var<float>(make_input(images, norm)));
  StepResult result;
  nn::Var<float> total;
  for (const auto& map : maps) {
    auto loss = nn::focal_loss(map, target, centers);
    result.stage_losses.push_back(double(loss.value()[0]));
    total = total.defined() ? nn::add(total, loss) : loss;
  }
  result.total = double(total.value()[0]);
  check(std::isfinite(result.total), ErrorKind::training, "non-finite loss in batch [" + id_list(batch) + "]");
  nn::backward(total);
  adam.step();
  return result;
}

Json to_json(const EpochRecord& r) {
  return Json{{"epoch", r.epoch},
              {"loss", r.loss},
              {"stage_losses", r.stage_losses},
              {"val_counts", eval::to_json(r.val_counts)},
              {"val", eval::to_json(r.val)}};
}

EpochRecord epoch_record_from_json(const Json& v) {
  EpochRecord r;
  r.epoch = v.at("epoch").get<int>();
  r.loss = v.at("loss").get<double>();
  r.stage_losses = v.at("stage_losses").get<std::vector<double>>();
  r.val_counts = eval::counts_from_json(v.at("val_counts"));
  r.val = eval::metrics(r.val_counts);
  return r;
}

TrainResult train(const RunConfig& config, const std::vector<data::AnnotatedPatch>& train_set,
                  const std::vector<data::AnnotatedPatch>& val_set, const EpochCallback& on_epoch) {
  config.validate();
  check(!train_set.empty(), ErrorKind::invalid_argument, "training set is empty");
  for (const auto& p : train_set) {
    check(!p.points.empty(), ErrorKind::invalid_argument, "training patch '" + p.id + "' has no points");
    nn::check_input_size(config.model, p.image.height(), p.image.width());
  }

  TrainResult result;
  result.output_dir = resolve_output(config.output_dir);
  fs::create_directories(result.output_dir);
  result.best_checkpoint = result.output_dir / "best";
  result.last_checkpoint = result.output_dir / "last";
  write_text_file(result.output_dir / "config.toml", to_text(config));

  nn::CrowdNet<float> net(config.model, derive_seed(config.seed, "model"));
  nn::Adam<float> adam(net.parameters(), config.adam());
  Normalization norm = compute_normalization(train_set);
  int start_epoch = 0;

  const fs::path last_meta = result.last_checkpoint.string() + ".json";
  if (config.resume && fs::exists(last_meta)) {
    auto loaded = load_checkpoint(result.last_checkpoint);
    check(loaded.net->config() == config.model, ErrorKind::config, "resume: model config differs from the checkpoint");
    nn::load_model_state(net, nn::model_state(*loaded.net));
    nn::load_optimizer_state(adam, net, nn::read_archive(result.output_dir / "optim_last.bin"));
    norm = loaded.norm;
    for (const auto& r : loaded.meta.at("history")) result.history.push_back(epoch_record_from_json(r));
    result.best_epoch = loaded.meta.at("best_epoch").get<int>();
    result.best_f1 = loaded.meta.at("best_f1").get<double>();
    start_epoch = loaded.meta.at("epoch").get<int>() + 1;
  }

  const auto& validation = config.validate_on_train ? train_set : val_set;
  Json optimizer{{"name", "adam"},
                 {"lr", config.lr},
                 {"beta1", adam.options().beta1},
                 {"beta2", adam.options().beta2},
                 {"eps", adam.options().eps},
                 {"weight_decay", config.weight_decay},
                 {"batch_size", config.batch_size},
                 {"epochs", config.epochs}};

  for (int epoch = start_epoch; epoch < config.epochs; ++epoch) {
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 shuffle_rng(derive_seed(config.seed, "shuffle:" + std::to_string(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    EpochRecord record;
    record.epoch = epoch;
    record.stage_losses.assign(2, 0.0);
    int batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += std::size_t(config.batch_size)) {
      const std::size_t end = std::min(order.size(), begin + std::size_t(config.batch_size));
      std::vector<data::AnnotatedPatch> storage;
      std::vector<const data::AnnotatedPatch*> batch;
      if (config.augment) {
        storage.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) storage.push_back(augmented(config, train_set, order[i], epoch));
        for (const auto& p : storage) batch.push_back(&p);
      } else {
        for (std::size_t i = begin; i < end; ++i) batch.push_back(&train_set[order[i]]);
      }
      StepResult step;
      try {
        step = train_step(net, adam, batch, norm);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::training) {
          Json ids = Json::array();
          for (const auto* p : batch) ids.push_back(p->id);
          write_json_file(result.output_dir / "nan_batch.json",
                          {{"epoch", epoch}, {"batch", batches}, {"ids", ids}, {"message", e.what()}});
        }
        throw;
      }
      record.loss += step.total;
      for (std::size_t s = 0; s < step.stage_losses.size() && s < 2; ++s) record.stage_losses[s] += step.stage_losses[s];
      ++batches;
    }
    record.loss /= batches;
    for (auto& s : record.stage_losses) s /= batches;

    if (!validation.empty()) {
      Predictor predictor(net, norm);
      const auto ev = evaluate(predictor, validation, config.gamma);
      record.val_counts = ev.counts;
      record.val = ev.metrics;
    }
    result.history.push_back(record);

    const bool improved = record.val.f1 > result.best_f1;
    if (improved) {
      result.best_f1 = record.val.f1;
      result.best_epoch = epoch;
    }
    Json meta{{"epoch", epoch},
              {"seed", config.seed},
              {"optimizer", optimizer},
              {"history", history_json(result.history)},
              {"loss_history", [&] {
                 Json l = Json::array();
                 for (const auto& r : result.history) l.push_back(r.loss);
                 return l;
               }()},
              {"best_epoch", result.best_epoch},
              {"best_f1", result.best_f1},
              {"normalization", to_json(norm)},
              {"config", to_json(config)}};
    if (improved) save_checkpoint(result.best_checkpoint, net, meta);
    save_checkpoint(result.last_checkpoint, net, meta);
    nn::write_archive(result.output_dir / "optim_last.bin", nn::optimizer_state(adam, net));
    write_json_file(result.output_dir / "train_log.json", history_json(result.history));
    write_text_file(result.output_dir / "train_log.csv", history_csv(result.history));
    if (on_epoch) on_epoch(record);
  }
  return result;
}

DataSplit load_training_data(const RunConfig& config) {
  check(!config.train_dir.empty(), ErrorKind::config, "data.train_dir is not set");
  auto drop_empty = [](std::vector<data::AnnotatedPatch> patches) {
    std::erase_if(patches, [](const data::AnnotatedPatch& p) { return p.points.empty(); });
    return patches;
  };
  DataSplit out;
  auto all = drop_empty(data::load_dataset(config.train_dir));
  if (!config.val_dir.empty()) {
    out.train = std::move(all);
    out.val = data::load_dataset(config.val_dir);
  } else if (config.validate_on_train) {
    out.train = std::move(all);
  } else {
    auto [train, val] = data::split_dataset(all, config.seed, config.train_fraction);
    out.train = std::move(train);
    out.val = std::move(val);
  }
  return out;
}

}  // namespace crowdloc::app
