// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on failure.
#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "crowdloc/app/ablation.hpp"
#include "crowdloc/app/commands.hpp"
#include "crowdloc/data/split.hpp"
#include "crowdloc/decode/lmds.hpp"
#include "crowdloc/eval/density.hpp"
#include "crowdloc/eval/report_io.hpp"
#include "crowdloc/nn/focal_loss.hpp"
#include "crowdloc/nn/model.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

using namespace crowdloc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      if (!pass) detail << "; ";
      pass = false;
      detail << what;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

fs::path fresh(const fs::path& dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void fidt_oracle_equivalence(Outcome& out) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto pts = testing::random_points(rng, 64, 64, 20, trial % 2 == 1);
    const auto map = targets::fidt_map(pts);
    const auto dist = testing::brute_distance(pts.points(), 64, 64);
    for (std::size_t i = 0; i < dist.size(); ++i) {
      worst = std::max(worst, std::abs(double(map.values.values()[i]) - testing::fidt_oracle(dist[i])));
    }
  }
  const double elapsed = seconds_since(t0);
  out.expect(worst <= 1e-6, "max abs diff " + std::to_string(worst));
  out.expect(elapsed < 60.0, "runtime " + std::to_string(elapsed) + " s");
  out.detail << (out.pass ? "" : "; ") << "max abs diff " << worst << ", " << elapsed << " s";
}

void fidt_spot_checks(Outcome& out) {
  const auto map = targets::fidt_map(targets::PointSet(9, 9, {{4, 4}})).values;
  out.expect(map(4, 4) == 1.0f, "annotated pixel not 1.0");
  out.expect(targets::fidt_value(0.0) == 1.0, "fidt(0) not 1.0");
  const double one = targets::fidt_value(1.0);
  const double two = targets::fidt_value(2.0);
  out.expect(std::abs(one - 0.5) <= 1e-9, "d=1 gives " + std::to_string(one));
  out.expect(std::abs(two - testing::fidt_oracle(2.0)) <= 1e-12, "d=2 disagrees with the oracle");
  out.expect(std::abs(two - 0.3664) <= 1e-4, "d=2 gives " + std::to_string(two));
  out.expect(std::abs(double(map(4, 5)) - 0.5) <= 1e-7, "neighbour pixel not 0.5");
  out.detail << (out.pass ? "" : "; ") << "f(0)=1, f(1)=" << one << ", f(2)=" << two;
}

void lmds_equivalence(Outcome& out) {
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Grid<float> map(64, 64);
    // alternate continuous and quantized maps so plateaus occur
    for (auto& v : map.values()) v = trial % 2 ? std::round(u(rng) * 6.0f) / 6.0f : u(rng);
    if (trial % 10 == 0) {
      for (auto& v : map.values()) v *= 0.095f;
    }
    std::vector<std::tuple<int, int>> got;
    for (const auto& d : decode::lmds(map).detections) got.emplace_back(d.row, d.col);
    if (got != testing::lmds_oracle(map)) ++mismatches;
  }
  out.expect(mismatches == 0, std::to_string(mismatches) + " of 100 maps differ");

  Grid<float> two(16, 16, 0.0f);
  two(4, 4) = 0.9f;
  two(11, 11) = 0.3f;
  const auto filtered = decode::lmds(two);
  out.expect(filtered.detections.size() == 1, "delta case gave " + std::to_string(filtered.detections.size()));
  Grid<float> faint(16, 16, 0.0f);
  faint(8, 8) = 0.09f;
  out.expect(decode::lmds(faint).detections.empty(), "empty rule not applied");
  out.detail << (out.pass ? "" : "; ") << "100 random maps, delta and empty cases";
}

void matching_metrics(Outcome& out) {
  using targets::Point;
  std::mt19937_64 rng(104);
  std::uniform_real_distribution<double> u(0.0, 12.0);
  std::uniform_int_distribution<int> n(0, 10);
  int violations = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Point> a(std::size_t(n(rng))), b(std::size_t(n(rng)));
    for (auto& p : a) p = {u(rng), u(rng)};
    for (auto& p : b) p = {u(rng), u(rng)};
    const auto ab = eval::match_points(a, b, 1.0);
    const auto ba = eval::match_points(b, a, 1.0);
    const auto m1 = eval::metrics(ab);
    const auto m2 = eval::metrics(ba);
    bool ok = ab.counts.tp + ab.counts.fp == (long long)a.size() && ab.counts.tp + ab.counts.fn == (long long)b.size();
    ok = ok && ab.counts.tp == ba.counts.tp;
    ok = ok && m1.precision == m2.recall && m1.recall == m2.precision && m1.f1 == m2.f1;
    // the three formulas, recomputed here
    const double tp = double(ab.counts.tp);
    const double p = tp + ab.counts.fp > 0 ? tp / (tp + ab.counts.fp) : 0.0;
    const double r = tp + ab.counts.fn > 0 ? tp / (tp + ab.counts.fn) : 0.0;
    const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    ok = ok && std::abs(m1.precision - p) <= 1e-15 && std::abs(m1.recall - r) <= 1e-15 && std::abs(m1.f1 - f) <= 1e-15;
    if (!ok) ++violations;
  }
  out.expect(violations == 0, std::to_string(violations) + " of 200 instances violate identities");

  int greedy_gap = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto pred = testing::spaced_points(rng, 6, 12.0, 2.0);
    const auto ref = testing::spaced_points(rng, 6, 12.0, 2.0);
    if (eval::match_points(pred, ref, 1.0).counts.tp != testing::max_matching_oracle(pred, ref, 1.0)) ++greedy_gap;
  }
  out.expect(greedy_gap == 0, std::to_string(greedy_gap) + " of 100 greedy results below maximum");
  out.detail << (out.pass ? "" : "; ") << "200 identity instances, 100 maximum-matching instances";
}

template <typename Module, typename Forward>
testing::GradCheckResult module_check(Module& module, std::vector<testing::Leaf> leaves, Forward f,
                                      std::uint64_t seed) {
  nn::ParamCollector<double> params;
  module.collect(params, "m");
  for (const auto& p : params.params()) leaves.push_back({p.name, p.var});
  return testing::grad_check(leaves, f, seed);
}

void record(Outcome& out, std::ostringstream& log, const std::string& name, const testing::GradCheckResult& r) {
  out.expect(r.max_rel_error <= 1e-4, name + " at " + r.worst);
  out.expect(r.unresolved == 0, name + " has unresolved kink probes");
  if (log.tellp() > 0) log << ", ";
  log << name << " " << r.max_rel_error << " over " << r.checked;
  if (r.kinks > 0) log << " (" << r.kinks << " kink probes redone)";
}

void gradient_verification(Outcome& out) {
  using nn::Tensor;
  using nn::Var;
  const auto t0 = Clock::now();
  std::mt19937_64 data(105);
  nn::Rng rng(106);
  std::ostringstream errs;

  {
    nn::Msfe<double> m(rng);
    auto x = Var<double>(testing::random_tensor({1, 2, 16, 16}, data), true);
    record(out, errs, "msfe", module_check(m, {{"x", &x}}, [&] { return m.forward(x); }, 1));
  }
  {
    nn::Lce<double> m(rng);
    auto x = Var<double>(testing::random_tensor({1, 1, 16, 16}, data), true);
    record(out, errs, "lce", module_check(m, {{"x", &x}}, [&] { return m.forward(x, true); }, 2));
  }
  {
    nn::Dcpan<double> m(rng);
    auto x = Var<double>(testing::random_tensor({1, 4, 16, 16}, data, -2.0, 2.0), true);
    record(out, errs, "dcpan", module_check(m, {{"x", &x}}, [&] { return m.forward(x, true); }, 3));
  }
  {
    nn::Hfgdu<double> m(4, rng);
    auto coarse = Var<double>(testing::random_tensor({1, 4, 8, 8}, data), true);
    auto fine = Var<double>(testing::random_tensor({1, 4, 16, 16}, data), true);
    record(out, errs, "hfgdu",
           module_check(m, {{"coarse", &coarse}, {"fine", &fine}}, [&] { return m.forward(coarse, fine); }, 4));
  }
  {
    auto logits = Var<double>(testing::random_tensor({1, 1, 16, 16}, data, -3.0, 3.0), true);
    const auto target = testing::random_tensor({1, 1, 16, 16}, data, 0.0, 1.0);
    Tensor<double> mask({1, 1, 16, 16}, 0.0);
    mask.at(0, 0, 3, 4) = mask.at(0, 0, 10, 12) = 1.0;
    record(out, errs, "focal_loss",
           testing::grad_check({{"logits", &logits}},
                               [&] { return nn::focal_loss(nn::sigmoid(logits), target, mask); }, 5));
  }
  const double elapsed = seconds_since(t0);
  out.expect(elapsed < 300.0, "runtime " + std::to_string(elapsed) + " s");
  out.detail << (out.pass ? "" : "; ") << "max rel error: " << errs.str() << "; " << elapsed << " s";
}

bool inside_unit(const nn::Tensor<float>& t) {
  for (float v : t.values()) {
    if (!(v > 0.0f && v < 1.0f)) return false;
  }
  return true;
}

void structural_invariants(Outcome& out, int batch) {
  using nn::Tensor;
  using nn::Var;
  const nn::ModelConfig config;
  nn::CrowdNet<float> net(config, 107);
  net.set_training(true);
  std::mt19937_64 data(108);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Tensor<float> image({batch, 3, 256, 256});
  for (auto& v : image.values()) v = u(data);
  {
    nn::NoGradGuard no_grad;
    const auto maps = net.forward(Var<float>(image));
    out.expect(maps.size() == 2, "expected two maps");
    for (const auto& m : maps) {
      out.expect(m.shape() == nn::Shape{batch, 1, 256, 256}, "map shape");
      out.expect(inside_unit(m.value()), "map outside (0,1)");
    }
  }

  const int width = config.base_channels;
  nn::Rng rng(109);
  nn::Dcpan<float> dcpan(rng);
  Tensor<float> feat({batch, width, 32, 32});
  std::normal_distribution<float> g;
  for (auto& v : feat.values()) v = g(data);
  const auto dt = dcpan.trace(Var<float>(feat), true);
  out.expect(inside_unit(dt.weight.value()), "F_w outside (0,1)");
  const auto enc = nn::sa_encode(Var<float>(feat)).value();
  bool max_ge_mean = true;
  for (int n = 0; n < batch; ++n)
    for (int i = 0; i < 32 * 32; ++i) max_ge_mean = max_ge_mean && enc.plane(n, 0)[i] >= enc.plane(n, 1)[i];
  out.expect(max_ge_mean, "sa_encode max < mean");

  nn::Hfgdu<float> up(width, rng);
  Tensor<float> constant({batch, width, 16, 16}, 0.4f);
  Tensor<float> fine({batch, width, 32, 32});
  for (auto& v : fine.values()) v = g(data);
  const auto flat = up.trace(Var<float>(constant), Var<float>(fine));
  // exact in real arithmetic; float summation of the 9 taps leaves rounding only
  float residual = 0.0f;
  for (float v : flat.hf.value().values()) residual = std::max(residual, std::abs(v));
  out.expect(residual <= 1e-6f, "hp_kernel(constant) = " + std::to_string(residual));

  Tensor<float> coarse({batch, width, 16, 16});
  for (auto& v : coarse.values()) v = g(data);
  const auto ht = up.trace(Var<float>(coarse), Var<float>(fine));
  out.expect(inside_unit(ht.comp.value()), "F_comp outside (0,1)");
  out.expect(inside_unit(ht.gate.value()), "M outside (0,1)");
  bool ratio_ok = true;
  for (std::size_t i = 0; i < ht.up.value().numel(); ++i) {
    const float base = ht.up.value()[i];
    if (base == 0.0f) continue;
    const float ratio = ht.hfdc.value()[i] / base;
    ratio_ok = ratio_ok && ratio > 1.0f && ratio < 2.0f;
  }
  out.expect(ratio_ok, "F_HFDC / F_up outside (1,2)");
  out.detail << (out.pass ? "" : "; ") << batch << "x3x256x256 default model, width " << width << " modules, |hp(constant)| <= "
             << residual;
}

std::vector<data::AnnotatedPatch> overfit_set() {
  data::SynthConfig cfg;  // 64x64, 5-30 blobs
  cfg.seed = 7;
  return data::synth_dataset(cfg, 32);
}

void overfit_sanity(Outcome& out, const fs::path& work) {
  const auto t0 = Clock::now();
  const auto set = overfit_set();
  app::RunConfig cfg;
  cfg.model.base_channels = 16;
  cfg.model.hourglass_levels = 3;
  cfg.lr = 1e-3;
  cfg.weight_decay = 0.0;
  cfg.augment = false;
  cfg.epochs = 40;
  cfg.seed = 2024;
  cfg.validate_on_train = true;
  cfg.output_dir = fresh(work / "overfit").string();
  const auto result = app::train(cfg, set, {}, [&](const app::EpochRecord& r) {
    std::cerr << "  overfit epoch " << r.epoch << " loss " << r.loss << " f1 " << r.val.f1 << "\n";
  });
  auto model = app::load_checkpoint(result.best_checkpoint);
  app::Predictor predictor(*model.net, model.norm);
  const auto ev = app::evaluate(predictor, set, 1.0);
  const double elapsed = seconds_since(t0);
  out.expect(ev.metrics.f1 >= 0.90, "training-set F1 " + std::to_string(ev.metrics.f1));
  out.expect(elapsed <= 7200.0, "runtime " + std::to_string(elapsed) + " s");
  out.detail << (out.pass ? "" : "; ") << "F1 " << ev.metrics.f1 << " (P " << ev.metrics.precision << ", R "
             << ev.metrics.recall << ") after " << cfg.epochs << " epochs, best epoch " << result.best_epoch << ", "
             << elapsed << " s";
}

void ablation_harness(Outcome& out, const fs::path& work) {
  data::SynthConfig sc;
  sc.height = sc.width = 32;
  sc.min_points = 3;
  sc.max_points = 10;
  sc.seed = 110;
  const auto data_dir = fresh(work / "ablation_data");
  data::save_dataset(data_dir, data::synth_dataset(sc, 10));
  app::RunConfig cfg;
  cfg.train_dir = data_dir.string();
  cfg.model.base_channels = 4;
  cfg.model.hourglass_levels = 2;
  cfg.batch_size = 4;
  cfg.epochs = 1;
  cfg.seed = 111;
  const auto root = fresh(work / "ablation");
  cfg.output_dir = root.string();
  app::cmd_ablate(cfg);

  for (const char* f : {"ablation.json", "ablation.csv", "ablation.md"}) out.expect(fs::exists(root / f), f);
  const auto report = app::ablation_report_from_json(read_json_file(root / "ablation.json"));
  out.expect(report.rows.size() == 4, "expected four rows");
  const double reference[] = {64.42, 65.32, 65.52, 66.12};
  for (std::size_t i = 0; i < report.rows.size() && i < 4; ++i) {
    const auto& row = report.rows[i];
    out.expect(row.variant.reference_f1 == reference[i], "reference F1 for " + row.variant.name);
    const auto counts = app::recompute_counts(root / row.eval_dir / "per_image.json");
    const auto m = eval::metrics(counts);
    out.expect(counts == row.counts, "counts not recomputable for " + row.variant.name);
    out.expect(m.f1 == row.metrics.f1 && m.precision == row.metrics.precision && m.recall == row.metrics.recall,
               "metrics not recomputable for " + row.variant.name);
  }
  // every numeric cell of the CSV against the recomputed value
  std::istringstream csv(slurp(root / "ablation.csv"));
  std::string line;
  std::getline(csv, line);
  std::size_t index = 0;
  while (std::getline(csv, line) && index < report.rows.size()) {
    std::vector<std::string> cells;
    std::stringstream fields(line);
    for (std::string cell; std::getline(fields, cell, ',');) cells.push_back(cell);
    const auto& row = report.rows[index++];
    const auto counts = app::recompute_counts(root / row.eval_dir / "per_image.json");
    const auto m = eval::metrics(counts);
    const bool ok = cells.size() == 12 && cells[0] == row.variant.name && std::stod(cells[3]) == m.f1 * 100.0 &&
                    std::stod(cells[4]) == m.recall * 100.0 && std::stod(cells[5]) == m.precision * 100.0 &&
                    std::stoll(cells[6]) == counts.tp && std::stoll(cells[7]) == counts.fp &&
                    std::stoll(cells[8]) == counts.fn && std::stod(cells[9]) == reference[index - 1];
    out.expect(ok, "CSV row " + row.variant.name + " disagrees with per-image reports");
  }
  out.expect(index == 4, "CSV has " + std::to_string(index) + " rows");
  out.detail << (out.pass ? "" : "; ") << "4 variants, every cell recomputed from per-image reports";
}

void density_bucketing(Outcome& out, const fs::path& work) {
  const auto& b = eval::density_buckets();
  out.expect(b[eval::bucket_index(3)].label == "extremely sparse", "3");
  out.expect(b[eval::bucket_index(46)].label == "relatively high", "46");
  out.expect(b[eval::bucket_index(801)].label == "extremely dense", "801");

  app::DatasetEvaluation ev;
  for (int refs : {3, 12, 30, 46, 150, 801}) {
    eval::MatchReport r;
    r.counts = {refs - refs / 4, refs / 5, refs / 4};
    ev.ids.push_back("img" + std::to_string(refs));
    ev.detections.push_back(decode::DetectionSet{8, 8, {}});
    ev.reports.push_back(r);
    ev.ref_counts.push_back(refs);
    ev.counts += r.counts;
  }
  ev.metrics = eval::metrics(ev.counts);
  const auto dir = fresh(work / "density");
  app::write_evaluation(dir, ev, {});
  const auto svg = dir / "density.svg";
  out.expect(fs::exists(svg) && fs::file_size(svg) > 0, "plot missing or empty");
  out.expect(slurp(svg).find("<svg") != std::string::npos, "plot is not SVG");
  out.detail << (out.pass ? "" : "; ") << "edges 3/46/801, plot " << (fs::exists(svg) ? fs::file_size(svg) : 0)
             << " bytes";
}

void determinism(Outcome& out, const fs::path& work) {
  data::SynthConfig sc;
  sc.height = sc.width = 32;
  sc.min_points = 3;
  sc.max_points = 10;
  sc.seed = 112;
  const auto set = data::synth_dataset(sc, 10);
  const auto split = data::split_dataset(set, 113);
  auto run = [&](const std::string& name) {
    app::RunConfig cfg;
    cfg.model.base_channels = 4;
    cfg.model.hourglass_levels = 2;
    cfg.batch_size = 4;
    cfg.epochs = 2;
    cfg.seed = 114;
    cfg.output_dir = fresh(work / name).string();
    app::train(cfg, split.first, split.second);
    return fs::path(cfg.output_dir);
  };
  const auto a = run("determinism_a");
  const auto b = run("determinism_b");
  out.expect(slurp(a / "train_log.json") == slurp(b / "train_log.json"), "loss log differs");

  auto m1 = app::load_checkpoint(a / "last");
  app::Predictor p1(*m1.net, m1.norm);
  const auto e1 = app::evaluate(p1, split.second, 1.0);
  const auto ckpt = work / "determinism_copy" / "model";
  fs::create_directories(ckpt.parent_path());
  app::save_checkpoint(ckpt, *m1.net, read_json_file(a / "last.json"));
  auto m2 = app::load_checkpoint(ckpt);
  app::Predictor p2(*m2.net, m2.norm);
  const auto e2 = app::evaluate(p2, split.second, 1.0);
  out.expect(e1.counts == e2.counts && e1.metrics.f1 == e2.metrics.f1 && e1.detections == e2.detections,
             "reloaded evaluation differs");
  out.expect(slurp(a / "last.bin") == slurp(ckpt.string() + ".bin"), "checkpoint bytes differ");

  std::mt19937_64 rng(115);
  const auto map = targets::fidt_map(testing::random_points(rng, 37, 53, 12)).values;
  const auto path = work / "roundtrip.fidt";
  targets::write_fidt_file(path, map);
  const auto bytes = slurp(path);
  const auto back = targets::read_fidt_file(path);
  targets::write_fidt_file(work / "roundtrip2.fidt", back);
  out.expect(back == map, "FIDT values differ after reading");
  out.expect(slurp(work / "roundtrip2.fidt") == bytes, "FIDT bytes differ after rewrite");
  out.detail << (out.pass ? "" : "; ") << "2-epoch log, checkpoint reload, FIDT bytes";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"crowdloc acceptance criteria"};
  std::string work_dir = (fs::temp_directory_path() / "crowdloc_acceptance").string();
  std::vector<int> only;
  int batch = 1;
  cli.add_option("--work-dir", work_dir, "scratch directory");
  cli.add_option("--only", only, "criteria to run (default: all)");
  cli.add_option("--batch", batch, "batch size for the structural check")->check(CLI::PositiveNumber);
  CLI11_PARSE(cli, argc, argv);
  const fs::path work = fresh(work_dir);

  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"FIDT oracle equivalence", fidt_oracle_equivalence},
      {"FIDT analytic spot checks", fidt_spot_checks},
      {"LMDS equivalence", lmds_equivalence},
      {"matching and metrics", matching_metrics},
      {"gradient verification", gradient_verification},
      {"structural invariants", [&](Outcome& o) { structural_invariants(o, batch); }},
      {"overfit sanity", [&](Outcome& o) { overfit_sanity(o, work); }},
      {"ablation harness", [&](Outcome& o) { ablation_harness(o, work); }},
      {"density bucketing", [&](Outcome& o) { density_bucketing(o, work); }},
      {"determinism and round trips", [&](Outcome& o) { determinism(o, work); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = int(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), number) == only.end()) continue;
    Outcome outcome;
    try {
      criteria[i].second(outcome);
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail << "exception: " << e.what();
    }
    if (!outcome.pass) ++failed;
    std::cout << (outcome.pass ? "PASS" : "FAIL") << "  " << number << ". " << criteria[i].first << ": "
              << outcome.detail.str() << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
