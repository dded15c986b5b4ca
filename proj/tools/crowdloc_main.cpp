#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crowdloc/app/ablation.hpp"
#include "crowdloc/app/commands.hpp"
#include "crowdloc/eval/report_io.hpp"

using namespace crowdloc;

namespace {

void print_json(const Json& value) { std::cout << value.dump(2) << std::endl; }

int report_error(std::string_view kind, const std::string& message) {
  std::cerr << Json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << std::endl;
  return 1;
}

struct TrainArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::vector<std::string> ablations;
  std::string data_dir;
  std::string val_dir;
  std::string output_dir;
  bool resume = false;
  bool print_config = false;
};

void add_train_options(CLI::App* cmd, TrainArgs& args) {
  cmd->add_option("-c,--config", args.config_path, "Run config file ([section] key = value)");
  cmd->add_option("--set", args.overrides, "Override, e.g. --set optim.lr=0.001 (repeatable)");
  cmd->add_option("--data", args.data_dir, "Training dataset directory (data.train_dir)");
  cmd->add_option("--val", args.val_dir, "Validation dataset directory (data.val_dir)");
  cmd->add_option("-o,--out", args.output_dir, "Output directory (run.output_dir)");
}

app::RunConfig build_config(const TrainArgs& args) {
  app::RunConfig config = args.config_path.empty() ? app::RunConfig{} : app::load_run_config(args.config_path);
  if (!args.data_dir.empty()) config.train_dir = args.data_dir;
  if (!args.val_dir.empty()) config.val_dir = args.val_dir;
  if (!args.output_dir.empty()) config.output_dir = args.output_dir;
  for (const auto& o : args.overrides) app::apply_override(config, o);
  for (const auto& a : args.ablations) app::apply_ablation(config, a);
  if (args.resume) config.resume = true;
  config.validate();
  return config;
}

Json summary(const eval::Counts& counts) {
  return {{"counts", eval::to_json(counts)}, {"metrics", eval::to_json(eval::metrics(counts))}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Point-based small-object localization: FIDT targets, training, decoding and evaluation"};
  cli.require_subcommand(1);

  std::string fidt_in, fidt_out;
  targets::FidtParams fidt_params;
  auto* fidt = cli.add_subcommand("fidt", "Write one FIDT map file per annotated patch");
  fidt->add_option("annotations", fidt_in, "Directory of <id>.png + <id>.json patches")->required();
  fidt->add_option("out", fidt_out, "Output directory")->required();
  fidt->add_option("--alpha", fidt_params.alpha, "Exponent slope")->capture_default_str();
  fidt->add_option("--beta", fidt_params.beta, "Exponent offset")->capture_default_str();
  fidt->add_option("--c", fidt_params.c, "Denominator constant")->capture_default_str();

  std::string synth_out, synth_prefix = "synth", synth_background = "flat";
  int synth_count = 32;
  data::SynthConfig synth_cfg;
  auto* synth = cli.add_subcommand("synth", "Generate a synthetic blob dataset");
  synth->add_option("out", synth_out, "Output directory")->required();
  synth->add_option("-n,--count", synth_count, "Number of patches")->capture_default_str();
  synth->add_option("--height", synth_cfg.height)->capture_default_str();
  synth->add_option("--width", synth_cfg.width)->capture_default_str();
  synth->add_option("--min-points", synth_cfg.min_points)->capture_default_str();
  synth->add_option("--max-points", synth_cfg.max_points)->capture_default_str();
  synth->add_option("--min-contrast", synth_cfg.min_contrast)->capture_default_str();
  synth->add_option("--max-contrast", synth_cfg.max_contrast)->capture_default_str();
  synth->add_option("--background", synth_background, "flat|gradient|clutter")->capture_default_str();
  synth->add_option("--clutter-density", synth_cfg.clutter_density, "Confusers per pixel")->capture_default_str();
  synth->add_option("--noise", synth_cfg.noise_sigma, "Gaussian noise sigma")->capture_default_str();
  synth->add_option("--min-spacing", synth_cfg.min_spacing)->capture_default_str();
  synth->add_option("--seed", synth_cfg.seed)->capture_default_str();
  synth->add_option("--prefix", synth_prefix, "Patch id prefix")->capture_default_str();

  TrainArgs train_args;
  auto* train = cli.add_subcommand("train", "Train a model; writes checkpoints and a per-epoch log");
  add_train_options(train, train_args);
  train->add_option("--ablate", train_args.ablations, "Ablation switch: dcpan=on|off, hfgdu=on|off|bilinear|nearest");
  train->add_flag("--resume", train_args.resume, "Continue from <out>/last");
  train->add_flag("--print-config", train_args.print_config, "Print the resolved config and exit");

  std::string eval_ckpt, eval_data, eval_out = "eval";
  double eval_gamma = 1.0;
  auto* evaluate = cli.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  evaluate->add_option("--checkpoint", eval_ckpt, "Checkpoint stem or .bin/.json path")->required();
  evaluate->add_option("--data", eval_data, "Dataset directory")->required();
  evaluate->add_option("-o,--out", eval_out, "Report directory")->capture_default_str();
  evaluate->add_option("--gamma", eval_gamma, "Matching threshold in pixels")->capture_default_str();

  std::string infer_ckpt, infer_image, infer_out = "detections.json", infer_overlay;
  app::InferOptions infer_opts;
  auto* infer = cli.add_subcommand("infer", "Detect points in one image");
  infer->add_option("--checkpoint", infer_ckpt, "Checkpoint stem or .bin/.json path")->required();
  infer->add_option("--image", infer_image, "PNG image")->required();
  infer->add_option("-o,--out", infer_out, "Detection JSON path")->capture_default_str();
  infer->add_option("--overlay", infer_overlay, "Optional PNG with detections marked");
  infer->add_option("--tile", infer_opts.tile)->capture_default_str();
  infer->add_option("--overlap", infer_opts.overlap)->capture_default_str();

  TrainArgs ablate_args;
  auto* ablate = cli.add_subcommand("ablate", "Train and evaluate baseline, +DCPAN, +HFGDU and full models");
  add_train_options(ablate, ablate_args);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return cli.exit(e);
  }

  try {
    if (*fidt) {
      const auto ids = app::cmd_fidt(fidt_in, app::resolve_output(fidt_out), fidt_params);
      print_json({{"written", ids.size()}, {"out", app::resolve_output(fidt_out).string()}});
    } else if (*synth) {
      synth_cfg.background = data::parse_background(synth_background);
      const auto ids = app::cmd_synth(synth_cfg, synth_count, app::resolve_output(synth_out), synth_prefix);
      print_json({{"written", ids.size()}, {"out", app::resolve_output(synth_out).string()}});
    } else if (*train) {
      const auto config = build_config(train_args);
      if (train_args.print_config) {
        std::cout << app::to_text(config);
        return 0;
      }
      const auto result = app::cmd_train(config, [](const app::EpochRecord& r) {
        std::fprintf(stderr, "epoch %d loss %.6f val P %.4f R %.4f F1 %.4f\n", r.epoch, r.loss, r.val.precision,
                     r.val.recall, r.val.f1);
      });
      print_json({{"output_dir", result.output_dir.string()},
                  {"epochs", result.history.size()},
                  {"best_epoch", result.best_epoch},
                  {"best_f1", result.best_f1},
                  {"best_checkpoint", result.best_checkpoint.string()}});
    } else if (*evaluate) {
      const auto out = app::resolve_output(eval_out);
      const auto ev = app::cmd_eval(eval_ckpt, eval_data, out, eval_gamma);
      Json s = summary(ev.counts);
      s["images"] = ev.ids.size();
      s["out"] = out.string();
      print_json(s);
    } else if (*infer) {
      if (!infer_overlay.empty()) infer_opts.overlay = app::resolve_output(infer_overlay);
      const auto out = app::resolve_output(infer_out);
      const auto det = app::cmd_infer(infer_ckpt, infer_image, out, infer_opts);
      print_json({{"detections", det.detections.size()}, {"out", out.string()}});
    } else if (*ablate) {
      const auto report = app::cmd_ablate(build_config(ablate_args));
      std::cout << app::to_markdown(report);
    }
  } catch (const Error& e) {
    return report_error(to_string(e.kind()), e.what());
  } catch (const std::exception& e) {
    return report_error("internal", e.what());
  }
  return 0;
}
