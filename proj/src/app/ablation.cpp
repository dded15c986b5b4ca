#include "crowdloc/app/ablation.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "crowdloc/app/commands.hpp"
#include "crowdloc/eval/report_io.hpp"

namespace crowdloc::app {

namespace fs = std::filesystem;

const std::vector<AblationVariant>& ablation_variants() {
  static const std::vector<AblationVariant> variants = {
      {"baseline", false, nn::Upsampler::bilinear, 64.42, 60.77, 68.54},
      {"dcpan", true, nn::Upsampler::bilinear, 65.32, 59.16, 72.90},
      {"hfgdu", false, nn::Upsampler::hfgdu, 65.52, 61.10, 70.63},
      {"full", true, nn::Upsampler::hfgdu, 66.12, 60.27, 73.23},
  };
  return variants;
}

AblationReport cmd_ablate(const RunConfig& config) {
  config.validate();
  const auto split = load_training_data(config);
  const auto& validation = config.validate_on_train ? split.train : split.val;
  check(!validation.empty(), ErrorKind::config, "ablation needs a validation set");
  const fs::path root = resolve_output(config.output_dir);
  fs::create_directories(root);

  AblationReport report;
  report.gamma = config.gamma;
  for (const auto& variant : ablation_variants()) {
    RunConfig rc = config;
    rc.model.dcpan = variant.dcpan;
    rc.model.upsampler = variant.upsampler;
    rc.output_dir = (root / variant.name).string();
    const auto trained = train(rc, split.train, split.val);

    auto model = load_checkpoint(trained.best_checkpoint);
    Predictor predictor(*model.net, model.norm);
    const auto ev = evaluate(predictor, validation, config.gamma);
    const std::string eval_dir = variant.name + "/eval";
    write_evaluation(root / eval_dir, ev, {{"checkpoint", trained.best_checkpoint.string()}, {"variant", variant.name}});
    report.rows.push_back({variant, ev.counts, ev.metrics, trained.best_epoch, eval_dir});
  }
  write_json_file(root / "ablation.json", to_json(report));
  write_text_file(root / "ablation.csv", to_csv(report));
  write_text_file(root / "ablation.md", to_markdown(report));
  return report;
}

Json to_json(const AblationReport& report) {
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"name", r.variant.name},
                    {"dcpan", r.variant.dcpan},
                    {"upsampler", nn::to_string(r.variant.upsampler)},
                    {"counts", eval::to_json(r.counts)},
                    {"metrics", eval::to_json(r.metrics)},
                    {"best_epoch", r.best_epoch},
                    {"eval_dir", r.eval_dir},
                    {"reference", {{"f1", r.variant.reference_f1},
                                   {"recall", r.variant.reference_recall},
                                   {"precision", r.variant.reference_precision}}}});
  }
  return Json{{"gamma", report.gamma}, {"rows", rows}};
}

AblationReport ablation_report_from_json(const Json& value) {
  AblationReport report;
  try {
    report.gamma = value.at("gamma").get<double>();
    for (const auto& r : value.at("rows")) {
      AblationRow row;
      row.variant.name = r.at("name").get<std::string>();
      row.variant.dcpan = r.at("dcpan").get<bool>();
      row.variant.upsampler = nn::parse_upsampler(r.at("upsampler").get<std::string>());
      row.variant.reference_f1 = r.at("reference").at("f1").get<double>();
      row.variant.reference_recall = r.at("reference").at("recall").get<double>();
      row.variant.reference_precision = r.at("reference").at("precision").get<double>();
      row.counts = eval::counts_from_json(r.at("counts"));
      row.metrics = eval::metrics(row.counts);
      row.best_epoch = r.at("best_epoch").get<int>();
      row.eval_dir = r.at("eval_dir").get<std::string>();
      report.rows.push_back(std::move(row));
    }
  } catch (const Json::exception& e) {
    fail(ErrorKind::load, std::string("malformed ablation report: ") + e.what());
  }
  return report;
}

namespace {

// shortest text that reads back to the same double
std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string to_csv(const AblationReport& report) {
  std::ostringstream out;
  out << "method,dcpan,hfgdu,f1,recall,precision,tp,fp,fn,reference_f1,reference_recall,reference_precision\n";
  for (const auto& r : report.rows) {
    out << r.variant.name << ',' << (r.variant.dcpan ? 1 : 0) << ','
        << (r.variant.upsampler == nn::Upsampler::hfgdu ? 1 : 0) << ',' << shortest(r.metrics.f1 * 100.0) << ','
        << shortest(r.metrics.recall * 100.0) << ',' << shortest(r.metrics.precision * 100.0) << ','
        << r.counts.tp << ',' << r.counts.fp << ',' << r.counts.fn << ',' << shortest(r.variant.reference_f1) << ','
        << shortest(r.variant.reference_recall) << ',' << shortest(r.variant.reference_precision) << "\n";
  }
  return out.str();
}

std::string to_markdown(const AblationReport& report) {
  std::ostringstream out;
  out << "| Method | DCPAN | HFGDU | F1-score (%) | Recall (%) | Precision (%) | Reference F1 (%) |\n"
      << "|---|---|---|---|---|---|---|\n";
  char buf[256];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "| %s | %s | %s | %.2f | %.2f | %.2f | %.2f |\n", r.variant.name.c_str(),
                  r.variant.dcpan ? "yes" : "no", r.variant.upsampler == nn::Upsampler::hfgdu ? "yes" : "no",
                  r.metrics.f1 * 100.0, r.metrics.recall * 100.0, r.metrics.precision * 100.0, r.variant.reference_f1);
    out << buf;
  }
  return out.str();
}

}  // namespace crowdloc::app
