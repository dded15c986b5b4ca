#include "crowdloc/app/run_config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace crowdloc::app {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

// Drops a trailing comment that is not inside quotes.
std::string strip_comment(const std::string& line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quote) {
      if (ch == quote) quote = 0;
    } else if (ch == '"' || ch == '\'') {
      quote = ch;
    } else if (ch == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  fail(ErrorKind::config, key + ": expected a boolean, got '" + v + "'");
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::config, key + ": expected a number, got '" + v + "'");
}

long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used == v.size()) return i;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::config, key + ": expected an integer, got '" + v + "'");
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"data.train_dir", [](RunConfig& c, auto&, auto& v) { c.train_dir = v; }},
      {"data.val_dir", [](RunConfig& c, auto&, auto& v) { c.val_dir = v; }},
      {"data.train_fraction", [](RunConfig& c, auto& k, auto& v) { c.train_fraction = parse_double(k, v); }},
      {"model.base_channels", [](RunConfig& c, auto& k, auto& v) { c.model.base_channels = int(parse_int(k, v)); }},
      {"model.hourglass_levels",
       [](RunConfig& c, auto& k, auto& v) { c.model.hourglass_levels = int(parse_int(k, v)); }},
      {"model.stages", [](RunConfig& c, auto& k, auto& v) { c.model.stages = int(parse_int(k, v)); }},
      {"model.input_channels", [](RunConfig& c, auto& k, auto& v) { c.model.input_channels = int(parse_int(k, v)); }},
      {"model.dcpan", [](RunConfig& c, auto& k, auto& v) { c.model.dcpan = parse_bool(k, v); }},
      {"model.upsampler", [](RunConfig& c, auto&, auto& v) { c.model.upsampler = nn::parse_upsampler(v); }},
      {"optim.lr", [](RunConfig& c, auto& k, auto& v) { c.lr = parse_double(k, v); }},
      {"optim.weight_decay", [](RunConfig& c, auto& k, auto& v) { c.weight_decay = parse_double(k, v); }},
      {"optim.batch_size", [](RunConfig& c, auto& k, auto& v) { c.batch_size = int(parse_int(k, v)); }},
      {"optim.epochs", [](RunConfig& c, auto& k, auto& v) { c.epochs = int(parse_int(k, v)); }},
      {"augment.enabled", [](RunConfig& c, auto& k, auto& v) { c.augment = parse_bool(k, v); }},
      {"augment.hflip", [](RunConfig& c, auto& k, auto& v) { c.augmentation.hflip = parse_bool(k, v); }},
      {"augment.vflip", [](RunConfig& c, auto& k, auto& v) { c.augmentation.vflip = parse_bool(k, v); }},
      {"augment.cutmix", [](RunConfig& c, auto& k, auto& v) { c.augmentation.cutmix = parse_bool(k, v); }},
      {"augment.flip_probability",
       [](RunConfig& c, auto& k, auto& v) { c.augmentation.flip_probability = parse_double(k, v); }},
      {"augment.cutmix_probability",
       [](RunConfig& c, auto& k, auto& v) { c.augmentation.cutmix_probability = parse_double(k, v); }},
      {"augment.cutmix_min_area",
       [](RunConfig& c, auto& k, auto& v) { c.augmentation.cutmix_min_area = parse_double(k, v); }},
      {"augment.cutmix_max_area",
       [](RunConfig& c, auto& k, auto& v) { c.augmentation.cutmix_max_area = parse_double(k, v); }},
      {"run.seed", [](RunConfig& c, auto& k, auto& v) { c.seed = std::uint64_t(parse_int(k, v)); }},
      {"run.output_dir", [](RunConfig& c, auto&, auto& v) { c.output_dir = v; }},
      {"run.validate_on_train", [](RunConfig& c, auto& k, auto& v) { c.validate_on_train = parse_bool(k, v); }},
      {"run.gamma", [](RunConfig& c, auto& k, auto& v) { c.gamma = parse_double(k, v); }},
      {"run.resume", [](RunConfig& c, auto& k, auto& v) { c.resume = parse_bool(k, v); }},
  };
  return table;
}

void set_value(RunConfig& config, std::string key, const std::string& raw) {
  const auto& table = setters();
  if (key.find('.') == std::string::npos) {
    std::string match;
    for (const auto& [full, _] : table) {
      if (full.substr(full.find('.') + 1) == key) {
        check(match.empty(), ErrorKind::config, "ambiguous key '" + key + "'; use section.key");
        match = full;
      }
    }
    check(!match.empty(), ErrorKind::config, "unknown config key '" + key + "'");
    key = match;
  }
  const auto it = table.find(key);
  check(it != table.end(), ErrorKind::config, "unknown config key '" + key + "'");
  it->second(config, key, unquote(trim(raw)));
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

std::string bool_text(bool b) { return b ? "true" : "false"; }

// shortest form that parses back to v
std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

nn::AdamOptions RunConfig::adam() const {
  nn::AdamOptions o;
  o.lr = lr;
  o.weight_decay = weight_decay;
  return o;
}

void RunConfig::validate() const {
  model.validate();
  check(train_fraction > 0.0 && train_fraction < 1.0, ErrorKind::config, "data.train_fraction must lie in (0, 1)");
  check(lr >= 0.0, ErrorKind::config, "optim.lr must be >= 0");
  check(weight_decay >= 0.0, ErrorKind::config, "optim.weight_decay must be >= 0");
  check(batch_size >= 1, ErrorKind::config, "optim.batch_size must be >= 1");
  check(epochs >= 0, ErrorKind::config, "optim.epochs must be >= 0");
  check(gamma > 0.0, ErrorKind::config, "run.gamma must be > 0");
  check(augmentation.cutmix_min_area > 0.0 && augmentation.cutmix_max_area <= 1.0 &&
            augmentation.cutmix_min_area <= augmentation.cutmix_max_area,
        ErrorKind::config, "augment cutmix area range must satisfy 0 < min <= max <= 1");
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      check(line.back() == ']', ErrorKind::config, "line " + std::to_string(number) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    check(eq != std::string::npos, ErrorKind::config, "line " + std::to_string(number) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    set_value(config, section.empty() ? key : section + "." + key, line.substr(eq + 1));
  }
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  check(in.good(), ErrorKind::io, "cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string to_text(const RunConfig& c) {
  std::ostringstream out;
  out << "[data]\n"
      << "train_dir = " << quoted(c.train_dir) << "\n"
      << "val_dir = " << quoted(c.val_dir) << "\n"
      << "train_fraction = " << num(c.train_fraction) << "\n\n"
      << "[model]\n"
      << "base_channels = " << c.model.base_channels << "\n"
      << "hourglass_levels = " << c.model.hourglass_levels << "\n"
      << "stages = " << c.model.stages << "\n"
      << "input_channels = " << c.model.input_channels << "\n"
      << "dcpan = " << bool_text(c.model.dcpan) << "\n"
      << "upsampler = " << quoted(nn::to_string(c.model.upsampler)) << "\n\n"
      << "[optim]\n"
      << "lr = " << num(c.lr) << "\n"
      << "weight_decay = " << num(c.weight_decay) << "\n"
      << "batch_size = " << c.batch_size << "\n"
      << "epochs = " << c.epochs << "\n\n"
      << "[augment]\n"
      << "enabled = " << bool_text(c.augment) << "\n"
      << "hflip = " << bool_text(c.augmentation.hflip) << "\n"
      << "vflip = " << bool_text(c.augmentation.vflip) << "\n"
      << "cutmix = " << bool_text(c.augmentation.cutmix) << "\n"
      << "flip_probability = " << num(c.augmentation.flip_probability) << "\n"
      << "cutmix_probability = " << num(c.augmentation.cutmix_probability) << "\n"
      << "cutmix_min_area = " << num(c.augmentation.cutmix_min_area) << "\n"
      << "cutmix_max_area = " << num(c.augmentation.cutmix_max_area) << "\n\n"
      << "[run]\n"
      << "seed = " << c.seed << "\n"
      << "output_dir = " << quoted(c.output_dir) << "\n"
      << "validate_on_train = " << bool_text(c.validate_on_train) << "\n"
      << "gamma = " << num(c.gamma) << "\n"
      << "resume = " << bool_text(c.resume) << "\n";
  return out.str();
}

void apply_override(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  check(eq != std::string::npos, ErrorKind::config, "override '" + assignment + "' must look like key=value");
  set_value(config, trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

void apply_ablation(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  check(eq != std::string::npos, ErrorKind::config, "ablation '" + assignment + "' must look like dcpan=off");
  const std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  if (key == "dcpan") {
    config.model.dcpan = parse_bool("dcpan", value);
  } else if (key == "hfgdu" || key == "upsampler") {
    config.model.upsampler = nn::parse_upsampler(value);
  } else {
    fail(ErrorKind::config, "unknown ablation switch '" + key + "' (expected dcpan or hfgdu)");
  }
}

Json to_json(const nn::ModelConfig& m) {
  return Json{{"base_channels", m.base_channels}, {"hourglass_levels", m.hourglass_levels},
              {"stages", m.stages},               {"input_channels", m.input_channels},
              {"dcpan", m.dcpan},                 {"upsampler", nn::to_string(m.upsampler)}};
}

nn::ModelConfig model_config_from_json(const Json& v) {
  nn::ModelConfig m;
  try {
    m.base_channels = v.at("base_channels").get<int>();
    m.hourglass_levels = v.at("hourglass_levels").get<int>();
    m.stages = v.at("stages").get<int>();
    m.input_channels = v.at("input_channels").get<int>();
    m.dcpan = v.at("dcpan").get<bool>();
    m.upsampler = nn::parse_upsampler(v.at("upsampler").get<std::string>());
  } catch (const Json::exception& e) {
    fail(ErrorKind::load, std::string("malformed model config: ") + e.what());
  }
  m.validate();
  return m;
}

Json to_json(const RunConfig& c) {
  const auto& a = c.augmentation;
  return Json{
      {"data", {{"train_dir", c.train_dir}, {"val_dir", c.val_dir}, {"train_fraction", c.train_fraction}}},
      {"model", to_json(c.model)},
      {"optim", {{"lr", c.lr}, {"weight_decay", c.weight_decay}, {"batch_size", c.batch_size}, {"epochs", c.epochs}}},
      {"augment",
       {{"enabled", c.augment},
        {"hflip", a.hflip},
        {"vflip", a.vflip},
        {"cutmix", a.cutmix},
        {"flip_probability", a.flip_probability},
        {"cutmix_probability", a.cutmix_probability},
        {"cutmix_min_area", a.cutmix_min_area},
        {"cutmix_max_area", a.cutmix_max_area}}},
      {"run",
       {{"seed", c.seed},
        {"output_dir", c.output_dir},
        {"validate_on_train", c.validate_on_train},
        {"gamma", c.gamma},
        {"resume", c.resume}}},
  };
}

RunConfig run_config_from_json(const Json& v) {
  RunConfig c;
  try {
    const auto& d = v.at("data");
    c.train_dir = d.at("train_dir").get<std::string>();
    c.val_dir = d.at("val_dir").get<std::string>();
    c.train_fraction = d.at("train_fraction").get<double>();
    c.model = model_config_from_json(v.at("model"));
    const auto& o = v.at("optim");
    c.lr = o.at("lr").get<double>();
    c.weight_decay = o.at("weight_decay").get<double>();
    c.batch_size = o.at("batch_size").get<int>();
    c.epochs = o.at("epochs").get<int>();
    const auto& a = v.at("augment");
    c.augment = a.at("enabled").get<bool>();
    c.augmentation.hflip = a.at("hflip").get<bool>();
    c.augmentation.vflip = a.at("vflip").get<bool>();
    c.augmentation.cutmix = a.at("cutmix").get<bool>();
    c.augmentation.flip_probability = a.at("flip_probability").get<double>();
    c.augmentation.cutmix_probability = a.at("cutmix_probability").get<double>();
    c.augmentation.cutmix_min_area = a.at("cutmix_min_area").get<double>();
    c.augmentation.cutmix_max_area = a.at("cutmix_max_area").get<double>();
    const auto& r = v.at("run");
    c.seed = r.at("seed").get<std::uint64_t>();
    c.output_dir = r.at("output_dir").get<std::string>();
    c.validate_on_train = r.at("validate_on_train").get<bool>();
    c.gamma = r.at("gamma").get<double>();
    c.resume = r.at("resume").get<bool>();
  } catch (const Json::exception& e) {
    fail(ErrorKind::load, std::string("malformed run config: ") + e.what());
  }
  return c;
}

std::filesystem::path resolve_output(const std::filesystem::path& path) {
  if (path.is_absolute()) return path;
  if (const char* root = std::getenv("CROWDLOC_OUTPUT_ROOT"); root && *root) return std::filesystem::path(root) / path;
  return path;
}

}  // namespace crowdloc::app
