#include "crowdloc/data/annotations.hpp"

#include <fstream>

#include "crowdloc/common/json_io.hpp"

namespace crowdloc::data {

namespace fs = std::filesystem;

AnnotatedPatch load_annotations(const fs::path& image_path) {
  const std::string id = image_path.stem().string();
  fs::path sidecar = image_path;
  sidecar.replace_extension(".json");
  check(fs::exists(sidecar), ErrorKind::load, "patch '" + id + "': missing sidecar " + sidecar.string());
  check(fs::exists(image_path), ErrorKind::load, "patch '" + id + "': missing image " + image_path.string());

  AnnotatedPatch patch;
  patch.id = id;
  patch.image = read_png(image_path);
  const Json doc = read_json_file(sidecar);
  std::vector<targets::Point> points;
  try {
    for (const auto& p : doc.at("points")) points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  } catch (const Json::exception& e) {
    fail(ErrorKind::load, "patch '" + id + "': malformed sidecar: " + e.what());
  }
  try {
    patch.points = targets::PointSet(patch.image.height(), patch.image.width(), std::move(points));
  } catch (const Error& e) {
    fail(ErrorKind::load, "patch '" + id + "': " + e.what());
  }
  return patch;
}

void save_patch(const fs::path& dir, const AnnotatedPatch& patch) {
  check(!patch.id.empty(), ErrorKind::invalid_argument, "cannot save a patch without an id");
  write_png(dir / (patch.id + ".png"), patch.image);
  Json pts = Json::array();
  for (const auto& p : patch.points.points()) pts.push_back({p.row, p.col});
  write_json_file(dir / (patch.id + ".json"), Json{{"points", pts}});
}

std::vector<std::string> read_manifest(const fs::path& dir) {
  const fs::path path = dir / "manifest.txt";
  std::ifstream in(path);
  check(in.good(), ErrorKind::io, "cannot open manifest " + path.string());
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) ids.push_back(line);
  }
  return ids;
}

void write_manifest(const fs::path& dir, const std::vector<std::string>& ids) {
  std::string text;
  for (const auto& id : ids) text += id + "\n";
  write_text_file(dir / "manifest.txt", text);
}

std::vector<AnnotatedPatch> load_dataset(const fs::path& dir) {
  std::vector<AnnotatedPatch> out;
  for (const auto& id : read_manifest(dir)) out.push_back(load_annotations(dir / (id + ".png")));
  return out;
}

void save_dataset(const fs::path& dir, const std::vector<AnnotatedPatch>& patches) {
  std::vector<std::string> ids;
  for (const auto& p : patches) {
    save_patch(dir, p);
    ids.push_back(p.id);
  }
  write_manifest(dir, ids);
}

}  // namespace crowdloc::data
