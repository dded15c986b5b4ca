#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "crowdloc/data/image.hpp"
#include "crowdloc/targets/point_set.hpp"

namespace crowdloc::data {

struct AnnotatedPatch {
  Image image;
  targets::PointSet points;
  std::string id;
};

// Reads <stem>.png and its sidecar <stem>.json {"points": [[row, col], ...]}.
// Missing sidecars, out-of-bounds points and duplicate pixels raise ErrorKind::load.
AnnotatedPatch load_annotations(const std::filesystem::path& image_path);

// Writes <dir>/<id>.png and <dir>/<id>.json.
void save_patch(const std::filesystem::path& dir, const AnnotatedPatch& patch);

// Dataset manifest: newline-delimited patch ids in <dir>/manifest.txt.
std::vector<std::string> read_manifest(const std::filesystem::path& dir);
void write_manifest(const std::filesystem::path& dir, const std::vector<std::string>& ids);

std::vector<AnnotatedPatch> load_dataset(const std::filesystem::path& dir);
void save_dataset(const std::filesystem::path& dir, const std::vector<AnnotatedPatch>& patches);

}  // namespace crowdloc::data
