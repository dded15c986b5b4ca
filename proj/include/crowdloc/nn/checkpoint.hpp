#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "crowdloc/nn/adam.hpp"
#include "crowdloc/nn/model.hpp"

namespace crowdloc::nn {

struct ArchiveEntry {
  std::string name;
  Tensor<float> tensor;
};

// Binary tensor archive: "CRWDPAR1", u32 count, then per entry u32 name length,
// name bytes, 4 x u32 shape, f32 payload; little-endian throughout.
void write_archive(const std::filesystem::path& path, const std::vector<ArchiveEntry>& entries);
std::vector<ArchiveEntry> read_archive(const std::filesystem::path& path);

// Parameters are stored as "param:<name>", buffers as "buffer:<name>".
std::vector<ArchiveEntry> model_state(CrowdNet<float>& model);
// Names and shapes must match the model exactly.
void load_model_state(CrowdNet<float>& model, const std::vector<ArchiveEntry>& entries);

std::vector<ArchiveEntry> optimizer_state(Adam<float>& adam, CrowdNet<float>& model);
void load_optimizer_state(Adam<float>& adam, CrowdNet<float>& model, const std::vector<ArchiveEntry>& entries);

}  // namespace crowdloc::nn
