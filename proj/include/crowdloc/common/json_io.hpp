#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>

#include <json.hpp>

namespace crowdloc {

using Json = nlohmann::json;

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& value);
void write_text_file(const std::filesystem::path& path, std::string_view text);

// Stable 64-bit FNV-1a; std::hash is not guaranteed stable across runs/platforms.
std::uint64_t fnv1a64(std::string_view text, std::uint64_t seed = 0xcbf29ce484222325ULL);

// Mixes a global seed with a string key into an independent stream seed.
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view key);

}  // namespace crowdloc
