#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crowdloc/data/annotations.hpp"

namespace crowdloc::data {

enum class Background { flat, gradient, clutter };

std::string to_string(Background background);
Background parse_background(const std::string& text);

// Desk-scale stand-in for satellite crowd patches: bright blob_size x blob_size
// targets on a configurable background with additive Gaussian noise.
struct SynthConfig {
  int height = 64;
  int width = 64;
  int min_points = 5;
  int max_points = 30;
  int blob_size = 3;
  double min_contrast = 0.35;
  double max_contrast = 0.6;
  Background background = Background::flat;
  double background_level = 0.3;
  double clutter_density = 0.0;  // point-like confusers per pixel
  double noise_sigma = 0.02;
  double min_spacing = 3.0;      // minimum center distance in pixels
  std::uint64_t seed = 0;
};

// Throws ErrorKind::invalid_argument when the point count cannot be placed.
AnnotatedPatch synth_scene(const SynthConfig& config, const std::string& id = "synth");

// Patch i uses a seed derived from (config.seed, id); ids are "<prefix>_<i>".
std::vector<AnnotatedPatch> synth_dataset(const SynthConfig& config, int count,
                                          const std::string& prefix = "synth");

}  // namespace crowdloc::data
