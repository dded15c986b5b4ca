#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "crowdloc/nn/dcpan.hpp"
#include "crowdloc/nn/hfgdu.hpp"
#include "crowdloc/nn/layers.hpp"

namespace crowdloc::nn {

enum class Upsampler { hfgdu, bilinear, nearest };

std::string to_string(Upsampler up);
Upsampler parse_upsampler(const std::string& text);

struct ModelConfig {
  int base_channels = 64;
  int hourglass_levels = 4;
  int stages = 2;
  int input_channels = 3;
  bool dcpan = true;
  Upsampler upsampler = Upsampler::hfgdu;

  // Throws ErrorKind::config on invalid values.
  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Throws ErrorKind::config (with the padded size to use) unless H and W are
// multiples of 2^levels.
void check_input_size(const ModelConfig& config, int height, int width);

// One hourglass: recursive encoder/decoder at constant width; each decoder
// level merges the coarse path into the skip path with the configured upsampler.
template <typename T>
class Hourglass {
 public:
  Hourglass() = default;
  Hourglass(int channels, int levels, Upsampler upsampler, Rng& rng);

  Var<T> forward(const Var<T>& x, bool training);
  void collect(ParamCollector<T>& out, const std::string& prefix);

 private:
  struct Level {
    ResidualBlock<T> skip;
    ResidualBlock<T> down;
    ResidualBlock<T> up;
    std::unique_ptr<Hfgdu<T>> fuse;  // null for fixed interpolation
  };

  Var<T> forward_level(std::size_t level, const Var<T>& x, bool training);

  Upsampler upsampler_ = Upsampler::bilinear;
  std::vector<Level> levels_;
  ResidualBlock<T> bottom_;
};

// Residual stem (+ DCPAN) followed by stacked hourglass stages, each emitting a
// sigmoid location map at full input resolution.
template <typename T>
class CrowdNet {
 public:
  CrowdNet(const ModelConfig& config, std::uint64_t seed);

  // One location map per stage, each N x 1 x H x W; the last is decoded downstream.
  std::vector<Var<T>> forward(const Var<T>& image);

  void set_training(bool training) noexcept { training_ = training; }
  bool training() const noexcept { return training_; }
  const ModelConfig& config() const noexcept { return config_; }

  ParamCollector<T> parameters();
  std::vector<std::string> parameter_names();
  std::size_t parameter_count();

 private:
  struct Stage {
    Hourglass<T> hourglass;
    ResidualBlock<T> refine;
    LocationHead<T> head;
    Conv2d<T> remap_features;  // only between stages
    Conv2d<T> remap_map;
  };

  ModelConfig config_;
  bool training_ = true;
  ResidualBlock<T> stem_;
  std::optional<Dcpan<T>> dcpan_;
  std::vector<Stage> stages_;
};

extern template class CrowdNet<float>;
extern template class CrowdNet<double>;

}  // namespace crowdloc::nn
