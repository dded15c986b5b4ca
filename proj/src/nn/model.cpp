#include "crowdloc/nn/model.hpp"

#include <sstream>

#include "crowdloc/common/error.hpp"
#include "instantiate.hpp"

namespace crowdloc::nn {

std::string to_string(Upsampler up) {
  switch (up) {
    case Upsampler::hfgdu: return "hfgdu";
    case Upsampler::bilinear: return "bilinear";
    case Upsampler::nearest: return "nearest";
  }
  return "unknown";
}

Upsampler parse_upsampler(const std::string& text) {
  if (text == "hfgdu" || text == "on") return Upsampler::hfgdu;
  if (text == "bilinear" || text == "off") return Upsampler::bilinear;
  if (text == "nearest") return Upsampler::nearest;
  fail(ErrorKind::config, "unknown upsampler '" + text + "' (expected hfgdu|on|bilinear|off|nearest)");
}

void ModelConfig::validate() const {
  check(base_channels >= 1, ErrorKind::config, "base_channels must be >= 1");
  check(hourglass_levels >= 1, ErrorKind::config, "hourglass_levels must be >= 1");
  check(stages == 2, ErrorKind::config, "the network uses exactly two stacked stages");
  check(input_channels >= 1, ErrorKind::config, "input_channels must be >= 1");
}

void check_input_size(const ModelConfig& config, int height, int width) {
  const int step = 1 << config.hourglass_levels;
  if (height % step == 0 && width % step == 0 && height > 0 && width > 0) return;
  const int ph = (height + step - 1) / step * step;
  const int pw = (width + step - 1) / step * step;
  std::ostringstream msg;
  msg << "input " << height << "x" << width << " is not divisible by 2^" << config.hourglass_levels
      << " = " << step << "; pad to " << ph << "x" << pw;
  fail(ErrorKind::config, msg.str());
}

template <typename T>
Hourglass<T>::Hourglass(int channels, int levels, Upsampler upsampler, Rng& rng) : upsampler_(upsampler) {
  levels_.resize(std::size_t(levels));
  for (auto& level : levels_) {
    level.skip = ResidualBlock<T>(channels, channels, rng);
    level.down = ResidualBlock<T>(channels, channels, rng);
    level.up = ResidualBlock<T>(channels, channels, rng);
    if (upsampler == Upsampler::hfgdu) level.fuse = std::make_unique<Hfgdu<T>>(channels, rng);
  }
  bottom_ = ResidualBlock<T>(channels, channels, rng);
}

template <typename T>
Var<T> Hourglass<T>::forward_level(std::size_t index, const Var<T>& x, bool training) {
  Level& level = levels_[index];
  const Var<T> skip = level.skip.forward(x, training);
  Var<T> low = level.down.forward(max_pool2x2(x), training);
  low = index + 1 < levels_.size() ? forward_level(index + 1, low, training) : bottom_.forward(low, training);
  low = level.up.forward(low, training);
  switch (upsampler_) {
    case Upsampler::hfgdu: return level.fuse->forward(low, skip);
    case Upsampler::bilinear: return add(upsample_bilinear2x(low), skip);
    case Upsampler::nearest: return add(upsample_nearest2x(low), skip);
  }
  return skip;
}

template <typename T>
Var<T> Hourglass<T>::forward(const Var<T>& x, bool training) {
  return forward_level(0, x, training);
}

template <typename T>
void Hourglass<T>::collect(ParamCollector<T>& out, const std::string& prefix) {
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    const std::string p = prefix + ".level" + std::to_string(i);
    levels_[i].skip.collect(out, p + ".skip");
    levels_[i].down.collect(out, p + ".down");
    levels_[i].up.collect(out, p + ".up");
    if (levels_[i].fuse) levels_[i].fuse->collect(out, p + ".hfgdu");
  }
  bottom_.collect(out, prefix + ".bottom");
}

template <typename T>
CrowdNet<T>::CrowdNet(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng(seed);
  const int c = config_.base_channels;
  stem_ = ResidualBlock<T>(config_.input_channels, c, rng);
  if (config_.dcpan) dcpan_.emplace(rng);
  stages_.resize(std::size_t(config_.stages));
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    Stage& stage = stages_[s];
    stage.hourglass = Hourglass<T>(c, config_.hourglass_levels, config_.upsampler, rng);
    stage.refine = ResidualBlock<T>(c, c, rng);
    stage.head = LocationHead<T>(c, rng);
    if (s + 1 < stages_.size()) {
      stage.remap_features = Conv2d<T>(c, c, 1, rng);
      stage.remap_map = Conv2d<T>(1, c, 1, rng);
    }
  }
}

template <typename T>
std::vector<Var<T>> CrowdNet<T>::forward(const Var<T>& image) {
  const Shape s = image.shape();
  check(s.c == config_.input_channels, ErrorKind::shape,
        "model expects " + std::to_string(config_.input_channels) + " input channels, got " + s.str());
  check_input_size(config_, s.h, s.w);

  Var<T> x = stem_.forward(image, training_);
  if (dcpan_) x = dcpan_->forward(x, training_);
  std::vector<Var<T>> maps;
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    Stage& stage = stages_[i];
    const Var<T> features = stage.refine.forward(stage.hourglass.forward(x, training_), training_);
    const Var<T> map = stage.head.forward(features);
    maps.push_back(map);
    if (i + 1 < stages_.size()) {
      x = add(add(x, stage.remap_features.forward(features)), stage.remap_map.forward(map));
    }
  }
  return maps;
}

template <typename T>
ParamCollector<T> CrowdNet<T>::parameters() {
  ParamCollector<T> out;
  stem_.collect(out, "stem");
  if (dcpan_) dcpan_->collect(out, "dcpan");
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    const std::string p = "stage" + std::to_string(i);
    stages_[i].hourglass.collect(out, p + ".hourglass");
    stages_[i].refine.collect(out, p + ".refine");
    stages_[i].head.collect(out, p + ".head");
    if (i + 1 < stages_.size()) {
      stages_[i].remap_features.collect(out, p + ".remap_features");
      stages_[i].remap_map.collect(out, p + ".remap_map");
    }
  }
  return out;
}

template <typename T>
std::vector<std::string> CrowdNet<T>::parameter_names() {
  std::vector<std::string> names;
  const auto collected = parameters();
  for (const auto& p : collected.params()) names.push_back(p.name);
  return names;
}

template <typename T>
std::size_t CrowdNet<T>::parameter_count() {
  std::size_t total = 0;
  const auto collected = parameters();
  for (const auto& p : collected.params()) total += p.var->value().numel();
  return total;
}

#define INSTANTIATE(T)              \
  template class Hourglass<T>;      \
  template class CrowdNet<T>;
CROWDLOC_INSTANTIATE_FT(INSTANTIATE)
#undef INSTANTIATE

}  // namespace crowdloc::nn
