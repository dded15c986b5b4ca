#pragma once

#include <random>
#include <string>
#include <vector>

#include "crowdloc/nn/ops.hpp"

namespace crowdloc::nn {

template <typename T>
struct NamedParam {
  std::string name;
  Var<T>* var;
};

template <typename T>
struct NamedBuffer {
  std::string name;
  Tensor<T>* tensor;
};

// Flat, ordered view of a module tree's learnable parameters and buffers.
template <typename T>
class ParamCollector {
 public:
  void param(const std::string& name, Var<T>& var) { params_.push_back({name, &var}); }
  void buffer(const std::string& name, Tensor<T>& tensor) { buffers_.push_back({name, &tensor}); }

  const std::vector<NamedParam<T>>& params() const noexcept { return params_; }
  const std::vector<NamedBuffer<T>>& buffers() const noexcept { return buffers_; }

 private:
  std::vector<NamedParam<T>> params_;
  std::vector<NamedBuffer<T>> buffers_;
};

using Rng = std::mt19937_64;

// U(-sqrt(6 / fan_in), sqrt(6 / fan_in)).
template <typename T>
void kaiming_uniform(Tensor<T>& weight, int fan_in, Rng& rng);

template <typename T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(int in_channels, int out_channels, int kernel, Rng& rng, ConvSpec spec = {},
         bool with_bias = true, bool zero_bias = false);

  Var<T> forward(const Var<T>& x) const;
  void collect(ParamCollector<T>& out, const std::string& prefix);

  Var<T>& weight() { return weight_; }
  Var<T>& bias() { return bias_; }

 private:
  Var<T> weight_;
  Var<T> bias_;
  ConvSpec spec_;
};

template <typename T>
class BatchNorm2d {
 public:
  BatchNorm2d() = default;
  explicit BatchNorm2d(int channels);

  Var<T> forward(const Var<T>& x, bool training);
  void collect(ParamCollector<T>& out, const std::string& prefix);

 private:
  Var<T> gamma_;
  Var<T> beta_;
  Tensor<T> running_mean_;
  Tensor<T> running_var_;
};

// relu(bn(conv(relu(bn(conv(x))))) + skip(x)), skip is a 1x1 conv when widths differ.
template <typename T>
class ResidualBlock {
 public:
  ResidualBlock() = default;
  ResidualBlock(int in_channels, int out_channels, Rng& rng);

  Var<T> forward(const Var<T>& x, bool training);
  void collect(ParamCollector<T>& out, const std::string& prefix);

 private:
  Conv2d<T> conv1_;
  BatchNorm2d<T> bn1_;
  Conv2d<T> conv2_;
  BatchNorm2d<T> bn2_;
  Conv2d<T> skip_;
  bool has_skip_ = false;
};

// 1x1 conv to one channel followed by a sigmoid: the per-stage location map.
template <typename T>
class LocationHead {
 public:
  LocationHead() = default;
  LocationHead(int in_channels, Rng& rng);

  Var<T> forward(const Var<T>& x) const;
  void collect(ParamCollector<T>& out, const std::string& prefix);

 private:
  Conv2d<T> conv_;
};

}  // namespace crowdloc::nn
