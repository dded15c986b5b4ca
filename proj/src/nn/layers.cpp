#include "crowdloc/nn/layers.hpp"

#include <cmath>

#include "instantiate.hpp"

namespace crowdloc::nn {

namespace {
// Bias prior so the initial location map sits near 0.1 instead of 0.5.
constexpr double kHeadBiasPrior = -2.19;
constexpr double kHeadWeightScale = 0.05;  // keeps the initial map near the prior
}

template <typename T>
void kaiming_uniform(Tensor<T>& weight, int fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / double(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : weight.values()) v = T(dist(rng));
}

template <typename T>
Conv2d<T>::Conv2d(int in_channels, int out_channels, int kernel, Rng& rng, ConvSpec spec,
                  bool with_bias, bool zero_bias)
    : spec_(spec) {
  Tensor<T> w(Shape{out_channels, in_channels, kernel, kernel});
  const int fan_in = in_channels * kernel * kernel;
  kaiming_uniform(w, fan_in, rng);
  weight_ = Var<T>(std::move(w), true);
  if (with_bias) {
    Tensor<T> b(Shape{1, out_channels, 1, 1});
    if (!zero_bias) {
      const double bound = 1.0 / std::sqrt(double(fan_in));
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (auto& v : b.values()) v = T(dist(rng));
    }
    bias_ = Var<T>(std::move(b), true);
  }
}

template <typename T>
Var<T> Conv2d<T>::forward(const Var<T>& x) const {
  return conv2d(x, weight_, bias_, spec_);
}

template <typename T>
void Conv2d<T>::collect(ParamCollector<T>& out, const std::string& prefix) {
  out.param(prefix + ".weight", weight_);
  if (bias_.defined()) out.param(prefix + ".bias", bias_);
}

template <typename T>
BatchNorm2d<T>::BatchNorm2d(int channels)
    : gamma_(Tensor<T>(Shape{1, channels, 1, 1}, T(1)), true),
      beta_(Tensor<T>(Shape{1, channels, 1, 1}, T(0)), true),
      running_mean_(Shape{1, channels, 1, 1}, T(0)),
      running_var_(Shape{1, channels, 1, 1}, T(1)) {}

template <typename T>
Var<T> BatchNorm2d<T>::forward(const Var<T>& x, bool training) {
  return batch_norm(x, gamma_, beta_, running_mean_, running_var_, training);
}

template <typename T>
void BatchNorm2d<T>::collect(ParamCollector<T>& out, const std::string& prefix) {
  out.param(prefix + ".gamma", gamma_);
  out.param(prefix + ".beta", beta_);
  out.buffer(prefix + ".running_mean", running_mean_);
  out.buffer(prefix + ".running_var", running_var_);
}

template <typename T>
ResidualBlock<T>::ResidualBlock(int in_channels, int out_channels, Rng& rng)
    : conv1_(in_channels, out_channels, 3, rng),
      bn1_(out_channels),
      conv2_(out_channels, out_channels, 3, rng),
      bn2_(out_channels),
      has_skip_(in_channels != out_channels) {
  if (has_skip_) skip_ = Conv2d<T>(in_channels, out_channels, 1, rng);
}

template <typename T>
Var<T> ResidualBlock<T>::forward(const Var<T>& x, bool training) {
  Var<T> y = relu(bn1_.forward(conv1_.forward(x), training));
  y = bn2_.forward(conv2_.forward(y), training);
  return relu(add(y, has_skip_ ? skip_.forward(x) : x));
}

template <typename T>
void ResidualBlock<T>::collect(ParamCollector<T>& out, const std::string& prefix) {
  conv1_.collect(out, prefix + ".conv1");
  bn1_.collect(out, prefix + ".bn1");
  conv2_.collect(out, prefix + ".conv2");
  bn2_.collect(out, prefix + ".bn2");
  if (has_skip_) skip_.collect(out, prefix + ".skip");
}

template <typename T>
LocationHead<T>::LocationHead(int in_channels, Rng& rng) : conv_(in_channels, 1, 1, rng, {}, true, true) {
  conv_.bias().mutable_value()[0] = T(kHeadBiasPrior);
  for (auto& w : conv_.weight().mutable_value().values()) w *= T(kHeadWeightScale);
}

template <typename T>
Var<T> LocationHead<T>::forward(const Var<T>& x) const {
  return sigmoid(conv_.forward(x));
}

template <typename T>
void LocationHead<T>::collect(ParamCollector<T>& out, const std::string& prefix) {
  conv_.collect(out, prefix + ".conv");
}

#define INSTANTIATE(T)                                        \
  template void kaiming_uniform(Tensor<T>&, int, Rng&);       \
  template class Conv2d<T>;                                   \
  template class BatchNorm2d<T>;                              \
  template class ResidualBlock<T>;                            \
  template class LocationHead<T>;
CROWDLOC_INSTANTIATE_FT(INSTANTIATE)
#undef INSTANTIATE

}  // namespace crowdloc::nn
