#pragma once

#include <vector>

#include "crowdloc/nn/autograd.hpp"

// Differentiable tensor operations on NCHW variables. Every op is instantiated
// for float (training/inference) and double (gradient verification).
namespace crowdloc::nn {

enum class PadMode { zero, replicate };

struct ConvSpec {
  int dilation = 1;
  PadMode pad = PadMode::zero;
};

// Stride-1 "same" convolution; weight is Co x Ci x K x K with K odd.
// bias may be an undefined Var.
template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, ConvSpec spec = {});

// Per-channel K x K filter; weight is C x 1 x K x K.
template <typename T>
Var<T> depthwise_conv2d(const Var<T>& x, const Var<T>& weight, ConvSpec spec = {});

// 3x3 deformable convolution (padding 1). offset is N x 18 x H x W holding
// (dy, dx) per kernel tap; taps are sampled bilinearly, zero outside the map.
template <typename T>
Var<T> deform_conv2d(const Var<T>& x, const Var<T>& offset, const Var<T>& weight,
                     const Var<T>& bias);

template <typename T> Var<T> add(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> sub(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> mul(const Var<T>& a, const Var<T>& b);
// gate (N x 1 x H x W) broadcast over the channels of x.
template <typename T> Var<T> mul_channel_broadcast(const Var<T>& gate, const Var<T>& x);
template <typename T> Var<T> add_scalar(const Var<T>& x, T value);

template <typename T> Var<T> sigmoid(const Var<T>& x);
template <typename T> Var<T> relu(const Var<T>& x);
template <typename T> Var<T> abs(const Var<T>& x);

template <typename T> Var<T> concat_channels(const std::vector<Var<T>>& parts);
template <typename T> Var<T> channel_max(const Var<T>& x);
template <typename T> Var<T> channel_mean(const Var<T>& x);

// Stride-1 3x3 mean filter with replicate padding.
template <typename T> Var<T> avg_pool3x3(const Var<T>& x);
// 2x2 stride-2 max pooling; H and W must be even.
template <typename T> Var<T> max_pool2x2(const Var<T>& x);
// x2 bilinear resize with half-pixel centers (align_corners = false).
template <typename T> Var<T> upsample_bilinear2x(const Var<T>& x);
template <typename T> Var<T> upsample_nearest2x(const Var<T>& x);

// Batch statistics over (N, H, W) in training mode, running statistics otherwise.
// running_mean / running_var are 1 x C x 1 x 1 buffers updated in training mode.
template <typename T>
Var<T> batch_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta,
                  Tensor<T>& running_mean, Tensor<T>& running_var, bool training,
                  T momentum = T(0.1), T eps = T(1e-5));

template <typename T> Var<T> sum(const Var<T>& x);
// sum(x * weights) with constant weights; projects a tensor to a scalar for checks.
template <typename T> Var<T> weighted_sum(const Var<T>& x, const Tensor<T>& weights);

template <typename T> T sigmoid_scalar(T x);

}  // namespace crowdloc::nn
