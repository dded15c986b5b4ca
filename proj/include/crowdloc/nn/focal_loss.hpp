#pragma once

#include <vector>

#include "crowdloc/nn/autograd.hpp"
#include "crowdloc/targets/point_set.hpp"

namespace crowdloc::nn {

inline constexpr double kFocalEps = 1e-6;

// Penalty-reduced pixel-wise focal loss over a batch of location maps:
//   L = -(1/N) sum_p [ center_p (1 - q)^2 log q + (1 - center_p) (1 - y)^4 q^2 log(1 - q) ]
// with q = clamp(pred, eps, 1 - eps), y the FIDT target, N the number of centers.
// pred, target and centers are N x 1 x H x W; centers holds 1 at annotated cells.
template <typename T>
Var<T> focal_loss(const Var<T>& pred, const Tensor<T>& target, const Tensor<T>& centers,
                  T eps = T(kFocalEps));

// Rasterizes annotated cells of each point set into an N x 1 x H x W mask.
template <typename T>
Tensor<T> center_mask(const std::vector<targets::PointSet>& points);

}  // namespace crowdloc::nn
