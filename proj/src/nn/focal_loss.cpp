#include "crowdloc/nn/focal_loss.hpp"

#include <algorithm>
#include <cmath>

#include "crowdloc/common/error.hpp"
#include "instantiate.hpp"

namespace crowdloc::nn {

template <typename T>
Var<T> focal_loss(const Var<T>& pred, const Tensor<T>& target, const Tensor<T>& centers, T eps) {
  check(pred.shape() == target.shape() && pred.shape() == centers.shape(), ErrorKind::shape,
        "focal_loss: prediction " + pred.shape().str() + ", target " + target.shape().str() +
            " and center mask " + centers.shape().str() + " must match");
  check(pred.shape().c == 1, ErrorKind::shape, "focal_loss: location maps have one channel");
  double num_centers = 0.0;
  for (T m : centers.values()) num_centers += m > T(0.5) ? 1.0 : 0.0;
  check(num_centers > 0.0, ErrorKind::invalid_argument,
        "focal_loss: batch has no annotated centers");

  const Tensor<T>& p = pred.value();
  double total = 0.0;
  for (std::size_t i = 0; i < p.numel(); ++i) {
    const double q = std::clamp<double>(p[i], double(eps), 1.0 - double(eps));
    if (centers[i] > T(0.5)) {
      total += (1.0 - q) * (1.0 - q) * std::log(q);
    } else {
      const double neg = std::pow(1.0 - double(target[i]), 4.0);
      total += neg * q * q * std::log(1.0 - q);
    }
  }
  const double loss = -total / num_centers;

  return make_result<T>(Tensor<T>(Shape{}, T(loss)), {pred},
                        [target, centers, eps, num_centers](Node<T>& self) {
    Node<T>& in = *self.inputs[0];
    Tensor<T>& g = in.grad_buffer();
    const double scale = -double(self.grad[0]) / num_centers;
    const double lo = double(eps);
    const double hi = 1.0 - double(eps);
    for (std::size_t i = 0; i < g.numel(); ++i) {
      const double raw = in.value[i];
      if (raw < lo || raw > hi) continue;  // clamped: no gradient
      const double q = raw;
      double d = 0.0;
      if (centers[i] > T(0.5)) {
        d = -2.0 * (1.0 - q) * std::log(q) + (1.0 - q) * (1.0 - q) / q;
      } else {
        const double neg = std::pow(1.0 - double(target[i]), 4.0);
        d = neg * (2.0 * q * std::log(1.0 - q) - q * q / (1.0 - q));
      }
      g[i] += T(scale * d);
    }
  });
}

template <typename T>
Tensor<T> center_mask(const std::vector<targets::PointSet>& points) {
  check(!points.empty(), ErrorKind::invalid_argument, "center_mask: empty batch");
  const int h = points.front().height();
  const int w = points.front().width();
  Tensor<T> mask(Shape{static_cast<int>(points.size()), 1, h, w});
  for (std::size_t n = 0; n < points.size(); ++n) {
    check(points[n].height() == h && points[n].width() == w, ErrorKind::shape,
          "center_mask: point sets have different image sizes");
    for (const auto& cell : points[n].cells()) mask.at(int(n), 0, cell.row, cell.col) = T(1);
  }
  return mask;
}

#define INSTANTIATE(T)                                                             \
  template Var<T> focal_loss(const Var<T>&, const Tensor<T>&, const Tensor<T>&, T); \
  template Tensor<T> center_mask(const std::vector<targets::PointSet>&);
CROWDLOC_INSTANTIATE_FT(INSTANTIATE)
#undef INSTANTIATE

}  // namespace crowdloc::nn
