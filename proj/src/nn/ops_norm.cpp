#include <cmath>
#include <vector>

#include "crowdloc/common/error.hpp"
#include "crowdloc/nn/ops.hpp"
#include "instantiate.hpp"

namespace crowdloc::nn {

template <typename T>
Var<T> batch_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, Tensor<T>& running_mean,
                  Tensor<T>& running_var, bool training, T momentum, T eps) {
  const Shape s = x.shape();
  const std::size_t channels = std::size_t(s.c);
  check(gamma.value().numel() == channels && beta.value().numel() == channels &&
            running_mean.numel() == channels && running_var.numel() == channels,
        ErrorKind::shape, "batch_norm: parameter size does not match " + s.str());
  const std::size_t plane = s.plane();
  const double count = double(s.n) * double(plane);
  check(!training || count > 1.0, ErrorKind::shape,
        "batch_norm: training mode needs more than one value per channel");

  std::vector<T> mean(channels);
  std::vector<T> inv_std(channels);
  for (int c = 0; c < s.c; ++c) {
    if (training) {
      double acc = 0.0;
      for (int n = 0; n < s.n; ++n) {
        const T* p = x.value().plane(n, c);
        for (std::size_t i = 0; i < plane; ++i) acc += p[i];
      }
      const double mu = acc / count;
      double var = 0.0;
      for (int n = 0; n < s.n; ++n) {
        const T* p = x.value().plane(n, c);
        for (std::size_t i = 0; i < plane; ++i) var += (p[i] - mu) * (p[i] - mu);
      }
      var /= count;
      mean[c] = T(mu);
      inv_std[c] = T(1.0 / std::sqrt(var + double(eps)));
      running_mean[c] = (1 - momentum) * running_mean[c] + momentum * T(mu);
      running_var[c] = (1 - momentum) * running_var[c] + momentum * T(var * count / (count - 1.0));
    } else {
      mean[c] = running_mean[c];
      inv_std[c] = T(1) / std::sqrt(running_var[c] + eps);
    }
  }

  Tensor<T> xhat(s);
  Tensor<T> out(s);
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const T* p = x.value().plane(n, c);
      T* h = xhat.plane(n, c);
      T* o = out.plane(n, c);
      const T g = gamma.value()[c];
      const T b = beta.value()[c];
      for (std::size_t i = 0; i < plane; ++i) {
        h[i] = (p[i] - mean[c]) * inv_std[c];
        o[i] = g * h[i] + b;
      }
    }
  }

  return make_result<T>(std::move(out), {x, gamma, beta},
                        [xhat = std::move(xhat), inv_std = std::move(inv_std), training](Node<T>& self) {
    Node<T>& nx = *self.inputs[0];
    Node<T>& ng = *self.inputs[1];
    Node<T>& nb = *self.inputs[2];
    const Shape s = nx.value.shape();
    const std::size_t plane = s.plane();
    const T count = T(double(s.n) * double(plane));
    for (int c = 0; c < s.c; ++c) {
      T sum_g = 0;
      T sum_gh = 0;
      for (int n = 0; n < s.n; ++n) {
        const T* go = self.grad.plane(n, c);
        const T* h = xhat.plane(n, c);
        for (std::size_t i = 0; i < plane; ++i) {
          sum_g += go[i];
          sum_gh += go[i] * h[i];
        }
      }
      if (ng.requires_grad) ng.grad_buffer()[c] += sum_gh;
      if (nb.requires_grad) nb.grad_buffer()[c] += sum_g;
      if (!nx.requires_grad) continue;
      const T g = ng.value[c];
      for (int n = 0; n < s.n; ++n) {
        const T* go = self.grad.plane(n, c);
        const T* h = xhat.plane(n, c);
        T* gx = nx.grad_buffer().plane(n, c);
        if (training) {
          const T k = g * inv_std[c] / count;
          for (std::size_t i = 0; i < plane; ++i) gx[i] += k * (count * go[i] - sum_g - h[i] * sum_gh);
        } else {
          const T k = g * inv_std[c];
          for (std::size_t i = 0; i < plane; ++i) gx[i] += k * go[i];
        }
      }
    }
  });
}

#define INSTANTIATE(T)                                                                        \
  template Var<T> batch_norm(const Var<T>&, const Var<T>&, const Var<T>&, Tensor<T>&, Tensor<T>&, \
                             bool, T, T);
CROWDLOC_INSTANTIATE_FT(INSTANTIATE)
#undef INSTANTIATE

}  // namespace crowdloc::nn
