#include <algorithm>
#include <cmath>
#include <vector>

#include "crowdloc/common/error.hpp"
#include "crowdloc/nn/ops.hpp"
#include "instantiate.hpp"

namespace crowdloc::nn {

namespace {

// Source taps for x2 bilinear resize with half-pixel centers.
struct Taps {
  int lo = 0;
  int hi = 0;
  double frac = 0.0;  // weight of hi
};

std::vector<Taps> bilinear_taps(int in_size) {
  std::vector<Taps> taps(static_cast<std::size_t>(in_size) * 2);
  for (int o = 0; o < in_size * 2; ++o) {
    double src = (o + 0.5) * 0.5 - 0.5;
    src = std::max(src, 0.0);
    const int lo = std::min(static_cast<int>(std::floor(src)), in_size - 1);
    const int hi = std::min(lo + 1, in_size - 1);
    taps[o] = {lo, hi, src - lo};
  }
  return taps;
}

}  // namespace

template <typename T>
Var<T> avg_pool3x3(const Var<T>& x) {
  const Shape s = x.shape();
  Tensor<T> out(s);
  const T ninth = T(1) / T(9);
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const T* src = x.value().plane(n, c);
      T* dst = out.plane(n, c);
      for (int r = 0; r < s.h; ++r) {
        for (int q = 0; q < s.w; ++q) {
          T acc = 0;
          for (int dy = -1; dy <= 1; ++dy) {
            const int rr = std::clamp(r + dy, 0, s.h - 1);
            for (int dx = -1; dx <= 1; ++dx) acc += src[rr * s.w + std::clamp(q + dx, 0, s.w - 1)];
          }
          dst[r * s.w + q] = acc * ninth;
        }
      }
    }
  }
  return make_result<T>(std::move(out), {x}, [](Node<T>& self) {
    Node<T>& in = *self.inputs[0];
    const Shape s = in.value.shape();
    const T ninth = T(1) / T(9);
    for (int n = 0; n < s.n; ++n) {
      for (int c = 0; c < s.c; ++c) {
        const T* go = self.grad.plane(n, c);
        T* gi = in.grad_buffer().plane(n, c);
        for (int r = 0; r < s.h; ++r) {
          for (int q = 0; q < s.w; ++q) {
            const T g = go[r * s.w + q] * ninth;
            for (int dy = -1; dy <= 1; ++dy) {
              const int rr = std::clamp(r + dy, 0, s.h - 1);
              for (int dx = -1; dx <= 1; ++dx) gi[rr * s.w + std::clamp(q + dx, 0, s.w - 1)] += g;
            }
          }
        }
      }
    }
  });
}

template <typename T>
Var<T> max_pool2x2(const Var<T>& x) {
  const Shape s = x.shape();
  check(s.h % 2 == 0 && s.w % 2 == 0, ErrorKind::shape,
        "max_pool2x2: spatial size " + s.str() + " must be even");
  const Shape os{s.n, s.c, s.h / 2, s.w / 2};
  Tensor<T> out(os);
  std::vector<int> arg(out.numel());
  std::size_t k = 0;
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const T* src = x.value().plane(n, c);
      for (int r = 0; r < os.h; ++r) {
        for (int q = 0; q < os.w; ++q, ++k) {
          int best = (2 * r) * s.w + 2 * q;
          for (int idx : {best + 1, best + s.w, best + s.w + 1}) {
            if (src[idx] > src[best]) best = idx;
          }
          out[k] = src[best];
          arg[k] = best;
        }
      }
    }
  }
  return make_result<T>(std::move(out), {x}, [arg = std::move(arg)](Node<T>& self) {
    Node<T>& in = *self.inputs[0];
    const Shape s = in.value.shape();
    const std::size_t oplane = self.value.shape().plane();
    std::size_t k = 0;
    for (int n = 0; n < s.n; ++n) {
      for (int c = 0; c < s.c; ++c) {
        T* gi = in.grad_buffer().plane(n, c);
        for (std::size_t i = 0; i < oplane; ++i, ++k) gi[arg[k]] += self.grad[k];
      }
    }
  });
}

template <typename T>
Var<T> upsample_bilinear2x(const Var<T>& x) {
  const Shape s = x.shape();
  const Shape os{s.n, s.c, s.h * 2, s.w * 2};
  const auto ty = bilinear_taps(s.h);
  const auto tx = bilinear_taps(s.w);
  Tensor<T> out(os);
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const T* src = x.value().plane(n, c);
      T* dst = out.plane(n, c);
      for (int r = 0; r < os.h; ++r) {
        const Taps& a = ty[r];
        const T fy = T(a.frac);
        for (int q = 0; q < os.w; ++q) {
          const Taps& b = tx[q];
          const T fx = T(b.frac);
          const T top = (1 - fx) * src[a.lo * s.w + b.lo] + fx * src[a.lo * s.w + b.hi];
          const T bot = (1 - fx) * src[a.hi * s.w + b.lo] + fx * src[a.hi * s.w + b.hi];
          dst[r * os.w + q] = (1 - fy) * top + fy * bot;
        }
      }
    }
  }
  return make_result<T>(std::move(out), {x}, [ty, tx](Node<T>& self) {
    Node<T>& in = *self.inputs[0];
    const Shape s = in.value.shape();
    const int ow = s.w * 2;
    for (int n = 0; n < s.n; ++n) {
      for (int c = 0; c < s.c; ++c) {
        const T* go = self.grad.plane(n, c);
        T* gi = in.grad_buffer().plane(n, c);
        for (int r = 0; r < s.h * 2; ++r) {
          const Taps& a = ty[r];
          const T fy = T(a.frac);
          for (int q = 0; q < ow; ++q) {
            const Taps& b = tx[q];
            const T fx = T(b.frac);
            const T g = go[r * ow + q];
            gi[a.lo * s.w + b.lo] += g * (1 - fy) * (1 - fx);
            gi[a.lo * s.w + b.hi] += g * (1 - fy) * fx;
            gi[a.hi * s.w + b.lo] += g * fy * (1 - fx);
            gi[a.hi * s.w + b.hi] += g * fy * fx;
          }
        }
      }
    }
  });
}

template <typename T>
Var<T> upsample_nearest2x(const Var<T>& x) {
  const Shape s = x.shape();
  const Shape os{s.n, s.c, s.h * 2, s.w * 2};
  Tensor<T> out(os);
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const T* src = x.value().plane(n, c);
      T* dst = out.plane(n, c);
      for (int r = 0; r < os.h; ++r) {
        for (int q = 0; q < os.w; ++q) dst[r * os.w + q] = src[(r / 2) * s.w + q / 2];
      }
    }
  }
  return make_result<T>(std::move(out), {x}, [](Node<T>& self) {
    Node<T>& in = *self.inputs[0];
    const Shape s = in.value.shape();
    const int ow = s.w * 2;
    for (int n = 0; n < s.n; ++n) {
      for (int c = 0; c < s.c; ++c) {
        const T* go = self.grad.plane(n, c);
        T* gi = in.grad_buffer().plane(n, c);
        for (int r = 0; r < s.h * 2; ++r) {
          for (int q = 0; q < ow; ++q) gi[(r / 2) * s.w + q / 2] += go[r * ow + q];
        }
      }
    }
  });
}

#define INSTANTIATE(T)                                   \
  template Var<T> avg_pool3x3(const Var<T>&);            \
  template Var<T> max_pool2x2(const Var<T>&);            \
  template Var<T> upsample_bilinear2x(const Var<T>&);    \
  template Var<T> upsample_nearest2x(const Var<T>&);
CROWDLOC_INSTANTIATE_FT(INSTANTIATE)
#undef INSTANTIATE

}  // namespace crowdloc::nn
