#include <algorithm>
#include <vector>

#include "crowdloc/common/error.hpp"
#include "crowdloc/nn/ops.hpp"
#include "gemm.hpp"
#include "instantiate.hpp"

namespace crowdloc::nn {

namespace {

using detail::view;

struct Geometry {
  int channels = 0;
  int height = 0;
  int width = 0;
  int kernel = 0;
  int dilation = 1;
  PadMode pad = PadMode::zero;

  int half() const { return kernel / 2; }
  int rows_per_chunk() const {
    const std::size_t per_row = std::size_t(channels) * kernel * kernel * width;
    return static_cast<int>(std::clamp<std::size_t>(detail::kColumnBudget / std::max<std::size_t>(per_row, 1),
                                                    1, std::size_t(height)));
  }
};

// col[(c*K + ky)*K + kx][(r - r0)*W + w] = x[c][r + dy][w + dx]
template <typename T>
void im2col(const T* x, const Geometry& g, int r0, int r1, T* col) {
  const int k = g.kernel;
  const int w_size = g.width;
  const std::size_t len = std::size_t(r1 - r0) * w_size;
  for (int c = 0; c < g.channels; ++c) {
    const T* plane = x + std::size_t(c) * g.height * w_size;
    for (int ky = 0; ky < k; ++ky) {
      const int dy = (ky - g.half()) * g.dilation;
      for (int kx = 0; kx < k; ++kx) {
        const int dx = (kx - g.half()) * g.dilation;
        T* dst = col + ((std::size_t(c) * k + ky) * k + kx) * len;
        for (int r = r0; r < r1; ++r, dst += w_size) {
          int sr = r + dy;
          if (g.pad == PadMode::zero) {
            if (sr < 0 || sr >= g.height) {
              std::fill(dst, dst + w_size, T(0));
              continue;
            }
            const T* src = plane + std::size_t(sr) * w_size;
            const int lo = std::clamp(-dx, 0, w_size);
            const int hi = std::clamp(w_size - dx, lo, w_size);
            std::fill(dst, dst + lo, T(0));
            for (int w = lo; w < hi; ++w) dst[w] = src[w + dx];
            std::fill(dst + hi, dst + w_size, T(0));
          } else {
            sr = std::clamp(sr, 0, g.height - 1);
            const T* src = plane + std::size_t(sr) * w_size;
            for (int w = 0; w < w_size; ++w) dst[w] = src[std::clamp(w + dx, 0, w_size - 1)];
          }
        }
      }
    }
  }
}

template <typename T>
void col2im(const T* col, const Geometry& g, int r0, int r1, T* gx) {
  const int k = g.kernel;
  const int w_size = g.width;
  const std::size_t len = std::size_t(r1 - r0) * w_size;
  for (int c = 0; c < g.channels; ++c) {
    T* plane = gx + std::size_t(c) * g.height * w_size;
    for (int ky = 0; ky < k; ++ky) {
      const int dy = (ky - g.half()) * g.dilation;
      for (int kx = 0; kx < k; ++kx) {
        const int dx = (kx - g.half()) * g.dilation;
        const T* src = col + ((std::size_t(c) * k + ky) * k + kx) * len;
        for (int r = r0; r < r1; ++r, src += w_size) {
          int sr = r + dy;
          if (g.pad == PadMode::zero) {
            if (sr < 0 || sr >= g.height) continue;
            T* dst = plane + std::size_t(sr) * w_size;
            const int lo = std::clamp(-dx, 0, w_size);
            const int hi = std::clamp(w_size - dx, lo, w_size);
            for (int w = lo; w < hi; ++w) dst[w + dx] += src[w];
          } else {
            sr = std::clamp(sr, 0, g.height - 1);
            T* dst = plane + std::size_t(sr) * w_size;
            for (int w = 0; w < w_size; ++w) dst[std::clamp(w + dx, 0, w_size - 1)] += src[w];
          }
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, ConvSpec spec) {
  const Shape xs = x.shape();
  const Shape ws = weight.shape();
  check(ws.c == xs.c, ErrorKind::shape,
        "conv2d: weight " + ws.str() + " does not match input " + xs.str());
  check(ws.h == ws.w && ws.h % 2 == 1, ErrorKind::shape, "conv2d: kernel must be square and odd");
  check(spec.dilation >= 1, ErrorKind::invalid_argument, "conv2d: dilation must be >= 1");
  if (bias.defined()) {
    check(bias.value().numel() == std::size_t(ws.n), ErrorKind::shape, "conv2d: bias size mismatch");
  }
  const int co = ws.n;
  const Geometry geo{xs.c, xs.h, xs.w, ws.h, spec.dilation, spec.pad};
  const Eigen::Index ck = Eigen::Index(xs.c) * ws.h * ws.w;
  const Eigen::Index hw = Eigen::Index(xs.plane());
  const bool pointwise = ws.h == 1;

  Tensor<T> out(Shape{xs.n, co, xs.h, xs.w});
  const auto wm = view(weight.value().data(), co, ck, ck);
  std::vector<T> col;
  const int chunk = geo.rows_per_chunk();
  for (int n = 0; n < xs.n; ++n) {
    const T* xin = x.value().plane(n, 0);
    T* yout = out.plane(n, 0);
    if (pointwise) {
      view(yout, co, hw, hw).noalias() = wm * view(xin, ck, hw, hw);
    } else {
      for (int r0 = 0; r0 < xs.h; r0 += chunk) {
        const int r1 = std::min(xs.h, r0 + chunk);
        const Eigen::Index len = Eigen::Index(r1 - r0) * xs.w;
        col.resize(std::size_t(ck * len));
        im2col(xin, geo, r0, r1, col.data());
        view(yout + std::size_t(r0) * xs.w, co, len, hw).noalias() = wm * view(col.data(), ck, len, len);
      }
    }
    if (bias.defined()) {
      for (int o = 0; o < co; ++o) {
        const T b = bias.value()[o];
        T* p = out.plane(n, o);
        for (Eigen::Index i = 0; i < hw; ++i) p[i] += b;
      }
    }
  }

  std::vector<Var<T>> inputs{x, weight};
  if (bias.defined()) inputs.push_back(bias);
  return make_result<T>(std::move(out), std::move(inputs), [geo, co, ck, hw, pointwise, chunk](Node<T>& self) {
    Node<T>& nx = *self.inputs[0];
    Node<T>& nw = *self.inputs[1];
    Node<T>* nb = self.inputs.size() > 2 ? self.inputs[2].get() : nullptr;
    const int batch = nx.value.n();
    const auto wm = view(nw.value.data(), co, ck, ck);
    std::vector<T> col;
    std::vector<T> gcol;
    for (int n = 0; n < batch; ++n) {
      const T* go = self.grad.plane(n, 0);
      const T* xin = nx.value.plane(n, 0);
      if (nb && nb->requires_grad) {
        Tensor<T>& gb = nb->grad_buffer();
        for (int o = 0; o < co; ++o) {
          const T* p = go + std::size_t(o) * hw;
          T acc = 0;
          for (Eigen::Index i = 0; i < hw; ++i) acc += p[i];
          gb[o] += acc;
        }
      }
      if (pointwise) {
        const auto g = view(go, co, hw, hw);
        if (nw.requires_grad) {
          view(nw.grad_buffer().data(), co, ck, ck).noalias() += g * view(xin, ck, hw, hw).transpose();
        }
        if (nx.requires_grad) {
          view(nx.grad_buffer().plane(n, 0), ck, hw, hw).noalias() += wm.transpose() * g;
        }
        continue;
      }
      for (int r0 = 0; r0 < geo.height; r0 += chunk) {
        const int r1 = std::min(geo.height, r0 + chunk);
        const Eigen::Index len = Eigen::Index(r1 - r0) * geo.width;
        const auto g = view(go + std::size_t(r0) * geo.width, co, len, hw);
        if (nw.requires_grad) {
          col.resize(std::size_t(ck * len));
          im2col(xin, geo, r0, r1, col.data());
          view(nw.grad_buffer().data(), co, ck, ck).noalias() += g * view(col.data(), ck, len, len).transpose();
        }
        if (nx.requires_grad) {
          gcol.resize(std::size_t(ck * len));
          view(gcol.data(), ck, len, len).noalias() = wm.transpose() * g;
          col2im(gcol.data(), geo, r0, r1, nx.grad_buffer().plane(n, 0));
        }
      }
    }
  });
}

template <typename T>
Var<T> depthwise_conv2d(const Var<T>& x, const Var<T>& weight, ConvSpec spec) {
  const Shape xs = x.shape();
  const Shape ws = weight.shape();
  check(ws.n == xs.c && ws.c == 1 && ws.h == ws.w && ws.h % 2 == 1, ErrorKind::shape,
        "depthwise_conv2d: weight " + ws.str() + " does not match input " + xs.str());
  const Geometry geo{1, xs.h, xs.w, ws.h, spec.dilation, spec.pad};
  const std::size_t taps = std::size_t(ws.h) * ws.w;
  const std::size_t plane = xs.plane();
  Tensor<T> out(xs);
  std::vector<T> col(taps * plane);
  for (int n = 0; n < xs.n; ++n) {
    for (int c = 0; c < xs.c; ++c) {
      im2col(x.value().plane(n, c), geo, 0, xs.h, col.data());
      const T* k = weight.value().plane(c, 0);
      T* dst = out.plane(n, c);
      for (std::size_t t = 0; t < taps; ++t) {
        const T* src = col.data() + t * plane;
        for (std::size_t i = 0; i < plane; ++i) dst[i] += k[t] * src[i];
      }
    }
  }
  return make_result<T>(std::move(out), {x, weight}, [geo, taps, plane](Node<T>& self) {
    Node<T>& nx = *self.inputs[0];
    Node<T>& nw = *self.inputs[1];
    const Shape xs = nx.value.shape();
    std::vector<T> col(taps * plane);
    for (int n = 0; n < xs.n; ++n) {
      for (int c = 0; c < xs.c; ++c) {
        const T* go = self.grad.plane(n, c);
        if (nw.requires_grad) {
          im2col(nx.value.plane(n, c), geo, 0, xs.h, col.data());
          T* gk = nw.grad_buffer().plane(c, 0);
          for (std::size_t t = 0; t < taps; ++t) {
            const T* src = col.data() + t * plane;
            T acc = 0;
            for (std::size_t i = 0; i < plane; ++i) acc += go[i] * src[i];
            gk[t] += acc;
          }
        }
        if (nx.requires_grad) {
          const T* k = nw.value.plane(c, 0);
          for (std::size_t t = 0; t < taps; ++t) {
            T* dst = col.data() + t * plane;
            for (std::size_t i = 0; i < plane; ++i) dst[i] = k[t] * go[i];
          }
          col2im(col.data(), geo, 0, xs.h, nx.grad_buffer().plane(n, c));
        }
      }
    }
  });
}

#define INSTANTIATE(T)                                                                 \
  template Var<T> conv2d(const Var<T>&, const Var<T>&, const Var<T>&, ConvSpec);       \
  template Var<T> depthwise_conv2d(const Var<T>&, const Var<T>&, ConvSpec);
CROWDLOC_INSTANTIATE_FT(INSTANTIATE)
#undef INSTANTIATE

}  // namespace crowdloc::nn
