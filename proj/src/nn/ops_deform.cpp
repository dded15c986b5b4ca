#include <algorithm>
#include <cmath>
#include <vector>

#include "crowdloc/common/error.hpp"
#include "crowdloc/nn/ops.hpp"
#include "gemm.hpp"
#include "instantiate.hpp"

namespace crowdloc::nn {

namespace {

using detail::view;

constexpr int kKernel = 3;
constexpr int kTaps = kKernel * kKernel;

// Bilinear corner weights for one sampling location; weights of corners that
// fall outside the map are zero.
template <typename T>
struct Sample {
  bool inside = false;
  int y0 = 0;
  int x0 = 0;
  T ly = 0;
  T lx = 0;
  bool v00 = false, v01 = false, v10 = false, v11 = false;

  Sample(T y, T x, int height, int width) {
    // written so that NaN coordinates also count as outside
    if (!(y > T(-1) && y < T(height) && x > T(-1) && x < T(width))) return;
    inside = true;
    y0 = static_cast<int>(std::floor(y));
    x0 = static_cast<int>(std::floor(x));
    ly = y - T(y0);
    lx = x - T(x0);
    const bool top = y0 >= 0;
    const bool bottom = y0 + 1 <= height - 1;
    const bool left = x0 >= 0;
    const bool right = x0 + 1 <= width - 1;
    v00 = top && left;
    v01 = top && right;
    v10 = bottom && left;
    v11 = bottom && right;
  }

  T value(const T* plane, int width) const {
    if (!inside) return T(0);
    T out = 0;
    const std::size_t base = std::size_t(y0) * width + x0;
    if (v00) out += (1 - ly) * (1 - lx) * plane[base];
    if (v01) out += (1 - ly) * lx * plane[base + 1];
    if (v10) out += ly * (1 - lx) * plane[base + width];
    if (v11) out += ly * lx * plane[base + width + 1];
    return out;
  }
};

struct DeformGeometry {
  int channels = 0;
  int height = 0;
  int width = 0;

  int rows_per_chunk() const {
    const std::size_t per_row = std::size_t(channels) * kTaps * width;
    return static_cast<int>(std::clamp<std::size_t>(detail::kColumnBudget / std::max<std::size_t>(per_row, 1),
                                                    1, std::size_t(height)));
  }
};

template <typename T>
void deform_im2col(const T* x, const T* offset, const DeformGeometry& g, int r0, int r1, T* col) {
  const std::size_t plane = std::size_t(g.height) * g.width;
  const std::size_t len = std::size_t(r1 - r0) * g.width;
  for (int t = 0; t < kTaps; ++t) {
    const int ky = t / kKernel - 1;
    const int kx = t % kKernel - 1;
    const T* off_y = offset + (2 * t) * plane;
    const T* off_x = offset + (2 * t + 1) * plane;
    for (int r = r0; r < r1; ++r) {
      for (int w = 0; w < g.width; ++w) {
        const std::size_t p = std::size_t(r) * g.width + w;
        const Sample<T> s(T(r + ky) + off_y[p], T(w + kx) + off_x[p], g.height, g.width);
        const std::size_t q = std::size_t(r - r0) * g.width + w;
        for (int c = 0; c < g.channels; ++c) {
          col[(std::size_t(c) * kTaps + t) * len + q] = s.value(x + c * plane, g.width);
        }
      }
    }
  }
}

// Scatters column gradients back to the input and the offsets.
template <typename T>
void deform_col2im(const T* gcol, const T* x, const T* offset, const DeformGeometry& g, int r0, int r1,
                   T* gx, T* goffset) {
  const std::size_t plane = std::size_t(g.height) * g.width;
  const std::size_t len = std::size_t(r1 - r0) * g.width;
  const int width = g.width;
  for (int t = 0; t < kTaps; ++t) {
    const int ky = t / kKernel - 1;
    const int kx = t % kKernel - 1;
    const T* off_y = offset + (2 * t) * plane;
    const T* off_x = offset + (2 * t + 1) * plane;
    for (int r = r0; r < r1; ++r) {
      for (int w = 0; w < width; ++w) {
        const std::size_t p = std::size_t(r) * width + w;
        const Sample<T> s(T(r + ky) + off_y[p], T(w + kx) + off_x[p], g.height, g.width);
        if (!s.inside) continue;
        const std::size_t q = std::size_t(r - r0) * width + w;
        const std::size_t base = std::size_t(s.y0) * width + s.x0;
        T dy = 0;
        T dx = 0;
        for (int c = 0; c < g.channels; ++c) {
          const T gv = gcol[(std::size_t(c) * kTaps + t) * len + q];
          const T* xp = x + c * plane;
          T* gp = gx ? gx + c * plane : nullptr;
          const T a = s.v00 ? xp[base] : T(0);
          const T b = s.v01 ? xp[base + 1] : T(0);
          const T cc = s.v10 ? xp[base + width] : T(0);
          const T d = s.v11 ? xp[base + width + 1] : T(0);
          dy += gv * ((1 - s.lx) * (cc - a) + s.lx * (d - b));
          dx += gv * ((1 - s.ly) * (b - a) + s.ly * (d - cc));
          if (gp) {
            if (s.v00) gp[base] += gv * (1 - s.ly) * (1 - s.lx);
            if (s.v01) gp[base + 1] += gv * (1 - s.ly) * s.lx;
            if (s.v10) gp[base + width] += gv * s.ly * (1 - s.lx);
            if (s.v11) gp[base + width + 1] += gv * s.ly * s.lx;
          }
        }
        if (goffset) {
          goffset[(2 * t) * plane + p] += dy;
          goffset[(2 * t + 1) * plane + p] += dx;
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Var<T> deform_conv2d(const Var<T>& x, const Var<T>& offset, const Var<T>& weight, const Var<T>& bias) {
  const Shape xs = x.shape();
  const Shape ws = weight.shape();
  const Shape os = offset.shape();
  check(ws.c == xs.c && ws.h == kKernel && ws.w == kKernel, ErrorKind::shape,
        "deform_conv2d: weight " + ws.str() + " does not match input " + xs.str());
  check(os.n == xs.n && os.c == 2 * kTaps && os.h == xs.h && os.w == xs.w, ErrorKind::shape,
        "deform_conv2d: offset " + os.str() + " must be N x 18 x H x W for input " + xs.str());
  const int co = ws.n;
  const DeformGeometry geo{xs.c, xs.h, xs.w};
  const Eigen::Index ck = Eigen::Index(xs.c) * kTaps;
  const Eigen::Index hw = Eigen::Index(xs.plane());
  const int chunk = geo.rows_per_chunk();

  Tensor<T> out(Shape{xs.n, co, xs.h, xs.w});
  const auto wm = view(weight.value().data(), co, ck, ck);
  std::vector<T> col;
  for (int n = 0; n < xs.n; ++n) {
    for (int r0 = 0; r0 < xs.h; r0 += chunk) {
      const int r1 = std::min(xs.h, r0 + chunk);
      const Eigen::Index len = Eigen::Index(r1 - r0) * xs.w;
      col.resize(std::size_t(ck * len));
      deform_im2col(x.value().plane(n, 0), offset.value().plane(n, 0), geo, r0, r1, col.data());
      view(out.plane(n, 0) + std::size_t(r0) * xs.w, co, len, hw).noalias() =
          wm * view(col.data(), ck, len, len);
    }
    if (bias.defined()) {
      for (int o = 0; o < co; ++o) {
        T* p = out.plane(n, o);
        const T b = bias.value()[o];
        for (Eigen::Index i = 0; i < hw; ++i) p[i] += b;
      }
    }
  }

  std::vector<Var<T>> inputs{x, offset, weight};
  if (bias.defined()) inputs.push_back(bias);
  return make_result<T>(std::move(out), std::move(inputs), [geo, co, ck, hw, chunk](Node<T>& self) {
    Node<T>& nx = *self.inputs[0];
    Node<T>& noff = *self.inputs[1];
    Node<T>& nw = *self.inputs[2];
    Node<T>* nb = self.inputs.size() > 3 ? self.inputs[3].get() : nullptr;
    const auto wm = view(nw.value.data(), co, ck, ck);
    std::vector<T> col;
    std::vector<T> gcol;
    for (int n = 0; n < nx.value.n(); ++n) {
      const T* go = self.grad.plane(n, 0);
      if (nb && nb->requires_grad) {
        Tensor<T>& gb = nb->grad_buffer();
        for (int o = 0; o < co; ++o) {
          T acc = 0;
          for (Eigen::Index i = 0; i < hw; ++i) acc += go[o * hw + i];
          gb[o] += acc;
        }
      }
      for (int r0 = 0; r0 < geo.height; r0 += chunk) {
        const int r1 = std::min(geo.height, r0 + chunk);
        const Eigen::Index len = Eigen::Index(r1 - r0) * geo.width;
        const auto g = view(go + std::size_t(r0) * geo.width, co, len, hw);
        if (nw.requires_grad) {
          col.resize(std::size_t(ck * len));
          deform_im2col(nx.value.plane(n, 0), noff.value.plane(n, 0), geo, r0, r1, col.data());
          view(nw.grad_buffer().data(), co, ck, ck).noalias() += g * view(col.data(), ck, len, len).transpose();
        }
        if (nx.requires_grad || noff.requires_grad) {
          gcol.resize(std::size_t(ck * len));
          view(gcol.data(), ck, len, len).noalias() = wm.transpose() * g;
          deform_col2im(gcol.data(), nx.value.plane(n, 0), noff.value.plane(n, 0), geo, r0, r1,
                        nx.requires_grad ? nx.grad_buffer().plane(n, 0) : nullptr,
                        noff.requires_grad ? noff.grad_buffer().plane(n, 0) : nullptr);
        }
      }
    }
  });
}

#define INSTANTIATE(T) \
  template Var<T> deform_conv2d(const Var<T>&, const Var<T>&, const Var<T>&, const Var<T>&);
CROWDLOC_INSTANTIATE_FT(INSTANTIATE)
#undef INSTANTIATE

}  // namespace crowdloc::nn
