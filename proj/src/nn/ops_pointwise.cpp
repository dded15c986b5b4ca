#include <algorithm>
#include <cmath>

#include "crowdloc/common/error.hpp"
#include "crowdloc/nn/ops.hpp"
#include "instantiate.hpp"

namespace crowdloc::nn {

namespace {

template <typename T>
void require_same_shape(const Var<T>& a, const Var<T>& b, const char* op) {
  check(a.shape() == b.shape(), ErrorKind::shape,
        std::string(op) + ": shape mismatch " + a.shape().str() + " vs " + b.shape().str());
}

template <typename T>
void accumulate(Node<T>& input, const Tensor<T>& g) {
  if (!input.requires_grad) return;
  Tensor<T>& dst = input.grad_buffer();
  for (std::size_t i = 0; i < g.numel(); ++i) dst[i] += g[i];
}

}  // namespace

template <typename T>
T sigmoid_scalar(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  require_same_shape(a, b, "add");
  Tensor<T> out = a.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] += b.value()[i];
  return make_result<T>(std::move(out), {a, b}, [](Node<T>& self) {
    accumulate(*self.inputs[0], self.grad);
    accumulate(*self.inputs[1], self.grad);
  });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  require_same_shape(a, b, "sub");
  Tensor<T> out = a.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= b.value()[i];
  return make_result<T>(std::move(out), {a, b}, [](Node<T>& self) {
    accumulate(*self.inputs[0], self.grad);
    if (self.inputs[1]->requires_grad) {
      Tensor<T>& g = self.inputs[1]->grad_buffer();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] -= self.grad[i];
    }
  });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  require_same_shape(a, b, "mul");
  Tensor<T> out = a.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= b.value()[i];
  return make_result<T>(std::move(out), {a, b}, [](Node<T>& self) {
    Node<T>& na = *self.inputs[0];
    Node<T>& nb = *self.inputs[1];
    if (na.requires_grad) {
      Tensor<T>& g = na.grad_buffer();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i] * nb.value[i];
    }
    if (nb.requires_grad) {
      Tensor<T>& g = nb.grad_buffer();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i] * na.value[i];
    }
  });
}

template <typename T>
Var<T> mul_channel_broadcast(const Var<T>& gate, const Var<T>& x) {
  const Shape gs = gate.shape();
  const Shape xs = x.shape();
  check(gs.c == 1 && gs.n == xs.n && gs.h == xs.h && gs.w == xs.w, ErrorKind::shape,
        "mul_channel_broadcast: gate " + gs.str() + " incompatible with " + xs.str());
  Tensor<T> out(xs);
  const std::size_t plane = xs.plane();
  for (int n = 0; n < xs.n; ++n) {
    const T* g = gate.value().plane(n, 0);
    for (int c = 0; c < xs.c; ++c) {
      const T* src = x.value().plane(n, c);
      T* dst = out.plane(n, c);
      for (std::size_t i = 0; i < plane; ++i) dst[i] = g[i] * src[i];
    }
  }
  return make_result<T>(std::move(out), {gate, x}, [](Node<T>& self) {
    Node<T>& ng = *self.inputs[0];
    Node<T>& nx = *self.inputs[1];
    const Shape s = nx.value.shape();
    const std::size_t plane = s.plane();
    for (int n = 0; n < s.n; ++n) {
      for (int c = 0; c < s.c; ++c) {
        const T* go = self.grad.plane(n, c);
        if (ng.requires_grad) {
          T* gg = ng.grad_buffer().plane(n, 0);
          const T* xv = nx.value.plane(n, c);
          for (std::size_t i = 0; i < plane; ++i) gg[i] += go[i] * xv[i];
        }
        if (nx.requires_grad) {
          T* gx = nx.grad_buffer().plane(n, c);
          const T* gv = ng.value.plane(n, 0);
          for (std::size_t i = 0; i < plane; ++i) gx[i] += go[i] * gv[i];
        }
      }
    }
  });
}

template <typename T>
Var<T> add_scalar(const Var<T>& x, T value) {
  Tensor<T> out = x.value();
  for (auto& v : out.values()) v += value;
  return make_result<T>(std::move(out), {x}, [](Node<T>& self) {
    accumulate(*self.inputs[0], self.grad);
  });
}

template <typename T>
Var<T> sigmoid(const Var<T>& x) {
  Tensor<T> out(x.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = sigmoid_scalar(x.value()[i]);
  return make_result<T>(std::move(out), {x}, [](Node<T>& self) {
    Tensor<T>& g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < g.numel(); ++i) {
      const T y = self.value[i];
      g[i] += self.grad[i] * y * (T(1) - y);
    }
  });
}

template <typename T>
Var<T> relu(const Var<T>& x) {
  Tensor<T> out(x.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::max(x.value()[i], T(0));
  return make_result<T>(std::move(out), {x}, [](Node<T>& self) {
    Tensor<T>& g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < g.numel(); ++i) {
      if (self.value[i] > T(0)) g[i] += self.grad[i];
    }
  });
}

template <typename T>
Var<T> abs(const Var<T>& x) {
  Tensor<T> out(x.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::abs(x.value()[i]);
  return make_result<T>(std::move(out), {x}, [](Node<T>& self) {
    Node<T>& in = *self.inputs[0];
    Tensor<T>& g = in.grad_buffer();
    for (std::size_t i = 0; i < g.numel(); ++i) {
      const T v = in.value[i];
      if (v > T(0)) g[i] += self.grad[i];
      else if (v < T(0)) g[i] -= self.grad[i];
    }
  });
}

template <typename T>
Var<T> concat_channels(const std::vector<Var<T>>& parts) {
  check(!parts.empty(), ErrorKind::shape, "concat_channels: no inputs");
  Shape s = parts.front().shape();
  int channels = 0;
  for (const auto& p : parts) {
    const Shape ps = p.shape();
    check(ps.n == s.n && ps.h == s.h && ps.w == s.w, ErrorKind::shape,
          "concat_channels: incompatible " + ps.str() + " vs " + s.str());
    channels += ps.c;
  }
  s.c = channels;
  Tensor<T> out(s);
  const std::size_t plane = s.plane();
  for (int n = 0; n < s.n; ++n) {
    int c0 = 0;
    for (const auto& p : parts) {
      const T* src = p.value().plane(n, 0);
      std::copy(src, src + plane * p.shape().c, out.plane(n, c0));
      c0 += p.shape().c;
    }
  }
  return make_result<T>(std::move(out), parts, [](Node<T>& self) {
    const Shape s = self.value.shape();
    const std::size_t plane = s.plane();
    for (int n = 0; n < s.n; ++n) {
      int c0 = 0;
      for (auto& in : self.inputs) {
        const int pc = in->value.c();
        if (in->requires_grad) {
          T* dst = in->grad_buffer().plane(n, 0);
          const T* src = self.grad.plane(n, c0);
          for (std::size_t i = 0; i < plane * pc; ++i) dst[i] += src[i];
        }
        c0 += pc;
      }
    }
  });
}

template <typename T>
Var<T> channel_max(const Var<T>& x) {
  const Shape s = x.shape();
  check(s.c >= 1, ErrorKind::shape, "channel_max: needs at least one channel");
  Tensor<T> out(Shape{s.n, 1, s.h, s.w});
  std::vector<int> arg(out.numel(), 0);
  const std::size_t plane = s.plane();
  for (int n = 0; n < s.n; ++n) {
    T* dst = out.plane(n, 0);
    int* a = arg.data() + n * plane;
    std::copy(x.value().plane(n, 0), x.value().plane(n, 0) + plane, dst);
    for (int c = 1; c < s.c; ++c) {
      const T* src = x.value().plane(n, c);
      for (std::size_t i = 0; i < plane; ++i) {
        if (src[i] > dst[i]) {
          dst[i] = src[i];
          a[i] = c;
        }
      }
    }
  }
  return make_result<T>(std::move(out), {x}, [arg = std::move(arg)](Node<T>& self) {
    Node<T>& in = *self.inputs[0];
    const Shape s = in.value.shape();
    const std::size_t plane = s.plane();
    Tensor<T>& g = in.grad_buffer();
    for (int n = 0; n < s.n; ++n) {
      const T* go = self.grad.plane(n, 0);
      const int* a = arg.data() + n * plane;
      for (std::size_t i = 0; i < plane; ++i) g.plane(n, a[i])[i] += go[i];
    }
  });
}

template <typename T>
Var<T> channel_mean(const Var<T>& x) {
  const Shape s = x.shape();
  Tensor<T> out(Shape{s.n, 1, s.h, s.w});
  const std::size_t plane = s.plane();
  const T inv = T(1) / T(s.c);
  for (int n = 0; n < s.n; ++n) {
    T* dst = out.plane(n, 0);
    for (int c = 0; c < s.c; ++c) {
      const T* src = x.value().plane(n, c);
      for (std::size_t i = 0; i < plane; ++i) dst[i] += src[i];
    }
    for (std::size_t i = 0; i < plane; ++i) dst[i] *= inv;
  }
  return make_result<T>(std::move(out), {x}, [](Node<T>& self) {
    Node<T>& in = *self.inputs[0];
    const Shape s = in.value.shape();
    const std::size_t plane = s.plane();
    const T inv = T(1) / T(s.c);
    Tensor<T>& g = in.grad_buffer();
    for (int n = 0; n < s.n; ++n) {
      const T* go = self.grad.plane(n, 0);
      for (int c = 0; c < s.c; ++c) {
        T* dst = g.plane(n, c);
        for (std::size_t i = 0; i < plane; ++i) dst[i] += go[i] * inv;
      }
    }
  });
}

template <typename T>
Var<T> sum(const Var<T>& x) {
  T total = 0;
  for (T v : x.value().values()) total += v;
  return make_result<T>(Tensor<T>(Shape{}, total), {x}, [](Node<T>& self) {
    Tensor<T>& g = self.inputs[0]->grad_buffer();
    const T go = self.grad[0];
    for (auto& v : g.values()) v += go;
  });
}

template <typename T>
Var<T> weighted_sum(const Var<T>& x, const Tensor<T>& weights) {
  check(weights.shape() == x.shape(), ErrorKind::shape, "weighted_sum: weight shape mismatch");
  T total = 0;
  for (std::size_t i = 0; i < weights.numel(); ++i) total += x.value()[i] * weights[i];
  return make_result<T>(Tensor<T>(Shape{}, total), {x}, [weights](Node<T>& self) {
    Tensor<T>& g = self.inputs[0]->grad_buffer();
    const T go = self.grad[0];
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += go * weights[i];
  });
}

#define INSTANTIATE(T)                                                          \
  template T sigmoid_scalar(T);                                                 \
  template Var<T> add(const Var<T>&, const Var<T>&);                            \
  template Var<T> sub(const Var<T>&, const Var<T>&);                            \
  template Var<T> mul(const Var<T>&, const Var<T>&);                            \
  template Var<T> mul_channel_broadcast(const Var<T>&, const Var<T>&);          \
  template Var<T> add_scalar(const Var<T>&, T);                                 \
  template Var<T> sigmoid(const Var<T>&);                                       \
  template Var<T> relu(const Var<T>&);                                          \
  template Var<T> abs(const Var<T>&);                                           \
  template Var<T> concat_channels(const std::vector<Var<T>>&);                  \
  template Var<T> channel_max(const Var<T>&);                                   \
  template Var<T> channel_mean(const Var<T>&);                                  \
  template Var<T> sum(const Var<T>&);                                           \
  template Var<T> weighted_sum(const Var<T>&, const Tensor<T>&);
CROWDLOC_INSTANTIATE_FT(INSTANTIATE)
#undef INSTANTIATE

}  // namespace crowdloc::nn
