#include "crowdloc/nn/dcpan.hpp"

#include "crowdloc/common/error.hpp"
#include "instantiate.hpp"

namespace crowdloc::nn {

template <typename T>
Var<T> sa_encode(const Var<T>& x) {
  return concat_channels<T>({channel_max(x), channel_mean(x)});
}

template <typename T>
Msfe<T>::Msfe(Rng& rng)
    : small_(2, 1, 3, rng, ConvSpec{2, PadMode::zero}),
      large_(2, 1, 3, rng, ConvSpec{4, PadMode::zero}),
      fuse_(2, 1, 1, rng) {}

template <typename T>
Var<T> Msfe<T>::forward(const Var<T>& f_base) const {
  check(f_base.shape().c == 2, ErrorKind::shape, "msfe: expects the 2-channel spatial base");
  return fuse_.forward(concat_channels<T>({small_.forward(f_base), large_.forward(f_base)}));
}

template <typename T>
void Msfe<T>::collect(ParamCollector<T>& out, const std::string& prefix) {
  small_.collect(out, prefix + ".small");
  large_.collect(out, prefix + ".large");
  fuse_.collect(out, prefix + ".fuse");
}

template <typename T>
Lce<T>::Lce(Rng& rng) : conv1_(1, kHidden, 3, rng), bn_(kHidden), conv2_(kHidden, 1, 3, rng) {}

template <typename T>
Var<T> Lce<T>::forward(const Var<T>& f_max, bool training) {
  check(f_max.shape().c == 1, ErrorKind::shape, "lce: expects a 1-channel map");
  const Var<T> contrast = abs(sub(f_max, avg_pool3x3(f_max)));
  return conv2_.forward(relu(bn_.forward(conv1_.forward(contrast), training)));
}

template <typename T>
void Lce<T>::collect(ParamCollector<T>& out, const std::string& prefix) {
  conv1_.collect(out, prefix + ".conv1");
  bn_.collect(out, prefix + ".bn");
  conv2_.collect(out, prefix + ".conv2");
}

template <typename T>
Dcpan<T>::Dcpan(Rng& rng) : msfe_(rng), lce_(rng) {}

template <typename T>
DcpanTrace<T> Dcpan<T>::trace(const Var<T>& x, bool training) {
  DcpanTrace<T> t;
  t.f_base = sa_encode(x);
  t.f_msfe = msfe_.forward(t.f_base);
  t.f_lce = lce_.forward(channel_max(x), training);
  t.weight = sigmoid(add(t.f_msfe, t.f_lce));
  t.output = mul_channel_broadcast(t.weight, x);
  return t;
}

template <typename T>
void Dcpan<T>::collect(ParamCollector<T>& out, const std::string& prefix) {
  msfe_.collect(out, prefix + ".msfe");
  lce_.collect(out, prefix + ".lce");
}

#define INSTANTIATE(T)                         \
  template Var<T> sa_encode(const Var<T>&);    \
  template class Msfe<T>;                      \
  template class Lce<T>;                       \
  template class Dcpan<T>;
CROWDLOC_INSTANTIATE_FT(INSTANTIATE)
#undef INSTANTIATE

}  // namespace crowdloc::nn
