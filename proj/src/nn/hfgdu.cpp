#include "crowdloc/nn/hfgdu.hpp"

#include "crowdloc/common/error.hpp"
#include "instantiate.hpp"

namespace crowdloc::nn {

template <typename T>
Hfgdu<T>::Hfgdu(int channels, Rng& rng)
    : channels_(channels),
      res1_(channels, channels, 3, rng),
      res2_(channels, channels, 3, rng),
      res3_(channels, channels, 3, rng),
      res4_(channels, channels, 3, rng, {}, true, true),
      offset1_(2 * channels, channels, 3, rng),
      offset2_(channels, 18, 3, rng),
      deform_(channels, channels, 3, rng),
      gate_(2 * channels, channels, 1, rng, {}, true, true) {
  Tensor<T> hp(Shape{channels, 1, 3, 3}, T(-0.125));
  for (int c = 0; c < channels; ++c) hp.at(c, 0, 1, 1) = T(1);
  high_pass_ = Var<T>(std::move(hp), true);
}

template <typename T>
HfgduTrace<T> Hfgdu<T>::trace(const Var<T>& coarse, const Var<T>& fine) {
  const Shape cs = coarse.shape();
  const Shape fs = fine.shape();
  check(cs.n == fs.n && cs.c == channels_ && fs.c == channels_ && fs.h == 2 * cs.h &&
            fs.w == 2 * cs.w,
        ErrorKind::shape,
        "hfgdu: coarse " + cs.str() + " and fine " + fs.str() +
            " must share batch and channels, with fine exactly 2x larger");
  HfgduTrace<T> t;
  t.up = upsample_bilinear2x(coarse);
  t.hf = depthwise_conv2d(t.up, high_pass_, ConvSpec{1, PadMode::replicate});
  Var<T> r = res1_.forward(t.hf);
  r = relu(res2_.forward(r));
  r = relu(res3_.forward(r));
  t.comp = sigmoid(res4_.forward(r));
  t.hfdc = mul(t.up, add_scalar(t.comp, T(1)));
  const Var<T> joint = concat_channels<T>({t.hfdc, fine});
  t.offset = offset2_.forward(relu(offset1_.forward(joint)));
  t.aligned = deform_conv2d(t.hfdc, t.offset, deform_.weight(), deform_.bias());
  t.gate = sigmoid(gate_.forward(joint));
  t.output = add(mul(t.gate, t.aligned), fine);
  return t;
}

template <typename T>
void Hfgdu<T>::collect(ParamCollector<T>& out, const std::string& prefix) {
  out.param(prefix + ".high_pass", high_pass_);
  res1_.collect(out, prefix + ".res1");
  res2_.collect(out, prefix + ".res2");
  res3_.collect(out, prefix + ".res3");
  res4_.collect(out, prefix + ".res4");
  offset1_.collect(out, prefix + ".offset1");
  offset2_.collect(out, prefix + ".offset2");
  deform_.collect(out, prefix + ".deform");
  gate_.collect(out, prefix + ".gate");
}

#define INSTANTIATE(T) template class Hfgdu<T>;
CROWDLOC_INSTANTIATE_FT(INSTANTIATE)
#undef INSTANTIATE

}  // namespace crowdloc::nn
