#pragma once

#include "crowdloc/nn/layers.hpp"

namespace crowdloc::nn {

template <typename T>
struct HfgduTrace {
  Var<T> up;       // bilinear x2 of the coarse map
  Var<T> hf;       // learnable high-pass response
  Var<T> comp;     // residual compensation in (0, 1)
  Var<T> hfdc;     // up * (1 + comp)
  Var<T> offset;   // per-tap (dy, dx), N x 18 x H x W
  Var<T> aligned;  // deformable conv of hfdc
  Var<T> gate;     // modulation gate in (0, 1)
  Var<T> output;   // gate * aligned + fine
};

// High-frequency guided deformable x2 upsampler fusing a coarse map into a fine one.
template <typename T>
class Hfgdu {
 public:
  Hfgdu() = default;
  Hfgdu(int channels, Rng& rng);

  Var<T> forward(const Var<T>& coarse, const Var<T>& fine) { return trace(coarse, fine).output; }
  HfgduTrace<T> trace(const Var<T>& coarse, const Var<T>& fine);
  void collect(ParamCollector<T>& out, const std::string& prefix);

  Var<T>& high_pass() { return high_pass_; }

 private:
  int channels_ = 0;
  Var<T> high_pass_;  // C x 1 x 3 x 3 depthwise, replicate padding
  Conv2d<T> res1_;
  Conv2d<T> res2_;
  Conv2d<T> res3_;
  Conv2d<T> res4_;
  Conv2d<T> offset1_;
  Conv2d<T> offset2_;
  Conv2d<T> deform_;  // weights consumed by deform_conv2d
  Conv2d<T> gate_;
};

}  // namespace crowdloc::nn
