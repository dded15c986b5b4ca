#pragma once

#include "crowdloc/nn/layers.hpp"

namespace crowdloc::nn {

// Spatial-attention encoding: channel 0 = max over channels, channel 1 = mean.
template <typename T>
Var<T> sa_encode(const Var<T>& x);

// Multi-scale branch: dilation-2 and dilation-4 3x3 convs on the 2-channel base,
// concatenated and fused to one channel by a 1x1 conv.
template <typename T>
class Msfe {
 public:
  Msfe() = default;
  explicit Msfe(Rng& rng);

  Var<T> forward(const Var<T>& f_base) const;
  void collect(ParamCollector<T>& out, const std::string& prefix);

  Conv2d<T>& small() { return small_; }
  Conv2d<T>& large() { return large_; }
  Conv2d<T>& fuse() { return fuse_; }

 private:
  Conv2d<T> small_;
  Conv2d<T> large_;
  Conv2d<T> fuse_;
};

// Local-contrast branch: conv-bn-relu-conv applied to |f_max - avgpool3x3(f_max)|.
template <typename T>
class Lce {
 public:
  static constexpr int kHidden = 8;

  Lce() = default;
  explicit Lce(Rng& rng);

  Var<T> forward(const Var<T>& f_max, bool training);
  void collect(ParamCollector<T>& out, const std::string& prefix);

 private:
  Conv2d<T> conv1_;
  BatchNorm2d<T> bn_;
  Conv2d<T> conv2_;
};

template <typename T>
struct DcpanTrace {
  Var<T> f_base;
  Var<T> f_msfe;
  Var<T> f_lce;
  Var<T> weight;  // F_w = sigmoid(F_msfe + F_lce)
  Var<T> output;  // F_w * x
};

// Dual-context attention gate applied after the residual stem.
template <typename T>
class Dcpan {
 public:
  Dcpan() = default;
  explicit Dcpan(Rng& rng);

  Var<T> forward(const Var<T>& x, bool training) { return trace(x, training).output; }
  DcpanTrace<T> trace(const Var<T>& x, bool training);
  void collect(ParamCollector<T>& out, const std::string& prefix);

  Msfe<T>& msfe() { return msfe_; }
  Lce<T>& lce() { return lce_; }

 private:
  Msfe<T> msfe_;
  Lce<T> lce_;
};

}  // namespace crowdloc::nn
