#pragma once

#include <cstdint>
#include <vector>

#include "crowdloc/nn/layers.hpp"

namespace crowdloc::nn {

struct AdamOptions {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-3;  // L2 term added to the gradient
};

template <typename T>
class Adam {
 public:
  Adam(const ParamCollector<T>& params, AdamOptions options);

  void zero_grad();
  void step();

  const AdamOptions& options() const noexcept { return options_; }
  std::int64_t steps() const noexcept { return steps_; }

  // Moment buffers in parameter order, for checkpointing.
  std::vector<Tensor<T>>& first_moments() { return m_; }
  std::vector<Tensor<T>>& second_moments() { return v_; }
  void set_steps(std::int64_t steps) { steps_ = steps; }

 private:
  std::vector<Var<T>*> params_;
  std::vector<Tensor<T>> m_;
  std::vector<Tensor<T>> v_;
  AdamOptions options_;
  std::int64_t steps_ = 0;
};

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace crowdloc::nn
