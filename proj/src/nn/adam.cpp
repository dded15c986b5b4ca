#include "crowdloc/nn/adam.hpp"

#include <cmath>

#include "instantiate.hpp"

namespace crowdloc::nn {

template <typename T>
Adam<T>::Adam(const ParamCollector<T>& params, AdamOptions options) : options_(options) {
  for (const auto& p : params.params()) {
    params_.push_back(p.var);
    m_.emplace_back(p.var->shape());
    v_.emplace_back(p.var->shape());
  }
}

template <typename T>
void Adam<T>::zero_grad() {
  for (auto* p : params_) p->zero_grad();
}

template <typename T>
void Adam<T>::step() {
  ++steps_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, double(steps_));
  const double c2 = 1.0 - std::pow(b2, double(steps_));
  const double lr = options_.lr;
  const double wd = options_.weight_decay;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Var<T>& p = *params_[k];
    const Tensor<T>& g = p.grad();
    if (g.empty()) continue;  // unused this step
    Tensor<T>& value = p.mutable_value();
    Tensor<T>& m = m_[k];
    Tensor<T>& v = v_[k];
    for (std::size_t i = 0; i < value.numel(); ++i) {
      const double grad = double(g[i]) + wd * double(value[i]);
      m[i] = T(b1 * m[i] + (1.0 - b1) * grad);
      v[i] = T(b2 * v[i] + (1.0 - b2) * grad * grad);
      const double update = (double(m[i]) / c1) / (std::sqrt(double(v[i]) / c2) + options_.eps);
      value[i] = T(double(value[i]) - lr * update);
    }
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace crowdloc::nn
