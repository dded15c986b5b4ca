#include "crowdloc/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "crowdloc/common/error.hpp"

namespace crowdloc::nn {

std::string Shape::str() const {
  std::ostringstream out;
  out << n << "x" << c << "x" << h << "x" << w;
  return out.str();
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
  check(data_.size() == shape_.numel(), ErrorKind::shape,
        "tensor data size does not match shape " + shape_.str());
}

template <typename T>
void Tensor<T>::fill(T value) {
  std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
bool Tensor<T>::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace crowdloc::nn
