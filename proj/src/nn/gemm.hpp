#pragma once

#include <Eigen/Core>

namespace crowdloc::nn::detail {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
using MatrixView = Eigen::Map<RowMatrix<T>, Eigen::Unaligned, Eigen::OuterStride<>>;

template <typename T>
using ConstMatrixView = Eigen::Map<const RowMatrix<T>, Eigen::Unaligned, Eigen::OuterStride<>>;

template <typename T>
MatrixView<T> view(T* data, Eigen::Index rows, Eigen::Index cols, Eigen::Index stride) {
  return MatrixView<T>(data, rows, cols, Eigen::OuterStride<>(stride));
}

template <typename T>
ConstMatrixView<T> view(const T* data, Eigen::Index rows, Eigen::Index cols, Eigen::Index stride) {
  return ConstMatrixView<T>(data, rows, cols, Eigen::OuterStride<>(stride));
}

// Column-buffer budget (elements) for chunked im2col.
inline constexpr std::size_t kColumnBudget = std::size_t(1) << 22;

}  // namespace crowdloc::nn::detail
