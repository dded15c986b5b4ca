#include "crowdloc/nn/autograd.hpp"

#include <unordered_set>

#include "crowdloc/common/error.hpp"

namespace crowdloc::nn {

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() noexcept { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

template <typename T>
Var<T>::Var(Tensor<T> value, bool requires_grad) : node_(std::make_shared<Node<T>>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

template <typename T>
void Var<T>::zero_grad() {
  if (node_ && !node_->grad.empty()) node_->grad.fill(T(0));
}

template <typename T>
Var<T> make_result(Tensor<T> value, std::vector<Var<T>> inputs,
                   std::function<void(Node<T>&)> backward) {
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  if (g_grad_enabled) {
    bool any = false;
    for (const auto& in : inputs) any = any || in.requires_grad();
    if (any) {
      node->requires_grad = true;
      node->inputs.reserve(inputs.size());
      for (auto& in : inputs) node->inputs.push_back(in.node());
      node->backward = std::move(backward);
    }
  }
  return Var<T>(std::move(node));
}

template <typename T>
void backward(const Var<T>& root, const Tensor<T>& seed) {
  check(root.defined(), ErrorKind::invalid_argument, "backward on undefined variable");
  check(seed.shape() == root.shape(), ErrorKind::shape, "backward seed shape mismatch");
  if (!root.requires_grad()) return;

  // Iterative post-order DFS gives a topological order.
  // Owning order: the sweep clears input links, which may drop the last reference.
  std::vector<std::shared_ptr<Node<T>>> order;
  std::unordered_set<Node<T>*> visited;
  std::vector<std::pair<std::shared_ptr<Node<T>>, std::size_t>> stack;
  stack.emplace_back(root.node(), 0);
  visited.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      const std::shared_ptr<Node<T>> child = node->inputs[next++];
      if (child->requires_grad && child->backward && visited.insert(child.get()).second) {
        stack.emplace_back(child, 0);
      }
    } else {
      order.push_back(std::move(node));
      stack.pop_back();
    }
  }

  Tensor<T>& g = root.node()->grad_buffer();
  for (std::size_t i = 0; i < g.numel(); ++i) g[i] += seed[i];

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* node = it->get();
    if (node->backward && !node->grad.empty()) node->backward(*node);
    node->backward = nullptr;
    node->inputs.clear();
    if (node != root.node().get()) node->grad = Tensor<T>();
  }
}

template <typename T>
void backward(const Var<T>& root) {
  backward(root, Tensor<T>(root.shape(), T(1)));
}

template class Var<float>;
template class Var<double>;
template Var<float> make_result(Tensor<float>, std::vector<Var<float>>,
                                std::function<void(Node<float>&)>);
template Var<double> make_result(Tensor<double>, std::vector<Var<double>>,
                                 std::function<void(Node<double>&)>);
template void backward(const Var<float>&);
template void backward(const Var<double>&);
template void backward(const Var<float>&, const Tensor<float>&);
template void backward(const Var<double>&, const Tensor<double>&);

}  // namespace crowdloc::nn
