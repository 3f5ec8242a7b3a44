#include "vqfont/nn/autograd.hpp"

#include <unordered_set>

namespace vqfont::nn {

namespace {
thread_local bool g_grad_enabled = true;
}

Tensor& Node::ensure_grad() {
  if (!grad.defined()) grad = Tensor::zeros(value.shape());
  return grad;
}

void Node::accumulate_grad(const Tensor& g) {
  ensure_grad().add_(g);
}

Var make_param(Tensor value, std::string name) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  n->name = std::move(name);
  return n;
}

Var make_constant(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = false;
  return n;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

void backward(const Var& root) {
  VQF_REQUIRE(root != nullptr, "backward on null Var");
  VQF_REQUIRE(root->value.numel() == 1, "backward root must be scalar, got " << root->value.shape_str());

  // Iterative post-order DFS; order holds children before parents.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.emplace_back(root.get(), 0);
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      Node* parent = node->parents[idx].get();
      ++idx;
      if (parent->requires_grad && seen.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root->ensure_grad().fill(1.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backprop && n->grad.defined()) n->backprop(*n);
  }
}

void zero_grad(const std::vector<Var>& params) {
  for (const auto& p : params) {
    if (p->grad.defined()) p->grad.zero();
  }
}

}  // namespace vqfont::nn
