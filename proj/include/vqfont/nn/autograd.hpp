#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "vqfont/nn/tensor.hpp"

namespace vqfont::nn {

struct Node;
using Var = std::shared_ptr<Node>;

// One value in the reverse-mode tape. Ops build Nodes eagerly; backward()
// runs the recorded closures in reverse topological order.
struct Node {
  Tensor value;
  Tensor grad;  // lazily allocated, same shape as value
  bool requires_grad = false;
  std::string name;
  std::vector<Var> parents;
  std::function<void(Node&)> backprop;  // reads this->grad, accumulates into parents

  const Tensor& val() const { return value; }
  Tensor& ensure_grad();
  void accumulate_grad(const Tensor& g);
};

Var make_param(Tensor value, std::string name = "");
Var make_constant(Tensor value);

// Graph construction is disabled inside a NoGradGuard: ops still compute
// values but record no parents, so inference builds no tape.
bool grad_enabled();
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

// Backpropagates d(root)/d(leaf) into every reachable Node::grad.
// root must hold a single element.
void backward(const Var& root);

void zero_grad(const std::vector<Var>& params);

}  // namespace vqfont::nn
