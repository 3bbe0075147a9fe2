#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "imitant/tensor.hpp"

namespace imitant {

class Graph;

// Handle into a Graph's tape. Cheap to copy; valid for the graph's lifetime.
struct Var {
  Graph* graph = nullptr;
  int id = -1;

  bool valid() const { return graph != nullptr && id >= 0; }
  const Tensor& val() const;
  const Shape& shape() const { return val().shape(); }
  int rows() const { return val().rows(); }
  int cols() const { return val().cols(); }
};

// A named trainable array. The value persists across steps; grad is the
// accumulator the optimizer consumes and zeroes.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter(std::string name_, Tensor value_)
      : name(std::move(name_)), value(std::move(value_)), grad(value.shape()) {}

  void zero_grad() { grad.fill(0.0); }
};

// Ordered collection of parameters. Creation order is the canonical
// iteration order everywhere (optimizer, clipping, serialization), which
// keeps runs reproducible.
class ParamStore {
 public:
  Parameter& create(const std::string& name, Tensor value) {
    IMITANT_CHECK(index_.find(name) == index_.end(), "duplicate parameter name: ", name);
    params_.push_back(std::make_unique<Parameter>(name, std::move(value)));
    index_[name] = params_.size() - 1;
    return *params_.back();
  }

  bool has(const std::string& name) const { return index_.find(name) != index_.end(); }

  Parameter& get(const std::string& name) {
    auto it = index_.find(name);
    IMITANT_CHECK(it != index_.end(), "unknown parameter: ", name);
    return *params_[it->second];
  }

  const Parameter& get(const std::string& name) const {
    auto it = index_.find(name);
    IMITANT_CHECK(it != index_.end(), "unknown parameter: ", name);
    return *params_[it->second];
  }

  std::size_t size() const { return params_.size(); }
  Parameter& at(std::size_t i) { return *params_[i]; }
  const Parameter& at(std::size_t i) const { return *params_[i]; }

  void zero_grads() {
    for (auto& p : params_) p->zero_grad();
  }

  std::int64_t total_numel() const {
    std::int64_t n = 0;
    for (const auto& p : params_) n += p->value.numel();
    return n;
  }

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::map<std::string, std::size_t> index_;
};

// Reverse-mode tape over dense tensors. Nodes are appended in forward
// (topological) order; backward() replays the tape once in reverse, so each
// node's rule fires exactly once. One graph serves one forward pass and is
// owned by a single thread; concurrent graphs over shared read-only
// parameters are safe because leasing copies parameter values in.
class Graph {
 public:
  struct Node {
    Tensor value;
    Tensor grad;  // allocated on demand during backward
    bool requires_grad = false;
    bool grad_ready = false;
    std::function<void(Graph&, int)> backward;  // (graph, own id); empty for leaves
  };

  explicit Graph(bool grad_enabled = true) : grad_enabled_(grad_enabled) {
    nodes_.reserve(256);
  }

  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool grad_enabled() const { return grad_enabled_; }

  // Every primitive must leave only finite values behind; the check lives
  // here so a single NaN/Inf is caught at the op that produced it.
  Var emplace(Tensor value, bool requires_grad, std::function<void(Graph&, int)> backward,
              const char* op_name) {
    if (!value.all_finite()) {
      fail("non-finite values produced by op '", op_name, "' with output shape ",
           shape_str(value.shape()));
    }
    Node n;
    n.value = std::move(value);
    n.requires_grad = grad_enabled_ && requires_grad;
    if (n.requires_grad) n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return Var{this, static_cast<int>(nodes_.size()) - 1};
  }

  // Constant input; never receives gradient.
  Var constant(Tensor value) { return emplace(std::move(value), false, nullptr, "constant"); }

  // Differentiable input owned by the caller (tests, gradcheck).
  Var input(Tensor value) { return emplace(std::move(value), true, nullptr, "input"); }

  // Lease a parameter into this graph. The value is copied; after
  // backward(), collect_param_grads() adds the leaf gradients back into each
  // Parameter::grad.
  Var param(Parameter& p) {
    Var v = emplace(p.value, grad_enabled_, nullptr, "param");
    if (grad_enabled_) leases_.emplace_back(&p, v.id);
    return v;
  }

  const Tensor& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  const Tensor& value(Var v) const { return value(v.id); }

  bool requires_grad(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].requires_grad; }

  // Gradient accumulator for a node, allocated (zeroed) on first touch.
  Tensor& grad(int id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.grad_ready) {
      n.grad = Tensor(n.value.shape());
      n.grad_ready = true;
    }
    return n.grad;
  }
  Tensor& grad(Var v) { return grad(v.id); }

  bool has_grad(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].grad_ready; }

  // Reverse sweep from a scalar loss. Each tape entry is visited exactly
  // once, in reverse creation order.
  void backward(Var loss) {
    IMITANT_CHECK(grad_enabled_, "backward() on a no-grad graph");
    IMITANT_CHECK(loss.graph == this, "loss var belongs to another graph");
    IMITANT_CHECK(value(loss).numel() == 1, "backward() requires a scalar loss, got shape ",
                  shape_str(value(loss).shape()));
    IMITANT_CHECK(!backward_done_, "backward() may run once per graph");
    backward_done_ = true;
    grad(loss).fill(1.0);
    for (int id = loss.id; id >= 0; --id) {
      Node& n = nodes_[static_cast<std::size_t>(id)];
      if (!n.requires_grad || !n.grad_ready || !n.backward) continue;
      n.backward(*this, id);
      if (!n.grad.all_finite()) {
        fail("non-finite gradient at tape node ", id, " with shape ", shape_str(n.value.shape()));
      }
    }
  }

  void collect_param_grads() {
    for (auto& [p, id] : leases_) {
      if (nodes_[static_cast<std::size_t>(id)].grad_ready) {
        p->grad.add_(nodes_[static_cast<std::size_t>(id)].grad);
      }
    }
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  std::vector<Node> nodes_;
  std::vector<std::pair<Parameter*, int>> leases_;
  bool grad_enabled_ = true;
  bool backward_done_ = false;
};

inline const Tensor& Var::val() const { return graph->value(id); }

}  // namespace imitant
