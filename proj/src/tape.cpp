#include "e2e/ad/tape.hpp"

#include <string>

namespace e2e::ad {

GradSlot::GradSlot(RealVector initial, std::string name)
    : value(std::move(initial)), grad(RealVector::Zero(value.size())), name_(std::move(name)) {}

Real Tape::constant(RealVector value, std::string_view kind) {
  Node node;
  node.kind = kind;
  node.rvalue = std::move(value);
  nodes_.push_back(std::move(node));
  return {nodes_.size() - 1};
}

Cplx Tape::constant(ComplexVector value, std::string_view kind) {
  Node node;
  node.kind = kind;
  node.is_complex = true;
  node.cvalue = std::move(value);
  nodes_.push_back(std::move(node));
  return {nodes_.size() - 1};
}

Real Tape::parameter(GradSlot& slot) {
  if (slot.grad.size() != slot.value.size()) slot.zero_grad();
  Node node;
  node.kind = "parameter";
  node.rvalue = slot.value;
  node.requires_grad = recording_;
  node.slot = &slot;
  nodes_.push_back(std::move(node));
  return {nodes_.size() - 1};
}

bool Tape::any_requires_grad(std::initializer_list<std::size_t> inputs) const {
  for (std::size_t id : inputs) {
    if (nodes_.at(id).requires_grad) return true;
  }
  return false;
}

Real Tape::record(std::string_view kind, RealVector value, std::initializer_list<std::size_t> inputs,
                  Adjoint adjoint) {
  Node node;
  node.kind = kind;
  node.rvalue = std::move(value);
  if (recording_ && any_requires_grad(inputs)) {
    node.requires_grad = true;
    node.inputs.assign(inputs);
    node.adjoint = std::move(adjoint);
  }
  nodes_.push_back(std::move(node));
  return {nodes_.size() - 1};
}

Cplx Tape::record(std::string_view kind, ComplexVector value, std::initializer_list<std::size_t> inputs,
                  Adjoint adjoint) {
  Node node;
  node.kind = kind;
  node.is_complex = true;
  node.cvalue = std::move(value);
  if (recording_ && any_requires_grad(inputs)) {
    node.requires_grad = true;
    node.inputs.assign(inputs);
    node.adjoint = std::move(adjoint);
  }
  nodes_.push_back(std::move(node));
  return {nodes_.size() - 1};
}

void Tape::accumulate(std::size_t id, const RealVector& g) {
  Node& node = nodes_[id];
  if (!node.requires_grad) return;
  if (node.is_complex) {
    accumulate(id, ComplexVector(g.cast<Complex>()));
    return;
  }
  if (node.rgrad.size() == 0) {
    node.rgrad = g;
  } else {
    node.rgrad += g;
  }
}

void Tape::accumulate(std::size_t id, const ComplexVector& g) {
  Node& node = nodes_[id];
  if (!node.requires_grad) return;
  if (!node.is_complex) {
    // A real node only sees the real part of a complex adjoint.
    accumulate(id, RealVector(g.real()));
    return;
  }
  if (node.cgrad.size() == 0) {
    node.cgrad = g;
  } else {
    node.cgrad += g;
  }
}

void Tape::backward(Real loss) {
  Node& root = nodes_.at(loss.id);
  if (root.is_complex || root.rvalue.size() != 1) {
    throw ContractError("backward() needs a scalar real loss");
  }
  if (root.requires_grad) root.rgrad = RealVector::Ones(1);

  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& node = nodes_[i];
    const bool has_grad = node.is_complex ? node.cgrad.size() > 0 : node.rgrad.size() > 0;
    if (!node.requires_grad || !has_grad) continue;
    if (node.slot != nullptr) {
      node.slot->grad += node.rgrad;
      continue;
    }
    if (node.adjoint) {
      node.adjoint(*this, i);
      for (std::size_t in : node.inputs) {
        const Node& input = nodes_[in];
        const bool nan = input.is_complex ? input.cgrad.hasNaN() : input.rgrad.hasNaN();
        if (nan) {
          throw AdjointError("NaN in adjoint of node #" + std::to_string(i) + " (" + std::string(node.kind) + ")");
        }
      }
    }
  }
  nodes_.clear();
}

}  // namespace e2e::ad
