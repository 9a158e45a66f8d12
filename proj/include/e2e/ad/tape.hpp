#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "e2e/types.hpp"

namespace e2e::ad {

/// A trainable parameter vector and its gradient accumulator.
class GradSlot {
 public:
  GradSlot() = default;
  explicit GradSlot(RealVector initial, std::string name = {});

  RealVector value;
  RealVector grad;

  const std::string& name() const { return name_; }
  void zero_grad() { grad.setZero(value.size()); }

 private:
  std::string name_;
};

// Typed handles into a tape. Complex gradients follow the convention
// g = dL/dRe + i dL/dIm, so a complex-linear map M has adjoint M^H.
struct Real {
  std::size_t id = 0;
};
struct Cplx {
  std::size_t id = 0;
};

class AdjointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Records a forward computation as a list of nodes in topological order.
/// Ops are free functions (see ops.hpp) that push nodes through record().
/// A non-recording tape keeps values only, for evaluation passes.
class Tape {
 public:
  using Adjoint = std::function<void(Tape&, std::size_t self)>;

  explicit Tape(bool recording = true) : recording_(recording) {}

  bool recording() const { return recording_; }
  std::size_t size() const { return nodes_.size(); }

  Real constant(RealVector value, std::string_view kind = "constant");
  Cplx constant(ComplexVector value, std::string_view kind = "constant");
  /// Leaf bound to a parameter; backward() adds into slot.grad.
  Real parameter(GradSlot& slot);

  const RealVector& value(Real h) const { return nodes_.at(h.id).rvalue; }
  const ComplexVector& value(Cplx h) const { return nodes_.at(h.id).cvalue; }
  bool requires_grad(Real h) const { return nodes_.at(h.id).requires_grad; }
  bool requires_grad(Cplx h) const { return nodes_.at(h.id).requires_grad; }

  /// Pushes an op output. The adjoint is kept only if recording and at least
  /// one input requires a gradient.
  Real record(std::string_view kind, RealVector value, std::initializer_list<std::size_t> inputs, Adjoint adjoint);
  Cplx record(std::string_view kind, ComplexVector value, std::initializer_list<std::size_t> inputs, Adjoint adjoint);

  // Accessors for adjoint implementations.
  const RealVector& grad_real(std::size_t id) const { return nodes_[id].rgrad; }
  const ComplexVector& grad_complex(std::size_t id) const { return nodes_[id].cgrad; }
  const RealVector& value_real(std::size_t id) const { return nodes_[id].rvalue; }
  const ComplexVector& value_complex(std::size_t id) const { return nodes_[id].cvalue; }
  bool needs(std::size_t id) const { return nodes_[id].requires_grad; }
  void accumulate(std::size_t id, const RealVector& g);
  void accumulate(std::size_t id, const ComplexVector& g);

  /// Reverse sweep from a scalar loss. Each node is visited once; parameter
  /// slots receive dL/dvalue and all intermediate storage is released.
  void backward(Real loss);

 private:
  struct Node {
    std::string_view kind;
    bool is_complex = false;
    bool requires_grad = false;
    RealVector rvalue;
    ComplexVector cvalue;
    RealVector rgrad;
    ComplexVector cgrad;
    GradSlot* slot = nullptr;
    std::vector<std::size_t> inputs;
    Adjoint adjoint;
  };

  bool any_requires_grad(std::initializer_list<std::size_t> inputs) const;

  bool recording_;
  std::vector<Node> nodes_;
};

}  // namespace e2e::ad
