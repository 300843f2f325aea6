#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace dage {

struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;  // row-major

  Tensor() = default;
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);  // throws ShapeMismatch
  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor vector(std::vector<double> data);
  std::size_t size() const noexcept { return data.size(); }
  std::size_t rows() const { return shape.size() == 2 ? shape[0] : 1; }
  std::size_t cols() const { return shape.empty() ? 1 : shape.back(); }
};

// Learnable array. grad accumulates across backward calls until zeroed.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string name, Tensor value);
  void zero_grad();
};

class Tape;

struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;

  std::span<const double> value() const;
  double item() const;  // scalar value, throws ShapeMismatch otherwise
  std::size_t size() const;
};

enum class Op : std::uint8_t {
  Leaf, Param, ParamRow,
  Add, Sub, Mul, Div, Scale, AddScalar, MatVec, Concat, Slice, Sum,
  Min, Max, Abs, Relu, Sigmoid, LogSigmoid, Softplus, Log, Exp, Sin, Cos, Atan2,
  Clamp, Reciprocal, Stack, Row, Softmax, Digamma, Lgamma, WrapAngle,
};

// Arena tape: one per training step or evaluation, confined to one thread.
// Shapes are 1-d vectors or 2-d [rows, cols] matrices.
class Tape {
 public:
  Var constant(const Tensor& t);
  Var constant(std::span<const double> v);
  Var scalar(double x);
  // Leaf whose gradient is read back with grad(); used by grad_check.
  Var variable(const Tensor& t);
  Var param(Parameter& p);
  Var param_row(Parameter& p, std::size_t row);

  // Accumulates d loss / d leaf into Parameter::grad and keeps all node
  // gradients readable through grad() until the next clear().
  void backward(Var loss);
  std::span<const double> grad(Var v) const;
  std::span<const double> value(Var v) const;
  std::vector<std::size_t> shape(Var v) const;

  void clear();
  std::size_t size() const noexcept { return nodes_.size(); }

  // Branch tracking: every piecewise primitive folds its branch choice into a
  // signature, so two evaluations on either side of a kink differ.
  void track_branches(bool on) { track_ = on; }
  std::uint64_t branch_signature() const noexcept { return signature_; }
  void note_branch(std::uint64_t choice);

  // Testing hook: corrupts the sigmoid gradient so failure paths can be seen.
  static void inject_fault(bool on);

 private:
  friend struct TapeAccess;

  struct Node {
    Op op;
    std::uint32_t a = 0, b = 0;
    std::uint32_t offset = 0, count = 0;  // value slice in the arena
    std::uint32_t rows = 0, cols = 0;     // rows == 0 for 1-d
    std::uint32_t list = 0, list_len = 0;
    double s1 = 0.0, s2 = 0.0;
    Parameter* param = nullptr;
  };

  std::uint32_t push(Node n);
  double* val(std::uint32_t id) { return values_.data() + nodes_[id].offset; }
  const double* val(std::uint32_t id) const { return values_.data() + nodes_[id].offset; }

  std::vector<Node> nodes_;
  std::vector<double> values_;
  std::vector<double> grads_;
  std::vector<std::uint32_t> lists_;
  std::unordered_map<const Parameter*, std::uint32_t> param_ids_;  // whole-parameter leaves are shared
  bool track_ = false;
  std::uint64_t signature_ = 0;
};

Var add(Var a, Var b);  // size-1 operands broadcast in all binary ops
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var neg(Var a);
Var matvec(Var w, Var x);  // [m,n] x [n] -> [m]
Var concat(const std::vector<Var>& parts);
Var slice(Var a, std::size_t begin, std::size_t length);
Var sum(Var a);
Var mean(Var a);
Var min(Var a, Var b);  // ties pick a
Var max(Var a, Var b);  // ties pick a
Var abs(Var a);         // subgradient -1 at 0
Var relu(Var a);        // subgradient 0 at 0
Var sigmoid(Var a);
Var log_sigmoid(Var a);
Var softplus(Var a, double beta = 1.0);
Var log(Var a);  // DomainError for non-positive input
Var exp(Var a);
Var sin(Var a);
Var cos(Var a);
Var atan2(Var y, Var x);
Var clamp(Var a, double lo, double hi);
Var reciprocal(Var a);
Var stack(const std::vector<Var>& rows);  // k vectors of length d -> [k,d]
Var row(Var m, std::size_t i);
Var softmax(Var m, std::size_t axis);  // 1-d: axis 0; 2-d: axis 0 or 1
Var digamma(Var a);
Var lgamma(Var a);
// Wraps into [-pi, pi); gradient passes straight through.
Var wrap_angle(Var a);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator*(double s, Var a) { return scale(a, s); }

}  // namespace dage
