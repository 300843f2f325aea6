#include "dage/autodiff.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>

#include "dage/error.hpp"
#include "dage/special_functions.hpp"

namespace dage {

namespace {

std::atomic<bool> g_fault{false};

std::size_t product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow.
double log1pexp(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
  if (shape.empty() || shape.size() > 2 || product(shape) != data.size())
    throw ShapeMismatch("tensor data does not match its shape");
}

Tensor Tensor::zeros(std::vector<std::size_t> s) {
  const std::size_t n = product(s);
  return Tensor(std::move(s), std::vector<double>(n, 0.0));
}

Tensor Tensor::vector(std::vector<double> d) {
  const std::size_t n = d.size();
  return Tensor({n}, std::move(d));
}

Parameter::Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)) {
  grad = Tensor::zeros(value.shape);
}

void Parameter::zero_grad() { std::fill(grad.data.begin(), grad.data.end(), 0.0); }

std::span<const double> Var::value() const { return tape->value(*this); }

double Var::item() const {
  auto v = value();
  if (v.size() != 1) throw ShapeMismatch("item() on a tensor of size " + std::to_string(v.size()));
  return v[0];
}

std::size_t Var::size() const { return value().size(); }

struct TapeAccess {
  using Node = Tape::Node;

  static Node& node(Var v) { return v.tape->nodes_[v.id]; }
  static const double* in(Var v) { return v.tape->val(v.id); }

  // Appends a node with a fresh value slice; returns its id. Input pointers
  // must be fetched after this call because the arena may move.
  static Var make(Tape& t, Op op, std::uint32_t rows, std::uint32_t cols, Var a = {}, Var b = {},
                  double s1 = 0.0, double s2 = 0.0) {
    Node n;
    n.op = op;
    n.a = a.id;
    n.b = b.id;
    n.rows = rows;
    n.cols = cols;
    n.count = rows == 0 ? cols : rows * cols;
    n.s1 = s1;
    n.s2 = s2;
    return Var{&t, t.push(n)};
  }

  static double* out(Var v) { return v.tape->val(v.id); }
  static bool tracking(const Tape& t) { return t.track_; }
  static void note(Tape& t, std::uint64_t c) { t.signature_ = mix(t.signature_, c); }
  static std::uint32_t add_list(Tape& t, const std::vector<Var>& vs) {
    const auto at = static_cast<std::uint32_t>(t.lists_.size());
    for (const Var& v : vs) t.lists_.push_back(v.id);
    return at;
  }
  static Tape::Node& raw(Tape& t, std::uint32_t id) { return t.nodes_[id]; }
};

namespace {

using TA = TapeAccess;

void same_tape(Var a, Var b) {
  if (a.tape == nullptr || a.tape != b.tape) throw ShapeMismatch("operands live on different tapes");
}

std::uint32_t count_of(Var v) { return TA::node(v).count; }

// Output shape for elementwise binary ops with size-1 broadcasting.
std::pair<std::uint32_t, std::uint32_t> broadcast(Var a, Var b, const char* op) {
  same_tape(a, b);
  const auto& na = TA::node(a);
  const auto& nb = TA::node(b);
  if (na.count == nb.count) return {na.rows, na.cols};
  if (nb.count == 1) return {na.rows, na.cols};
  if (na.count == 1) return {nb.rows, nb.cols};
  throw ShapeMismatch(std::string(op) + ": sizes " + std::to_string(na.count) + " and " + std::to_string(nb.count));
}

template <class F>
Var binary(Op op, Var a, Var b, const char* name, F f) {
  auto [rows, cols] = broadcast(a, b, name);
  Var o = TA::make(*a.tape, op, rows, cols, a, b);
  const std::uint32_t n = count_of(o), na = count_of(a), nb = count_of(b);
  const double* x = TA::in(a);
  const double* y = TA::in(b);
  double* z = TA::out(o);
  for (std::uint32_t i = 0; i < n; ++i) z[i] = f(x[na == 1 ? 0 : i], y[nb == 1 ? 0 : i]);
  return o;
}

template <class F>
Var unary(Op op, Var a, F f, double s1 = 0.0, double s2 = 0.0) {
  const auto& na = TA::node(a);
  Var o = TA::make(*a.tape, op, na.rows, na.cols, a, {}, s1, s2);
  const std::uint32_t n = count_of(o);
  const double* x = TA::in(a);
  double* z = TA::out(o);
  for (std::uint32_t i = 0; i < n; ++i) z[i] = f(x[i]);
  return o;
}

}  // namespace

std::uint32_t Tape::push(Node n) {
  n.offset = static_cast<std::uint32_t>(values_.size());
  values_.resize(values_.size() + n.count, 0.0);
  nodes_.push_back(n);
  return static_cast<std::uint32_t>(nodes_.size() - 1);
}

void Tape::clear() {
  nodes_.clear();
  values_.clear();
  grads_.clear();
  lists_.clear();
  param_ids_.clear();
  signature_ = 0;
}

void Tape::note_branch(std::uint64_t choice) {
  if (track_) signature_ = mix(signature_, choice);
}

void Tape::inject_fault(bool on) { g_fault = on; }

Var Tape::constant(std::span<const double> v) {
  Var o = TA::make(*this, Op::Leaf, 0, static_cast<std::uint32_t>(v.size()));
  std::copy(v.begin(), v.end(), val(o.id));
  return o;
}

Var Tape::constant(const Tensor& t) {
  const auto rows = t.shape.size() == 2 ? static_cast<std::uint32_t>(t.shape[0]) : 0u;
  Var o = TA::make(*this, Op::Leaf, rows, static_cast<std::uint32_t>(t.cols()));
  std::copy(t.data.begin(), t.data.end(), val(o.id));
  return o;
}

Var Tape::scalar(double x) { return constant(std::span<const double>(&x, 1)); }

Var Tape::variable(const Tensor& t) { return constant(t); }

Var Tape::param(Parameter& p) {
  if (auto it = param_ids_.find(&p); it != param_ids_.end()) return Var{this, it->second};
  const auto rows = p.value.shape.size() == 2 ? static_cast<std::uint32_t>(p.value.shape[0]) : 0u;
  Var o = TA::make(*this, Op::Param, rows, static_cast<std::uint32_t>(p.value.cols()));
  nodes_[o.id].param = &p;
  std::copy(p.value.data.begin(), p.value.data.end(), val(o.id));
  param_ids_[&p] = o.id;
  return o;
}

Var Tape::param_row(Parameter& p, std::size_t r) {
  if (p.value.shape.size() != 2) throw ShapeMismatch("param_row needs a matrix parameter: " + p.name);
  if (r >= p.value.shape[0]) throw UnknownId(p.name + " row " + std::to_string(r));
  const std::size_t c = p.value.shape[1];
  Var o = TA::make(*this, Op::ParamRow, 0, static_cast<std::uint32_t>(c), {}, {}, static_cast<double>(r));
  nodes_[o.id].param = &p;
  std::copy_n(p.value.data.begin() + static_cast<long>(r * c), c, val(o.id));
  return o;
}

std::span<const double> Tape::value(Var v) const { return {val(v.id), nodes_[v.id].count}; }

std::span<const double> Tape::grad(Var v) const {
  if (grads_.size() != values_.size()) throw Error("InvalidState", "grad() before backward()");
  return {grads_.data() + nodes_[v.id].offset, nodes_[v.id].count};
}

std::vector<std::size_t> Tape::shape(Var v) const {
  const Node& n = nodes_[v.id];
  if (n.rows == 0) return {n.cols};
  return {n.rows, n.cols};
}

Var add(Var a, Var b) { return binary(Op::Add, a, b, "add", [](double x, double y) { return x + y; }); }
Var sub(Var a, Var b) { return binary(Op::Sub, a, b, "sub", [](double x, double y) { return x - y; }); }
Var mul(Var a, Var b) { return binary(Op::Mul, a, b, "mul", [](double x, double y) { return x * y; }); }
Var div(Var a, Var b) { return binary(Op::Div, a, b, "div", [](double x, double y) { return x / y; }); }

Var min(Var a, Var b) {
  Var o = binary(Op::Min, a, b, "min", [](double x, double y) { return x <= y ? x : y; });
  if (TA::tracking(*a.tape)) {
    const std::uint32_t n = count_of(o), na = count_of(a), nb = count_of(b);
    for (std::uint32_t i = 0; i < n; ++i) TA::note(*a.tape, TA::in(a)[na == 1 ? 0 : i] <= TA::in(b)[nb == 1 ? 0 : i]);
  }
  return o;
}

Var max(Var a, Var b) {
  Var o = binary(Op::Max, a, b, "max", [](double x, double y) { return x >= y ? x : y; });
  if (TA::tracking(*a.tape)) {
    const std::uint32_t n = count_of(o), na = count_of(a), nb = count_of(b);
    for (std::uint32_t i = 0; i < n; ++i) TA::note(*a.tape, TA::in(a)[na == 1 ? 0 : i] >= TA::in(b)[nb == 1 ? 0 : i]);
  }
  return o;
}

Var scale(Var a, double s) { return unary(Op::Scale, a, [s](double x) { return s * x; }, s); }
Var add_scalar(Var a, double s) { return unary(Op::AddScalar, a, [s](double x) { return x + s; }, s); }
Var neg(Var a) { return scale(a, -1.0); }

Var matvec(Var w, Var x) {
  same_tape(w, x);
  const auto& nw = TA::node(w);
  if (nw.rows == 0 || nw.cols != count_of(x))
    throw ShapeMismatch("matvec: [" + std::to_string(nw.rows) + "," + std::to_string(nw.cols) + "] x " +
                        std::to_string(count_of(x)));
  const std::uint32_t m = nw.rows, n = nw.cols;
  Var o = TA::make(*w.tape, Op::MatVec, 0, m, w, x);
  const double* W = TA::in(w);
  const double* v = TA::in(x);
  double* z = TA::out(o);
  for (std::uint32_t i = 0; i < m; ++i) {
    double acc = 0.0;
    for (std::uint32_t j = 0; j < n; ++j) acc += W[i * n + j] * v[j];
    z[i] = acc;
  }
  return o;
}

Var concat(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeMismatch("concat of nothing");
  Tape& t = *parts[0].tape;
  std::uint32_t n = 0;
  for (const Var& p : parts) {
    same_tape(parts[0], p);
    n += count_of(p);
  }
  Var o = TA::make(t, Op::Concat, 0, n);
  auto& node = TA::raw(t, o.id);
  node.list = TA::add_list(t, parts);
  node.list_len = static_cast<std::uint32_t>(parts.size());
  double* z = TA::out(o);
  for (const Var& p : parts) z = std::copy_n(TA::in(p), count_of(p), z);
  return o;
}

Var slice(Var a, std::size_t begin, std::size_t length) {
  if (begin + length > count_of(a)) throw ShapeMismatch("slice out of range");
  Var o = TA::make(*a.tape, Op::Slice, 0, static_cast<std::uint32_t>(length), a, {}, static_cast<double>(begin));
  std::copy_n(TA::in(a) + begin, length, TA::out(o));
  return o;
}

Var sum(Var a) {
  Var o = TA::make(*a.tape, Op::Sum, 0, 1, a);
  double acc = 0.0;
  const double* x = TA::in(a);
  for (std::uint32_t i = 0; i < count_of(a); ++i) acc += x[i];
  TA::out(o)[0] = acc;
  return o;
}

Var mean(Var a) { return scale(sum(a), 1.0 / count_of(a)); }

Var abs(Var a) {
  Var o = unary(Op::Abs, a, [](double x) { return std::abs(x); });
  if (TA::tracking(*a.tape))
    for (std::uint32_t i = 0; i < count_of(a); ++i) TA::note(*a.tape, TA::in(a)[i] > 0);
  return o;
}

Var relu(Var a) {
  Var o = unary(Op::Relu, a, [](double x) { return x > 0 ? x : 0.0; });
  if (TA::tracking(*a.tape))
    for (std::uint32_t i = 0; i < count_of(a); ++i) TA::note(*a.tape, TA::in(a)[i] > 0);
  return o;
}

Var sigmoid(Var a) { return unary(Op::Sigmoid, a, stable_sigmoid); }
Var log_sigmoid(Var a) { return unary(Op::LogSigmoid, a, [](double x) { return -log1pexp(-x); }); }

Var softplus(Var a, double beta) {
  if (!(beta > 0)) throw DomainError("softplus beta must be positive");
  return unary(Op::Softplus, a, [beta](double x) { return log1pexp(beta * x) / beta; }, beta);
}

Var log(Var a) {
  const double* x = TA::in(a);
  for (std::uint32_t i = 0; i < count_of(a); ++i)
    if (!(x[i] > 0)) throw DomainError("log of non-positive value " + std::to_string(x[i]));
  return unary(Op::Log, a, [](double v) { return std::log(v); });
}

Var exp(Var a) { return unary(Op::Exp, a, [](double x) { return std::exp(x); }); }
Var sin(Var a) { return unary(Op::Sin, a, [](double x) { return std::sin(x); }); }
Var cos(Var a) { return unary(Op::Cos, a, [](double x) { return std::cos(x); }); }
Var atan2(Var y, Var x) { return binary(Op::Atan2, y, x, "atan2", [](double u, double v) { return std::atan2(u, v); }); }

Var clamp(Var a, double lo, double hi) {
  Var o = unary(Op::Clamp, a, [lo, hi](double x) { return std::clamp(x, lo, hi); }, lo, hi);
  if (TA::tracking(*a.tape))
    for (std::uint32_t i = 0; i < count_of(a); ++i) {
      const double x = TA::in(a)[i];
      TA::note(*a.tape, x <= lo ? 0 : (x > hi ? 2 : 1));
    }
  return o;
}

Var reciprocal(Var a) { return unary(Op::Reciprocal, a, [](double x) { return 1.0 / x; }); }

Var stack(const std::vector<Var>& rows) {
  if (rows.empty()) throw ShapeMismatch("stack of nothing");
  const std::uint32_t d = count_of(rows[0]);
  for (const Var& r : rows) {
    same_tape(rows[0], r);
    if (count_of(r) != d) throw ShapeMismatch("stack: rows of different length");
  }
  Tape& t = *rows[0].tape;
  Var o = TA::make(t, Op::Stack, static_cast<std::uint32_t>(rows.size()), d);
  auto& node = TA::raw(t, o.id);
  node.list = TA::add_list(t, rows);
  node.list_len = static_cast<std::uint32_t>(rows.size());
  double* z = TA::out(o);
  for (const Var& r : rows) z = std::copy_n(TA::in(r), d, z);
  return o;
}

Var row(Var m, std::size_t i) {
  const auto& n = TA::node(m);
  if (n.rows == 0 || i >= n.rows) throw ShapeMismatch("row index out of range");
  const std::uint32_t d = n.cols;
  Var o = TA::make(*m.tape, Op::Row, 0, d, m, {}, static_cast<double>(i));
  std::copy_n(TA::in(m) + i * d, d, TA::out(o));
  return o;
}

Var softmax(Var m, std::size_t axis) {
  const auto& n = TA::node(m);
  const std::uint32_t rows = n.rows == 0 ? 1 : n.rows, cols = n.cols;
  if ((n.rows == 0 && axis != 0) || axis > 1) throw ShapeMismatch("softmax axis out of range");
  // For 1-d input the single axis runs along cols.
  const bool along_rows = n.rows != 0 && axis == 0;
  Var o = TA::make(*m.tape, Op::Softmax, n.rows, cols, m, {}, along_rows ? 0.0 : 1.0);
  const double* x = TA::in(m);
  double* z = TA::out(o);
  const std::uint32_t groups = along_rows ? cols : rows, len = along_rows ? rows : cols;
  for (std::uint32_t g = 0; g < groups; ++g) {
    auto at = [&](std::uint32_t k) { return along_rows ? k * cols + g : g * cols + k; };
    double hi = x[at(0)];
    for (std::uint32_t k = 1; k < len; ++k) hi = std::max(hi, x[at(k)]);
    double total = 0.0;
    for (std::uint32_t k = 0; k < len; ++k) total += (z[at(k)] = std::exp(x[at(k)] - hi));
    for (std::uint32_t k = 0; k < len; ++k) z[at(k)] /= total;
  }
  return o;
}

Var digamma(Var a) { return unary(Op::Digamma, a, [](double x) { return digamma(x); }); }
Var lgamma(Var a) { return unary(Op::Lgamma, a, [](double x) { return lgamma_lanczos(x); }); }

Var wrap_angle(Var a) {
  constexpr double pi = std::numbers::pi;
  Var o = unary(Op::WrapAngle, a, [](double x) {
    double w = std::fmod(x + pi, 2 * pi);
    if (w < 0) w += 2 * pi;
    return w - pi;
  });
  if (TA::tracking(*a.tape))
    for (std::uint32_t i = 0; i < count_of(a); ++i)
      TA::note(*a.tape, static_cast<std::uint64_t>(std::floor((TA::in(a)[i] + pi) / (2 * pi)) + 1024));
  return o;
}

void Tape::backward(Var loss) {
  if (loss.tape != this) throw ShapeMismatch("loss lives on another tape");
  if (nodes_[loss.id].count != 1) throw ShapeMismatch("backward needs a scalar loss");
  grads_.assign(values_.size(), 0.0);
  grads_[nodes_[loss.id].offset] = 1.0;
  const bool fault = g_fault;
  for (std::uint32_t id = loss.id + 1; id-- > 0;) {
    const Node& n = nodes_[id];
    const double* g = grads_.data() + n.offset;
    const double* y = values_.data() + n.offset;
    const std::uint32_t cnt = n.count;
    auto ga = [&] { return grads_.data() + nodes_[n.a].offset; };
    auto gb = [&] { return grads_.data() + nodes_[n.b].offset; };
    auto va = [&] { return values_.data() + nodes_[n.a].offset; };
    auto vb = [&] { return values_.data() + nodes_[n.b].offset; };
    switch (n.op) {
      case Op::Leaf:
        break;
      case Op::Param: {
        double* pg = n.param->grad.data.data();
        for (std::uint32_t i = 0; i < cnt; ++i) pg[i] += g[i];
        break;
      }
      case Op::ParamRow: {
        double* pg = n.param->grad.data.data() + static_cast<std::size_t>(n.s1) * cnt;
        for (std::uint32_t i = 0; i < cnt; ++i) pg[i] += g[i];
        break;
      }
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
      case Op::Div:
      case Op::Min:
      case Op::Max:
      case Op::Atan2: {
        const std::uint32_t na = nodes_[n.a].count, nb = nodes_[n.b].count;
        double* da = ga();
        double* db = gb();
        const double* x = va();
        const double* z = vb();
        for (std::uint32_t i = 0; i < cnt; ++i) {
          const std::uint32_t ia = na == 1 ? 0 : i, ib = nb == 1 ? 0 : i;
          const double u = x[ia], v = z[ib];
          switch (n.op) {
            case Op::Add: da[ia] += g[i]; db[ib] += g[i]; break;
            case Op::Sub: da[ia] += g[i]; db[ib] -= g[i]; break;
            case Op::Mul: da[ia] += g[i] * v * (fault ? 1.5 : 1.0); db[ib] += g[i] * u; break;
            case Op::Div: da[ia] += g[i] / v; db[ib] -= g[i] * u / (v * v); break;
            case Op::Min: (u <= v ? da[ia] : db[ib]) += g[i]; break;
            case Op::Max: (u >= v ? da[ia] : db[ib]) += g[i]; break;
            default: {
              const double r = u * u + v * v;
              da[ia] += g[i] * v / r;
              db[ib] -= g[i] * u / r;
            }
          }
        }
        break;
      }
      case Op::Scale: {
        double* d = ga();
        for (std::uint32_t i = 0; i < cnt; ++i) d[i] += n.s1 * g[i];
        break;
      }
      case Op::AddScalar:
      case Op::WrapAngle: {
        double* d = ga();
        for (std::uint32_t i = 0; i < cnt; ++i) d[i] += g[i];
        break;
      }
      case Op::MatVec: {
        const std::uint32_t cols = nodes_[n.a].cols;
        double* dW = ga();
        double* dx = gb();
        const double* W = va();
        const double* x = vb();
        for (std::uint32_t i = 0; i < cnt; ++i) {
          if (g[i] == 0.0) continue;
          for (std::uint32_t j = 0; j < cols; ++j) {
            dW[i * cols + j] += g[i] * x[j];
            dx[j] += W[i * cols + j] * g[i];
          }
        }
        break;
      }
      case Op::Concat:
      case Op::Stack: {
        const double* src = g;
        for (std::uint32_t k = 0; k < n.list_len; ++k) {
          const Node& part = nodes_[lists_[n.list + k]];
          double* d = grads_.data() + part.offset;
          for (std::uint32_t i = 0; i < part.count; ++i) d[i] += src[i];
          src += part.count;
        }
        break;
      }
      case Op::Slice:
      case Op::Row: {
        const std::size_t start = n.op == Op::Slice ? static_cast<std::size_t>(n.s1) : static_cast<std::size_t>(n.s1) * cnt;
        double* d = ga() + start;
        for (std::uint32_t i = 0; i < cnt; ++i) d[i] += g[i];
        break;
      }
      case Op::Sum: {
        double* d = ga();
        for (std::uint32_t i = 0; i < nodes_[n.a].count; ++i) d[i] += g[0];
        break;
      }
      case Op::Softmax: {
        const Node& in = nodes_[n.a];
        const std::uint32_t rows = in.rows == 0 ? 1 : in.rows, cols = in.cols;
        const bool along_rows = n.s1 == 0.0;
        const std::uint32_t groups = along_rows ? cols : rows, len = along_rows ? rows : cols;
        double* d = ga();
        for (std::uint32_t grp = 0; grp < groups; ++grp) {
          auto at = [&](std::uint32_t k) { return along_rows ? k * cols + grp : grp * cols + k; };
          double dot = 0.0;
          for (std::uint32_t k = 0; k < len; ++k) dot += g[at(k)] * y[at(k)];
          for (std::uint32_t k = 0; k < len; ++k) d[at(k)] += y[at(k)] * (g[at(k)] - dot);
        }
        break;
      }
      default: {
        // Elementwise unary ops: local derivative from input x and output y.
        double* d = ga();
        const double* x = va();
        for (std::uint32_t i = 0; i < cnt; ++i) {
          double local = 0.0;
          switch (n.op) {
            case Op::Abs: local = x[i] > 0 ? 1.0 : -1.0; break;
            case Op::Relu: local = x[i] > 0 ? 1.0 : 0.0; break;
            case Op::Sigmoid: local = y[i] * (1.0 - y[i]) * (fault ? 1.5 : 1.0); break;
            case Op::LogSigmoid: local = stable_sigmoid(-x[i]); break;
            case Op::Softplus: local = stable_sigmoid(n.s1 * x[i]); break;
            case Op::Log: local = 1.0 / x[i]; break;
            case Op::Exp: local = y[i]; break;
            case Op::Sin: local = std::cos(x[i]); break;
            case Op::Cos: local = -std::sin(x[i]); break;
            // Left derivative at the bounds.
            case Op::Clamp: local = (x[i] > n.s1 && x[i] <= n.s2) ? 1.0 : 0.0; break;
            case Op::Reciprocal: local = -y[i] * y[i]; break;
            case Op::Digamma: local = trigamma(x[i]); break;
            case Op::Lgamma: local = digamma(x[i]); break;
            default: break;
          }
          d[i] += g[i] * local;
        }
      }
    }
  }
}

}  // namespace dage
