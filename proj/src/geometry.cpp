#include "dage/geometry.hpp"

#include <cmath>
#include <numbers>

#include "dage/error.hpp"
#include "dage/rng.hpp"
#include "geometry_impl.hpp"

namespace dage {

using namespace detail;

std::string geometry_name(Geometry g) {
  switch (g) {
    case Geometry::Box: return "box";
    case Geometry::Beta: return "beta";
    case Geometry::Cone: return "cone";
  }
  return "box";
}

Geometry parse_geometry(const std::string& s) {
  if (s == "box") return Geometry::Box;
  if (s == "beta") return Geometry::Beta;
  if (s == "cone") return Geometry::Cone;
  throw UsageError("unknown geometry '" + s + "' (expected box, beta or cone)");
}

Mlp::Mlp(const std::string& name, std::size_t in, std::size_t hidden, std::size_t out, bool output_bias)
    : w1(name + ".w1", Tensor::zeros({hidden, in})),
      b1(name + ".b1", Tensor::zeros({hidden})),
      w2(name + ".w2", Tensor::zeros({out, hidden})) {
  if (output_bias) b2 = Parameter(name + ".b2", Tensor::zeros({out}));
}

Var Mlp::hidden(Tape& t, Var x) { return relu(add(matvec(t.param(w1), x), t.param(b1))); }

Var Mlp::output(Tape& t, Var h) {
  Var y = matvec(t.param(w2), h);
  return b2.value.data.empty() ? y : add(y, t.param(b2));
}

std::vector<Parameter*> Mlp::parameters() {
  if (b2.value.data.empty()) return {&w1, &b1, &w2};
  return {&w1, &b1, &w2, &b2};
}

ModelParams::ModelParams(Geometry g, std::size_t d, std::size_t n_entities, std::size_t n_relations,
                         std::uint64_t seed, GeometryConfig cfg)
    : geometry(g), dim(d), config(cfg) {
  if (d == 0) throw UsageError("dimension must be positive");
  const bool beta = g == Geometry::Beta;
  const std::size_t ent_w = beta ? 2 * d : d;
  const std::size_t role_w = beta ? d : 2 * d;
  entities = Parameter("entities", Tensor::zeros({n_entities, ent_w}));
  roles = Parameter("roles", Tensor::zeros({2 * n_relations, role_w}));
  inter_attn = Mlp("inter_attn", 2 * d, 2 * d, d, false);
  if (g != Geometry::Beta) inter_gate = Mlp("inter_gate", 2 * d, 2 * d, d);
  rc_attn = Mlp("rc_attn", role_w, 2 * d, role_w, false);
  rc_value = Mlp("rc_value", role_w, 2 * d, role_w);
  if (g == Geometry::Beta) rel_net = Mlp("rel_net", 3 * d, 2 * d, 2 * d);
  if (g == Geometry::Cone) rel_net = Mlp("rel_net", 2 * d, 2 * d, 2 * d);

  const double table = 1.0 / std::sqrt(static_cast<double>(d));
  std::uint64_t k = 0;
  for (Parameter* p : parameters()) {
    Rng rng = make_rng(seed, "init", k++);
    double limit = table;
    if (p != &entities && p != &roles) {
      if (p->value.shape.size() == 1) continue;  // biases start at zero
      limit = std::sqrt(6.0 / static_cast<double>(p->value.shape[0] + p->value.shape[1]));
    }
    for (double& x : p->value.data) x = uniform_real(rng, -limit, limit);
  }
}

std::vector<Parameter*> ModelParams::parameters() {
  std::vector<Parameter*> out = {&entities, &roles};
  auto take = [&](Mlp& n) {
    if (!n.w1.value.data.empty()) for (Parameter* p : n.parameters()) out.push_back(p);
  };
  take(inter_attn);
  take(inter_gate);
  take(rc_attn);
  take(rc_value);
  take(rel_net);
  return out;
}

void ModelParams::zero_grad() {
  for (Parameter* p : parameters()) p->zero_grad();
}

namespace detail {

Var weighted_mean(const std::vector<Var>& scores, const std::vector<Var>& xs) {
  Var w = softmax(stack(scores), 0);
  Var out = xs[0];
  for (std::size_t i = 1; i < xs.size(); ++i) out = add(out, mul(row(w, i), sub(xs[i], xs[0])));
  return out;
}

Var deepsets_gate(Tape& t, Mlp& net, const std::vector<Var>& inputs) {
  Var acc = net.hidden(t, inputs[0]);
  for (std::size_t i = 1; i < inputs.size(); ++i) acc = add(acc, net.hidden(t, inputs[i]));
  return sigmoid(net.output(t, scale(acc, 1.0 / static_cast<double>(inputs.size()))));
}

Var min_all(const std::vector<Var>& xs) {
  Var out = xs[0];
  for (std::size_t i = 1; i < xs.size(); ++i) out = min(out, xs[i]);
  return out;
}

}  // namespace detail

Var entity_point(Tape& t, ModelParams& m, EntityId e) {
  if (e >= m.n_entities()) throw UnknownId("entity " + std::to_string(e));
  switch (m.geometry) {
    case Geometry::Box: return t.param_row(m.entities, e);
    case Geometry::Beta: return beta_entity(t, m, e);
    case Geometry::Cone: return wrap_angle(t.param_row(m.entities, e));
  }
  return {};
}

QueryEmb nominal(Tape& t, ModelParams& m, EntityId e) {
  Var p = entity_point(t, m, e);
  if (m.geometry == Geometry::Beta) return {slice(p, 0, m.dim), slice(p, m.dim, m.dim), nullptr};
  return {p, t.constant(std::vector<double>(m.dim, 0.0)), nullptr};
}

Var role_vec(Tape& t, ModelParams& m, RelationId r, bool inverse) {
  if (r >= m.n_relations()) throw UnknownId("relation " + std::to_string(r));
  return t.param_row(m.roles, 2 * static_cast<std::size_t>(r) + (inverse ? 1 : 0));
}

namespace {

void check_query(const ModelParams& m, const QueryEmb& q) {
  if (q.a.size() != m.dim || q.b.size() != m.dim)
    throw ShapeMismatch("query embedding of width " + std::to_string(q.a.size()) + ", model dimension " +
                        std::to_string(m.dim));
}

void check_role(const ModelParams& m, Var r) {
  if (r.size() != m.role_width())
    throw ShapeMismatch("role vector of width " + std::to_string(r.size()) + ", expected " +
                        std::to_string(m.role_width()));
}

}  // namespace

QueryEmb rel_transform(Tape& t, ModelParams& m, const QueryEmb& q, Var role) {
  check_query(m, q);
  check_role(m, role);
  switch (m.geometry) {
    case Geometry::Box: return box_rel_transform(t, m, q, role);
    case Geometry::Beta: return beta_rel_transform(t, m, q, role);
    case Geometry::Cone: return cone_rel_transform(t, m, q, role);
  }
  return q;
}

QueryEmb intersect(Tape& t, ModelParams& m, const std::vector<QueryEmb>& qs) {
  if (qs.size() < 2) throw FewerThanTwo("intersect needs at least two operands, got " + std::to_string(qs.size()));
  for (const auto& q : qs) check_query(m, q);
  switch (m.geometry) {
    case Geometry::Box: return box_intersect(t, m, qs);
    case Geometry::Beta: return beta_intersect(t, m, qs);
    case Geometry::Cone: return cone_intersect(t, m, qs);
  }
  return qs[0];
}

QueryEmb complement(Tape& t, ModelParams& m, const QueryEmb& q) {
  check_query(m, q);
  switch (m.geometry) {
    case Geometry::Box: throw UnsupportedNegation("box embeddings have no complement");
    case Geometry::Beta: return beta_complement(t, q);
    case Geometry::Cone: return cone_complement(t, q);
  }
  return q;
}

Var rcombine(Tape& t, ModelParams& m, const std::vector<Var>& roles) {
  if (roles.empty()) throw ShapeMismatch("rcombine of no roles");
  std::vector<Var> scores, values;
  for (Var r : roles) {
    check_role(m, r);
    scores.push_back(m.rc_attn(t, r));
    values.push_back(m.rc_value(t, r));
  }
  if (roles.size() == 1) return values[0];
  return weighted_mean(scores, values);
}

Var rcompose(Tape&, ModelParams& m, Var r1, Var r2) {
  if (m.geometry == Geometry::Beta)
    throw UnsupportedComposition("beta roles cannot be composed under a meet");
  check_role(m, r1);
  check_role(m, r2);
  return add(r1, r2);
}

Var distance(Tape& t, ModelParams& m, Var entity, const QueryEmb& q) {
  check_query(m, q);
  const std::size_t want = m.geometry == Geometry::Beta ? 2 * m.dim : m.dim;
  if (entity.size() != want) throw ShapeMismatch("entity embedding of width " + std::to_string(entity.size()));
  switch (m.geometry) {
    case Geometry::Box: return box_distance(t, m, entity, q);
    case Geometry::Beta: return beta_distance(t, m, entity, q);
    case Geometry::Cone: return cone_distance(t, m, entity, q);
  }
  return {};
}

Var diff(Tape&, ModelParams& m, const QueryEmb& q1, const QueryEmb& q2) {
  check_query(m, q1);
  check_query(m, q2);
  return add(sum(abs(sub(q1.a, q2.a))), sum(abs(sub(q1.b, q2.b))));
}

Var containment_penalty(Tape& t, ModelParams& m, const QueryEmb& inner, const QueryEmb& outer) {
  check_query(m, inner);
  check_query(m, outer);
  if (m.geometry == Geometry::Box) return box_containment(t, m, inner, outer);
  return diff(t, m, intersect(t, m, {inner, outer}), inner);
}

}  // namespace dage
