#include "geometry_impl.hpp"

namespace dage::detail {

QueryEmb box_rel_transform(Tape&, ModelParams& m, const QueryEmb& q, Var role) {
  const std::size_t d = m.dim;
  return {add(q.a, slice(role, 0, d)), add(q.b, relu(slice(role, d, d))), nullptr};
}

QueryEmb box_intersect(Tape& t, ModelParams& m, const std::vector<QueryEmb>& qs) {
  std::vector<Var> scores, centers, offsets, inputs;
  for (const auto& q : qs) {
    Var x = concat({q.a, q.b});
    inputs.push_back(x);
    scores.push_back(m.inter_attn(t, x));
    centers.push_back(q.a);
    offsets.push_back(q.b);
  }
  return {weighted_mean(scores, centers), mul(min_all(offsets), deepsets_gate(t, m.inter_gate, inputs)), nullptr};
}

Var box_distance(Tape&, ModelParams& m, Var v, const QueryEmb& q) {
  Var lo = sub(q.a, q.b), hi = add(q.a, q.b);
  Var outside = sum(add(relu(sub(v, hi)), relu(sub(lo, v))));
  Var inside = sum(abs(sub(q.a, min(max(v, lo), hi))));
  return add(outside, scale(inside, m.config.alpha_in));
}

// 1 - vol(inner ∩ outer) / vol(inner), softplus volumes, clamped to [0, 1].
Var box_containment(Tape& t, ModelParams& m, const QueryEmb& inner, const QueryEmb& outer) {
  const QueryEmb both = box_intersect(t, m, {inner, outer});
  const double beta = m.config.softplus_beta;
  Var log_ratio = sub(sum(log(softplus(both.b, beta))), sum(log(softplus(inner.b, beta))));
  return clamp(scale(add_scalar(exp(log_ratio), -1.0), -1.0), 0.0, 1.0);
}

}  // namespace dage::detail
