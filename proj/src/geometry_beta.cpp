#include <memory>

#include "geometry_impl.hpp"

namespace dage::detail {

Var beta_entity(Tape& t, ModelParams& m, EntityId e) {
  return add_scalar(softplus(t.param_row(m.entities, e)), kBetaFloor);
}

QueryEmb beta_rel_transform(Tape& t, ModelParams& m, const QueryEmb& q, Var role) {
  Var out = add_scalar(softplus(m.rel_net(t, concat({q.a, q.b, role}))), kBetaFloor);
  return {slice(out, 0, m.dim), slice(out, m.dim, m.dim), nullptr};
}

// Weighted product of densities: alpha' = 1 + sum w_i (alpha_i - 1), which
// equals sum w_i alpha_i since the weights sum to one.
QueryEmb beta_intersect(Tape& t, ModelParams& m, const std::vector<QueryEmb>& qs) {
  std::vector<Var> scores, alphas, betas;
  for (const auto& q : qs) {
    scores.push_back(m.inter_attn(t, concat({q.a, q.b})));
    alphas.push_back(q.a);
    betas.push_back(q.b);
  }
  return {weighted_mean(scores, alphas), weighted_mean(scores, betas), nullptr};
}

QueryEmb beta_complement(Tape&, const QueryEmb& q) {
  if (q.origin) return *q.origin;
  return {reciprocal(q.a), reciprocal(q.b), std::make_shared<const QueryEmb>(q)};
}

// sum_i KL(Beta(v_i) || Beta(q_i))
Var beta_distance(Tape&, ModelParams& m, Var v, const QueryEmb& q) {
  Var a1 = slice(v, 0, m.dim), b1 = slice(v, m.dim, m.dim);
  Var a2 = q.a, b2 = q.b;
  auto log_beta = [](Var a, Var b) { return sub(add(lgamma(a), lgamma(b)), lgamma(add(a, b))); };
  Var kl = sub(log_beta(a2, b2), log_beta(a1, b1));
  kl = add(kl, mul(sub(a1, a2), digamma(a1)));
  kl = add(kl, mul(sub(b1, b2), digamma(b1)));
  kl = add(kl, mul(sub(add(a2, b2), add(a1, b1)), digamma(add(a1, b1))));
  return sum(kl);
}

}  // namespace dage::detail
