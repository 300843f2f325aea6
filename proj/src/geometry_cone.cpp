#include <cmath>
#include <numbers>

#include "geometry_impl.hpp"

namespace dage::detail {

namespace {

constexpr double kPi = std::numbers::pi;

double wrapped(double x) {
  double w = std::fmod(x + kPi, 2 * kPi);
  if (w < 0) w += 2 * kPi;
  return w - kPi;
}

}  // namespace

QueryEmb cone_rel_transform(Tape& t, ModelParams& m, const QueryEmb& q, Var role) {
  const std::size_t d = m.dim;
  Var shifted = concat({add(q.a, slice(role, 0, d)), add(q.b, slice(role, d, d))});
  Var raw = m.rel_net(t, shifted);
  return {wrap_angle(slice(raw, 0, d)), scale(sigmoid(slice(raw, d, d)), 2 * kPi), nullptr};
}

QueryEmb cone_intersect(Tape& t, ModelParams& m, const std::vector<QueryEmb>& qs) {
  std::vector<Var> scores, inputs, apertures;
  for (const auto& q : qs) {
    Var x = concat({q.a, q.b});
    inputs.push_back(x);
    scores.push_back(m.inter_attn(t, x));
    apertures.push_back(q.b);
  }
  Var w = softmax(stack(scores), 0);
  Var s = mul(row(w, 0), sin(qs[0].a)), c = mul(row(w, 0), cos(qs[0].a));
  for (std::size_t i = 1; i < qs.size(); ++i) {
    s = add(s, mul(row(w, i), sin(qs[i].a)));
    c = add(c, mul(row(w, i), cos(qs[i].a)));
  }
  Var axis = wrap_angle(atan2(s, c));
  return {axis, mul(min_all(apertures), deepsets_gate(t, m.inter_gate, inputs)), nullptr};
}

QueryEmb cone_complement(Tape& t, const QueryEmb& q) {
  auto ax = q.a.value();
  std::vector<double> shift(ax.size());
  for (std::size_t i = 0; i < ax.size(); ++i) {
    shift[i] = ax[i] >= 0 ? -kPi : kPi;
    t.note_branch(ax[i] >= 0);
  }
  return {add(q.a, t.constant(shift)), add_scalar(neg(q.b), 2 * kPi), nullptr};
}

// d_o + lambda d_i; d_o vanishes per dimension when v lies in the sector.
Var cone_distance(Tape& t, ModelParams& m, Var v, const QueryEmb& q) {
  auto vv = v.value(), ax = q.a.value(), ap = q.b.value();
  std::vector<double> outside(vv.size());
  for (std::size_t i = 0; i < vv.size(); ++i) {
    const bool in = std::abs(wrapped(vv[i] - ax[i])) <= ap[i] / 2;
    outside[i] = in ? 0.0 : 1.0;
    t.note_branch(in);
  }
  Var half_ap = scale(q.b, 0.5);
  Var lower = sub(q.a, half_ap), upper = add(q.a, half_ap);
  Var to_lower = abs(sin(scale(sub(v, lower), 0.5)));
  Var to_upper = abs(sin(scale(sub(v, upper), 0.5)));
  Var d_o = sum(mul(t.constant(outside), min(to_lower, to_upper)));
  Var d_i = sum(min(abs(sin(scale(sub(v, q.a), 0.5))), abs(sin(scale(q.b, 0.25)))));
  return add(d_o, scale(d_i, m.config.cone_lambda));
}

}  // namespace dage::detail
