#include "dage/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace dage {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

GradCheckResult grad_check(const std::function<Var(Tape&)>& f, const std::vector<Parameter*>& params,
                           double eps) {
  for (Parameter* p : params) p->zero_grad();
  {
    Tape tape;
    tape.backward(f(tape));
  }
  std::vector<std::vector<double>> analytic;
  for (Parameter* p : params) analytic.push_back(p->grad.data);

  GradCheckResult result;
  Tape tape;
  tape.track_branches(true);
  auto probe = [&](std::uint64_t& signature) {
    tape.clear();
    const double v = f(tape).item();
    signature = tape.branch_signature();
    return v;
  };
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& data = params[k]->value.data;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double saved = data[i];
      std::uint64_t sig_hi = 0, sig_lo = 0;
      data[i] = saved + eps;
      const double hi = probe(sig_hi);
      data[i] = saved - eps;
      const double lo = probe(sig_lo);
      data[i] = saved;
      if (sig_hi != sig_lo) {
        ++result.skipped;
        continue;
      }
      const double numeric = (hi - lo) / (2 * eps);
      // The difference quotient carries rounding noise of about
      // 1e-15 |f| / eps; gradients too small to resolve to 1e-4 relative
      // precision against that noise are reported separately.
      const double noise = 1e-15 * std::max({std::abs(hi), std::abs(lo), 1.0}) / eps;
      if (std::max(std::abs(analytic[k][i]), std::abs(numeric)) < 1e4 * noise) {
        ++result.unresolved;
        continue;
      }
      result.max_rel_error = std::max(result.max_rel_error, relative_error(analytic[k][i], numeric));
      ++result.checked;
    }
  }
  return result;
}

GradCheckResult grad_check(const std::function<Var(Tape&, const std::vector<Var>&)>& f,
                           const std::vector<Tensor>& inputs, double eps) {
  std::vector<Parameter> params;
  params.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) params.emplace_back("x" + std::to_string(i), inputs[i]);
  std::vector<Parameter*> ptrs;
  for (auto& p : params) ptrs.push_back(&p);
  return grad_check(
      [&](Tape& t) {
        std::vector<Var> vars;
        for (auto& p : params) vars.push_back(t.param(p));
        return f(t, vars);
      },
      ptrs, eps);
}

}  // namespace dage
