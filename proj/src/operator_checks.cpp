#include "dage/operator_checks.hpp"

#include <cmath>
#include <numbers>

#include "dage/error.hpp"
#include "dage/gradcheck.hpp"
#include "dage/rng.hpp"

namespace dage {

const std::vector<std::string>& operator_names() {
  static const std::vector<std::string> names = {"rel_transform", "intersect", "complement", "rcombine",
                                                 "distance",      "diff",      "containment_penalty"};
  return names;
}

namespace {

constexpr double kPi = std::numbers::pi;

struct Point {
  std::vector<Parameter> inputs;
  std::vector<Tensor> weights;  // fixed projections turning outputs into scalars
};

Tensor random_vec(Rng& rng, std::size_t n, double lo, double hi) {
  Tensor t = Tensor::zeros({n});
  for (double& x : t.data) x = uniform_real(rng, lo, hi);
  return t;
}

// Query parts in the valid domain of the geometry.
std::pair<Tensor, Tensor> random_query(Geometry g, Rng& rng, std::size_t d) {
  switch (g) {
    case Geometry::Box: return {random_vec(rng, d, -1, 1), random_vec(rng, d, 0.1, 1)};
    case Geometry::Beta: return {random_vec(rng, d, 0.5, 3), random_vec(rng, d, 0.5, 3)};
    case Geometry::Cone: return {random_vec(rng, d, -kPi + 0.1, kPi - 0.1), random_vec(rng, d, 0.1, 2 * kPi - 0.1)};
  }
  return {};
}

Tensor random_entity(Geometry g, Rng& rng, std::size_t d) {
  switch (g) {
    case Geometry::Box: return random_vec(rng, d, -2, 2);
    case Geometry::Beta: return random_vec(rng, 2 * d, 0.5, 3);
    case Geometry::Cone: return random_vec(rng, d, -kPi + 0.1, kPi - 0.1);
  }
  return {};
}

Var project(Tape& t, const QueryEmb& q, const Tensor& wa, const Tensor& wb) {
  return add(sum(mul(q.a, t.constant(wa))), sum(mul(q.b, t.constant(wb))));
}

}  // namespace

std::vector<OperatorCheck> check_operators(Geometry g, std::uint64_t seed, std::size_t points, std::size_t dim) {
  std::vector<OperatorCheck> out;
  for (std::size_t k = 0; k < operator_names().size(); ++k) {
    const std::string& name = operator_names()[k];
    OperatorCheck check;
    check.op = name;
    if (name == "complement" && g == Geometry::Box) {
      check.applicable = false;
      out.push_back(check);
      continue;
    }
    for (std::size_t p = 0; p < points; ++p) {
      Rng rng = make_rng(seed, "gradcheck/" + name, p);
      ModelParams model(g, dim, 2, 2, rng());
      std::vector<Parameter> inputs;
      const std::size_t n_queries = name == "intersect" ? 2 + uniform_index(rng, 2) : 2;
      for (std::size_t i = 0; i < n_queries; ++i) {
        auto [a, b] = random_query(g, rng, dim);
        inputs.emplace_back("qa" + std::to_string(i), a);
        inputs.emplace_back("qb" + std::to_string(i), b);
      }
      const std::size_t n_roles = 1 + uniform_index(rng, 3);
      for (std::size_t i = 0; i < n_roles; ++i)
        inputs.emplace_back("role" + std::to_string(i), random_vec(rng, model.role_width(), -1, 1));
      inputs.emplace_back("entity", random_entity(g, rng, dim));
      const Tensor wa = random_vec(rng, dim, -1, 1), wb = random_vec(rng, dim, -1, 1);
      const Tensor wr = random_vec(rng, model.role_width(), -1, 1);

      auto query = [&](Tape& t, std::size_t i) { return QueryEmb{t.param(inputs[2 * i]), t.param(inputs[2 * i + 1]), nullptr}; };
      auto role = [&](Tape& t, std::size_t i) { return t.param(inputs[2 * n_queries + i]); };
      auto f = [&](Tape& t) -> Var {
        if (name == "rel_transform") return project(t, rel_transform(t, model, query(t, 0), role(t, 0)), wa, wb);
        if (name == "intersect") {
          std::vector<QueryEmb> qs;
          for (std::size_t i = 0; i < n_queries; ++i) qs.push_back(query(t, i));
          return project(t, intersect(t, model, qs), wa, wb);
        }
        if (name == "complement") return project(t, complement(t, model, query(t, 0)), wa, wb);
        if (name == "rcombine") {
          std::vector<Var> rs;
          for (std::size_t i = 0; i < n_roles; ++i) rs.push_back(role(t, i));
          return sum(mul(rcombine(t, model, rs), t.constant(wr)));
        }
        if (name == "distance") return distance(t, model, t.param(inputs.back()), query(t, 0));
        if (name == "diff") return diff(t, model, query(t, 0), query(t, 1));
        return containment_penalty(t, model, query(t, 0), query(t, 1));
      };
      std::vector<Parameter*> params;
      for (auto& in : inputs) params.push_back(&in);
      for (Parameter* q : model.parameters())
        if (q != &model.entities && q != &model.roles) params.push_back(q);
      const GradCheckResult r = grad_check(f, params);
      check.max_rel_error = std::max(check.max_rel_error, r.max_rel_error);
      check.checked += r.checked;
      check.skipped += r.skipped;
      check.unresolved += r.unresolved;
    }
    out.push_back(check);
  }
  return out;
}

}  // namespace dage
