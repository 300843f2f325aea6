#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "dage/error.hpp"
#include "dage/geometry.hpp"
#include "dage/model_io.hpp"
#include "dage/operator_checks.hpp"
#include "dage/rng.hpp"

using namespace dage;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> vals(Var v) { return {v.value().begin(), v.value().end()}; }

Var vec(Tape& t, std::vector<double> v) { return t.constant(v); }

std::vector<double> rand_vec(Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = uniform_real(rng, lo, hi);
  return v;
}

QueryEmb random_query(Tape& t, Geometry g, Rng& rng, std::size_t d) {
  switch (g) {
    case Geometry::Box: return {vec(t, rand_vec(rng, d, -1, 1)), vec(t, rand_vec(rng, d, 0.05, 1)), nullptr};
    case Geometry::Beta: return {vec(t, rand_vec(rng, d, 0.2, 3)), vec(t, rand_vec(rng, d, 0.2, 3)), nullptr};
    case Geometry::Cone: return {vec(t, rand_vec(rng, d, -3, 3)), vec(t, rand_vec(rng, d, 0.1, 6)), nullptr};
  }
  return {};
}

double rel_dev(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max({std::abs(a[i]), std::abs(b[i]), 1e-300}));
  return worst;
}

// KL(Beta(a1,b1) || Beta(a2,b2)) by Simpson quadrature after x = sin^2(pi t / 2),
// which flattens the endpoint behaviour of the densities.
double kl_quadrature(double a1, double b1, double a2, double b2) {
  auto logpdf = [](double x, double a, double b) {
    return (a - 1) * std::log(x) + (b - 1) * std::log1p(-x) - (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
  };
  const int n = 20000;
  const double h = 1.0 / n;
  double s = 0.0;
  for (int i = 1; i < n; ++i) {
    const double t = i * h;
    const double x = std::pow(std::sin(kPi * t / 2), 2);
    const double dx = kPi / 2 * std::sin(kPi * t);
    const double lp = logpdf(x, a1, b1);
    s += (i % 2 ? 4.0 : 2.0) * std::exp(lp) * (lp - logpdf(x, a2, b2)) * dx;
  }
  return s * h / 3.0;
}

// Hand-written box distance.
double box_distance_oracle(const std::vector<double>& c, const std::vector<double>& o, const std::vector<double>& v,
                           double alpha) {
  double out = 0.0, in = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double lo = c[i] - o[i], hi = c[i] + o[i];
    out += std::max(v[i] - hi, 0.0) + std::max(lo - v[i], 0.0);
    in += std::abs(c[i] - std::clamp(v[i], lo, hi));
  }
  return out + alpha * in;
}

const Geometry kAll[] = {Geometry::Box, Geometry::Beta, Geometry::Cone};

}  // namespace

TEST(Geometry, Names) {
  for (Geometry g : kAll) EXPECT_EQ(parse_geometry(geometry_name(g)), g);
  EXPECT_THROW(parse_geometry("sphere"), UsageError);
}

TEST(Geometry, InitRanges) {
  for (Geometry g : kAll) {
    ModelParams m(g, 8, 20, 3, 1);
    const double bound = 1.0 / std::sqrt(8.0);
    for (double x : m.entities.value.data) EXPECT_LE(std::abs(x), bound);
    for (double x : m.roles.value.data) EXPECT_LE(std::abs(x), bound);
    EXPECT_EQ(m.roles.value.shape[0], 6u);
    EXPECT_EQ(m.n_entities(), 20u);
    ModelParams same(g, 8, 20, 3, 1);
    EXPECT_EQ(m.entities.value.data, same.entities.value.data);
    EXPECT_EQ(m.inter_attn.w1.value.data, same.inter_attn.w1.value.data);
  }
}

TEST(Nominal, Shapes) {
  {
    ModelParams m(Geometry::Cone, 4, 5, 2, 1);
    Tape t;
    for (double x : vals(nominal(t, m, 3).b)) EXPECT_EQ(x, 0.0);
    for (double x : vals(nominal(t, m, 3).a)) EXPECT_TRUE(x >= -kPi && x < kPi);
  }
  {
    ModelParams m(Geometry::Box, 4, 5, 2, 1);
    Tape t;
    for (double x : vals(nominal(t, m, 3).b)) EXPECT_EQ(x, 0.0);
    EXPECT_THROW(nominal(t, m, 5), UnknownId);
  }
  {
    ModelParams m(Geometry::Beta, 4, 5, 2, 1);
    Tape t;
    const QueryEmb x = nominal(t, m, 2), y = nominal(t, m, 2);
    EXPECT_EQ(vals(x.a), vals(y.a));
    EXPECT_EQ(vals(x.b), vals(y.b));
    for (double v : vals(x.a)) EXPECT_GT(v, 0.0);
  }
}

TEST(RelTransform, Box) {
  ModelParams m(Geometry::Box, 2, 3, 1, 1);
  Tape t;
  const QueryEmb q{vec(t, {1, 2}), vec(t, {0.5, 0.5}), nullptr};
  const QueryEmb out = rel_transform(t, m, q, vec(t, {0.5, -1, -0.3, 0.2}));
  EXPECT_EQ(vals(out.a), (std::vector<double>{1.5, 1}));
  EXPECT_EQ(vals(out.b), (std::vector<double>{0.5, 0.7}));
  EXPECT_THROW(rel_transform(t, m, q, vec(t, {1, 2})), ShapeMismatch);
}

TEST(RelTransform, OffsetsGrowAndConeAperturesStayInRange) {
  Rng rng = make_rng(1, "test/reltransform");
  ModelParams box(Geometry::Box, 4, 3, 1, 2), cone(Geometry::Cone, 4, 3, 1, 2);
  for (int i = 0; i < 200; ++i) {
    Tape t;
    const QueryEmb q = random_query(t, Geometry::Box, rng, 4);
    const QueryEmb out = rel_transform(t, box, q, vec(t, rand_vec(rng, 8, -2, 2)));
    for (std::size_t k = 0; k < 4; ++k) EXPECT_GE(out.b.value()[k], q.b.value()[k]);
    const QueryEmb c = rel_transform(t, cone, random_query(t, Geometry::Cone, rng, 4), vec(t, rand_vec(rng, 8, -5, 5)));
    for (double x : vals(c.b)) EXPECT_TRUE(x >= 0 && x <= 2 * kPi);
    for (double x : vals(c.a)) EXPECT_TRUE(x >= -kPi && x < kPi);
  }
}

TEST(Intersect, Bounds) {
  Rng rng = make_rng(2, "test/intersect");
  for (Geometry g : kAll) {
    ModelParams m(g, 4, 3, 1, 3);
    for (int i = 0; i < 100; ++i) {
      Tape t;
      std::vector<QueryEmb> qs;
      const std::size_t k = 2 + uniform_index(rng, 3);
      for (std::size_t j = 0; j < k; ++j) qs.push_back(random_query(t, g, rng, 4));
      const QueryEmb out = intersect(t, m, qs);
      for (std::size_t d = 0; d < 4; ++d) {
        double least = qs[0].b.value()[d];
        for (const auto& q : qs) least = std::min(least, q.b.value()[d]);
        if (g == Geometry::Beta) {
          EXPECT_GT(out.a.value()[d], 0.0);
          EXPECT_GT(out.b.value()[d], 0.0);
        } else {
          EXPECT_LE(out.b.value()[d], least);
        }
      }
    }
  }
  ModelParams m(Geometry::Box, 2, 3, 1, 1);
  Tape t;
  EXPECT_THROW(intersect(t, m, {random_query(t, Geometry::Box, rng, 2)}), FewerThanTwo);
}

TEST(Intersect, BetaIdenticalInputs) {
  ModelParams m(Geometry::Beta, 3, 3, 1, 4);
  Rng rng = make_rng(3, "test/betaid");
  Tape t;
  const QueryEmb q = random_query(t, Geometry::Beta, rng, 3);
  const QueryEmb out = intersect(t, m, {q, q, q});
  EXPECT_EQ(vals(out.a), vals(q.a));
  EXPECT_EQ(vals(out.b), vals(q.b));
}

TEST(Complement, Examples) {
  {
    ModelParams m(Geometry::Beta, 1, 3, 1, 1);
    Tape t;
    const QueryEmb c = complement(t, m, {vec(t, {2}), vec(t, {4}), nullptr});
    EXPECT_EQ(vals(c.a)[0], 0.5);
    EXPECT_EQ(vals(c.b)[0], 0.25);
  }
  {
    ModelParams m(Geometry::Cone, 1, 3, 1, 1);
    Tape t;
    const QueryEmb c = complement(t, m, {vec(t, {0}), vec(t, {0.5}), nullptr});
    EXPECT_DOUBLE_EQ(vals(c.a)[0], -kPi);
    EXPECT_DOUBLE_EQ(vals(c.b)[0], 2 * kPi - 0.5);
  }
  {
    ModelParams m(Geometry::Box, 1, 3, 1, 1);
    Tape t;
    EXPECT_THROW(complement(t, m, {vec(t, {0}), vec(t, {1}), nullptr}), UnsupportedNegation);
  }
}

TEST(Complement, Involutions) {
  Rng rng = make_rng(4, "test/involution");
  ModelParams beta(Geometry::Beta, 5, 3, 1, 1), cone(Geometry::Cone, 5, 3, 1, 1);
  for (int i = 0; i < 200; ++i) {
    Tape t;
    const QueryEmb b = random_query(t, Geometry::Beta, rng, 5);
    const QueryEmb bb = complement(t, beta, complement(t, beta, b));
    EXPECT_EQ(vals(bb.a), vals(b.a));
    EXPECT_EQ(vals(bb.b), vals(b.b));
    const QueryEmb c = random_query(t, Geometry::Cone, rng, 5);
    const QueryEmb cc = complement(t, cone, complement(t, cone, c));
    for (std::size_t k = 0; k < 5; ++k) {
      const double d = std::remainder(cc.a.value()[k] - c.a.value()[k], 2 * kPi);
      EXPECT_LT(std::abs(d), 1e-9);
      EXPECT_NEAR(cc.b.value()[k], c.b.value()[k], 1e-9);
    }
  }
}

TEST(RCombine, PermutationInvariance) {
  Rng rng = make_rng(5, "test/rcombine");
  for (Geometry g : kAll) {
    ModelParams m(g, 4, 3, 4, 7);
    const std::size_t w = m.role_width();
    for (std::size_t k = 2; k <= 4; ++k) {
      for (int trial = 0; trial < 5; ++trial) {
        std::vector<std::vector<double>> roles;
        for (std::size_t i = 0; i < k; ++i) roles.push_back(rand_vec(rng, w, -1, 1));
        std::vector<std::size_t> perm(k);
        for (std::size_t i = 0; i < k; ++i) perm[i] = i;
        Tape t0;
        std::vector<Var> base;
        for (const auto& r : roles) base.push_back(vec(t0, r));
        const std::vector<double> ref = vals(rcombine(t0, m, base));
        do {
          Tape t;
          std::vector<Var> in;
          for (std::size_t i : perm) in.push_back(vec(t, roles[i]));
          EXPECT_LT(rel_dev(vals(rcombine(t, m, in)), ref), 1e-9);
        } while (std::next_permutation(perm.begin(), perm.end()));
      }
    }
  }
}

TEST(RCombine, IdenticalRolesGiveValueNet) {
  Rng rng = make_rng(6, "test/rcombine_id");
  for (Geometry g : kAll) {
    ModelParams m(g, 4, 3, 2, 8);
    Tape t;
    const Var r = vec(t, rand_vec(rng, m.role_width(), -1, 1));
    const std::vector<double> value = vals(m.rc_value(t, r));
    EXPECT_EQ(vals(rcombine(t, m, {r})), value);
    for (std::size_t k = 2; k <= 4; ++k) EXPECT_EQ(vals(rcombine(t, m, std::vector<Var>(k, r))), value);
  }
}

TEST(RCompose, Box) {
  Rng rng = make_rng(7, "test/rcompose");
  ModelParams m(Geometry::Box, 3, 3, 1, 1);
  Tape t;
  const Var r = vec(t, rand_vec(rng, 6, -1, 1));
  EXPECT_EQ(vals(rcompose(t, m, r, vec(t, std::vector<double>(6, 0.0)))), vals(r));
  // offsets of both roles non-negative so relu is the identity
  std::vector<double> a = rand_vec(rng, 6, -1, 1), b = rand_vec(rng, 6, -1, 1);
  for (std::size_t i = 3; i < 6; ++i) a[i] = std::abs(a[i]), b[i] = std::abs(b[i]);
  const QueryEmb q = random_query(t, Geometry::Box, rng, 3);
  const QueryEmb once = rel_transform(t, m, q, rcompose(t, m, vec(t, a), vec(t, b)));
  const QueryEmb twice = rel_transform(t, m, rel_transform(t, m, q, vec(t, a)), vec(t, b));
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(once.a.value()[i], twice.a.value()[i], 1e-12);
    EXPECT_NEAR(once.b.value()[i], twice.b.value()[i], 1e-12);
  }
  ModelParams beta(Geometry::Beta, 3, 3, 1, 1);
  EXPECT_THROW(rcompose(t, beta, vec(t, {1, 2, 3}), vec(t, {1, 2, 3})), UnsupportedComposition);
}

TEST(Distance, BoxExamples) {
  ModelParams m(Geometry::Box, 1, 3, 1, 1);
  Tape t;
  const QueryEmb q{vec(t, {0}), vec(t, {1}), nullptr};
  EXPECT_NEAR(distance(t, m, vec(t, {3}), q).item(), 2.02, 1e-15);
  EXPECT_EQ(distance(t, m, vec(t, {0}), q).item(), 0.0);
  EXPECT_THROW(distance(t, m, vec(t, {0, 1}), q), ShapeMismatch);
}

TEST(Distance, BoxAgainstOracle) {
  Rng rng = make_rng(8, "test/boxdist");
  ModelParams m(Geometry::Box, 3, 3, 1, 1);
  for (int i = 0; i < 1000; ++i) {
    Tape t;
    const auto c = rand_vec(rng, 3, -1, 1), o = rand_vec(rng, 3, 0, 1), v = rand_vec(rng, 3, -2, 2);
    const double got = distance(t, m, vec(t, v), {vec(t, c), vec(t, o), nullptr}).item();
    EXPECT_NEAR(got, box_distance_oracle(c, o, v, m.config.alpha_in), 1e-12);
    bool inside = true;
    for (int k = 0; k < 3; ++k) inside = inside && std::abs(v[k] - c[k]) <= o[k];
    const double outside_part = box_distance_oracle(c, o, v, 0.0);
    EXPECT_EQ(outside_part == 0.0, inside);
  }
}

TEST(Distance, BetaKl) {
  ModelParams m(Geometry::Beta, 2, 3, 1, 1);
  Rng rng = make_rng(9, "test/betakl");
  for (int i = 0; i < 20; ++i) {
    Tape t;
    const auto e = rand_vec(rng, 4, 1.5, 4), q = rand_vec(rng, 4, 1.5, 4);
    const double got =
        distance(t, m, vec(t, e), {vec(t, {q[0], q[1]}), vec(t, {q[2], q[3]}), nullptr}).item();
    const double want = kl_quadrature(e[0], e[2], q[0], q[2]) + kl_quadrature(e[1], e[3], q[1], q[3]);
    EXPECT_NEAR(got, want, 1e-7);
    const double self = distance(t, m, vec(t, e), {vec(t, {e[0], e[1]}), vec(t, {e[2], e[3]}), nullptr}).item();
    EXPECT_NEAR(self, 0.0, 1e-12);
  }
}

TEST(Distance, ConeMembersHaveNoOutsidePart) {
  ModelParams m(Geometry::Cone, 1, 3, 1, 1);
  Tape t;
  const QueryEmb q{vec(t, {0.5}), vec(t, {1.0}), nullptr};
  EXPECT_EQ(distance(t, m, vec(t, {0.5}), q).item(), 0.0);
  // inside the sector only the weighted inside term remains
  const double inside = distance(t, m, vec(t, {0.8}), q).item();
  EXPECT_NEAR(inside, m.config.cone_lambda * std::min(std::abs(std::sin(0.15)), std::abs(std::sin(0.25))), 1e-15);
  const double outside = distance(t, m, vec(t, {2.0}), q).item();
  EXPECT_NEAR(outside, std::abs(std::sin((2.0 - 1.0) / 2)) + m.config.cone_lambda * std::abs(std::sin(0.25)), 1e-12);
}

TEST(Distance, NonNegative) {
  Rng rng = make_rng(10, "test/nonneg");
  for (Geometry g : kAll) {
    ModelParams m(g, 3, 4, 1, 2);
    for (int i = 0; i < 200; ++i) {
      Tape t;
      const QueryEmb q = random_query(t, g, rng, 3);
      const Var e = entity_point(t, m, static_cast<EntityId>(uniform_index(rng, 4)));
      EXPECT_GE(distance(t, m, e, q).item(), -1e-12);
      const QueryEmb p = random_query(t, g, rng, 3);
      EXPECT_GE(diff(t, m, p, q).item(), 0.0);
      EXPECT_EQ(diff(t, m, p, q).item(), diff(t, m, q, p).item());
      EXPECT_EQ(diff(t, m, q, q).item(), 0.0);
    }
  }
}

TEST(Diff, BoxExample) {
  ModelParams m(Geometry::Box, 2, 3, 1, 1);
  Tape t;
  EXPECT_EQ(diff(t, m, {vec(t, {0, 0}), vec(t, {1, 1}), nullptr}, {vec(t, {1, 1}), vec(t, {1, 1}), nullptr}).item(), 2.0);
}

TEST(Containment, BetaIdenticalIsZero) {
  ModelParams m(Geometry::Beta, 3, 3, 1, 5);
  Rng rng = make_rng(11, "test/contain");
  Tape t;
  const QueryEmb q = random_query(t, Geometry::Beta, rng, 3);
  EXPECT_EQ(containment_penalty(t, m, q, q).item(), 0.0);
}

TEST(Containment, BoxRangeAndMonotone) {
  Rng rng = make_rng(12, "test/boxcontain");
  ModelParams m(Geometry::Box, 3, 3, 1, 6);
  for (int i = 0; i < 300; ++i) {
    Tape t;
    const double p = containment_penalty(t, m, random_query(t, Geometry::Box, rng, 3), random_query(t, Geometry::Box, rng, 3)).item();
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
  ModelParams one(Geometry::Box, 1, 3, 1, 6);
  double last = -1.0;
  for (double off = 0.9; off >= 0.1; off -= 0.1) {
    Tape t;
    const double p = containment_penalty(t, one, {vec(t, {0}), vec(t, {1}), nullptr}, {vec(t, {0}), vec(t, {off}), nullptr}).item();
    EXPECT_GT(p, last);
    last = p;
  }
}

TEST(OperatorChecks, AllGeometries) {
  for (Geometry g : kAll) {
    for (std::uint64_t seed : {1u, 2u}) {
      const auto checks = check_operators(g, seed);
      ASSERT_EQ(checks.size(), operator_names().size());
      for (const auto& c : checks) {
        EXPECT_TRUE(c.passed()) << geometry_name(g) << " " << c.op << " " << c.max_rel_error;
        if (c.applicable) EXPECT_GE(c.checked, 20u) << geometry_name(g) << " " << c.op;
      }
    }
  }
}

TEST(OperatorChecks, InjectedFaultFails) {
  Tape::inject_fault(true);
  const auto checks = check_operators(Geometry::Beta, 1);
  Tape::inject_fault(false);
  bool any_failed = false;
  for (const auto& c : checks) any_failed = any_failed || !c.passed();
  EXPECT_TRUE(any_failed);
}

TEST(ModelFile, RoundTrip) {
  namespace fs = std::filesystem;
  for (Geometry g : kAll) {
    ModelParams m(g, 4, 5, 2, 3);
    const fs::path p = fs::temp_directory_path() / ("dage_model_" + geometry_name(g) + ".bin");
    nlohmann::ordered_json cfg = {{"seed", 3}};
    save_model(m, {"a", "b", "c", "d", "e"}, {"r", "s"}, cfg, p);
    ModelFile back = load_model(p);
    EXPECT_EQ(back.model.geometry, g);
    EXPECT_EQ(back.entity_names, (std::vector<std::string>{"a", "b", "c", "d", "e"}));
    EXPECT_EQ(back.config, cfg);
    const auto x = m.parameters(), y = back.model.parameters();
    ASSERT_EQ(x.size(), y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      EXPECT_EQ(x[i]->value.shape, y[i]->value.shape);
      EXPECT_EQ(x[i]->value.data, y[i]->value.data);
    }
  }
}

TEST(ModelFile, Errors) {
  namespace fs = std::filesystem;
  EXPECT_THROW(load_model("/nonexistent/model.bin"), IoError);
  const fs::path bad = fs::temp_directory_path() / "dage_model_bad.bin";
  std::ofstream(bad, std::ios::binary) << "NOTAMODEL";
  try {
    load_model(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), "FormatError");
  }
  ModelParams m(Geometry::Box, 2, 2, 1, 1);
  const fs::path good = fs::temp_directory_path() / "dage_model_trunc.bin";
  save_model(m, {"a", "b"}, {"r"}, {}, good);
  fs::resize_file(good, fs::file_size(good) - 8);
  try {
    load_model(good);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), "FormatError");
  }
}
