#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dage/autodiff.hpp"
#include "dage/kg_store.hpp"

namespace dage {

enum class Geometry { Box, Beta, Cone };

std::string geometry_name(Geometry g);
Geometry parse_geometry(const std::string& s);  // throws UsageError

struct GeometryConfig {
  double alpha_in = 0.02;       // box inside-distance weight
  double softplus_beta = 1.0;   // box volume temperature
  double cone_lambda = 0.02;    // cone inside-distance weight
};

// box: (center, offset); beta: (alpha, beta); cone: (axis, aperture).
// For beta, `origin` remembers the operand of a complement so that a double
// complement returns the original vectors bit for bit.
struct QueryEmb {
  Var a, b;
  std::shared_ptr<const QueryEmb> origin;
};

// One hidden layer of width `hidden` with relu. Attention scores go through a
// softmax that ignores a shared shift, so their nets carry no output bias.
struct Mlp {
  Parameter w1, b1, w2, b2;  // b2 empty without output bias

  Mlp() = default;
  Mlp(const std::string& name, std::size_t in, std::size_t hidden, std::size_t out, bool output_bias = true);
  std::size_t in_dim() const { return w1.value.shape[1]; }
  std::size_t out_dim() const { return w2.value.shape[0]; }
  Var hidden(Tape& t, Var x);
  Var output(Tape& t, Var h);
  Var operator()(Tape& t, Var x) { return output(t, hidden(t, x)); }
  std::vector<Parameter*> parameters();
};

struct ModelParams {
  Geometry geometry = Geometry::Box;
  std::size_t dim = 0;
  GeometryConfig config;
  Parameter entities;  // box/cone [n, d]; beta [n, 2d] raw shapes
  Parameter roles;     // row 2r forward, 2r+1 inverse; box/cone 2d wide, beta d wide
  Mlp inter_attn;      // per-dimension intersection attention scores
  Mlp inter_gate;      // DeepSets gate for box offsets and cone apertures
  Mlp rc_attn;         // RCombiner attention
  Mlp rc_value;        // RCombiner value
  Mlp rel_net;         // beta and cone relation transformation

  ModelParams() = default;
  ModelParams(Geometry g, std::size_t dim, std::size_t n_entities, std::size_t n_relations,
              std::uint64_t seed, GeometryConfig config = {});
  ModelParams(const ModelParams&) = delete;
  ModelParams& operator=(const ModelParams&) = delete;
  ModelParams(ModelParams&&) = default;
  ModelParams& operator=(ModelParams&&) = default;

  std::size_t n_entities() const { return entities.value.shape[0]; }
  std::size_t n_relations() const { return roles.value.shape[0] / 2; }
  std::size_t role_width() const { return roles.value.shape[1]; }
  // Fixed order shared by the model file and the optimizer.
  std::vector<Parameter*> parameters();
  void zero_grad();
};

QueryEmb nominal(Tape& t, ModelParams& m, EntityId e);
Var role_vec(Tape& t, ModelParams& m, RelationId r, bool inverse);
QueryEmb rel_transform(Tape& t, ModelParams& m, const QueryEmb& q, Var role);
QueryEmb intersect(Tape& t, ModelParams& m, const std::vector<QueryEmb>& qs);
QueryEmb complement(Tape& t, ModelParams& m, const QueryEmb& q);
Var rcombine(Tape& t, ModelParams& m, const std::vector<Var>& roles);
Var rcompose(Tape& t, ModelParams& m, Var r1, Var r2);
// Entity-to-query distance; the entity is given by its point embedding
// (box center / beta shapes / cone axis) from entity_point().
Var entity_point(Tape& t, ModelParams& m, EntityId e);
Var distance(Tape& t, ModelParams& m, Var entity, const QueryEmb& q);
Var diff(Tape& t, ModelParams& m, const QueryEmb& q1, const QueryEmb& q2);
Var containment_penalty(Tape& t, ModelParams& m, const QueryEmb& inner, const QueryEmb& outer);

}  // namespace dage
