#pragma once

#include <vector>

#include "dage/geometry.hpp"

namespace dage::detail {

constexpr double kBetaFloor = 1e-4;

// sum_i w_i x_i with w from a dimension-wise softmax over scores, computed
// as x_0 + sum_{i>0} w_i (x_i - x_0) so identical inputs come back unchanged.
Var weighted_mean(const std::vector<Var>& scores, const std::vector<Var>& xs);
// sigmoid(DeepSets) gate over the set of inputs.
Var deepsets_gate(Tape& t, Mlp& net, const std::vector<Var>& inputs);
Var min_all(const std::vector<Var>& xs);

QueryEmb box_rel_transform(Tape& t, ModelParams& m, const QueryEmb& q, Var role);
QueryEmb box_intersect(Tape& t, ModelParams& m, const std::vector<QueryEmb>& qs);
Var box_distance(Tape& t, ModelParams& m, Var entity, const QueryEmb& q);
Var box_containment(Tape& t, ModelParams& m, const QueryEmb& inner, const QueryEmb& outer);

Var beta_entity(Tape& t, ModelParams& m, EntityId e);
QueryEmb beta_rel_transform(Tape& t, ModelParams& m, const QueryEmb& q, Var role);
QueryEmb beta_intersect(Tape& t, ModelParams& m, const std::vector<QueryEmb>& qs);
QueryEmb beta_complement(Tape& t, const QueryEmb& q);
Var beta_distance(Tape& t, ModelParams& m, Var entity, const QueryEmb& q);

QueryEmb cone_rel_transform(Tape& t, ModelParams& m, const QueryEmb& q, Var role);
QueryEmb cone_intersect(Tape& t, ModelParams& m, const std::vector<QueryEmb>& qs);
QueryEmb cone_complement(Tape& t, const QueryEmb& q);
Var cone_distance(Tape& t, ModelParams& m, Var entity, const QueryEmb& q);

}  // namespace dage::detail
