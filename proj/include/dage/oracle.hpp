#pragma once

#include <utility>
#include <vector>

#include "dage/computation_graph.hpp"
#include "dage/kg_store.hpp"
#include "dage/query.hpp"

namespace dage {

// Sorted, duplicate-free entity ids.
using AnswerSet = std::vector<EntityId>;
using PairSet = std::vector<std::pair<EntityId, EntityId>>;

// Direct recursion over the AST, target first: exists R . C walks R backwards
// from the members of C.
AnswerSet eval_concept(const KnowledgeGraph& kg, const ConceptPtr& c);

// Materialized pair semantics of a role, sorted.
PairSet eval_role_pairs(const KnowledgeGraph& kg, const RolePtr& r);

// Independent evaluator: bottom-up over topo_order of the computation graph.
AnswerSet eval_graph(const KnowledgeGraph& kg, const ComputationGraph& g);

// |A & B| / |A | B|, 1.0 when both are empty.
double overlap_ratio(const AnswerSet& a, const AnswerSet& b);

AnswerSet set_intersection(const AnswerSet& a, const AnswerSet& b);
AnswerSet set_union(const AnswerSet& a, const AnswerSet& b);
AnswerSet set_difference(const AnswerSet& a, const AnswerSet& b);

// Batch evaluation. The parallel version uses OpenMP over queries and returns
// exactly what the serial version returns.
std::vector<AnswerSet> eval_batch_serial(const KnowledgeGraph& kg,
                                         const std::vector<ConceptPtr>& queries);
std::vector<AnswerSet> eval_batch(const KnowledgeGraph& kg, const std::vector<ConceptPtr>& queries);

}  // namespace dage
