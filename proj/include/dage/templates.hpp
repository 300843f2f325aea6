#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dage/kg_store.hpp"
#include "dage/oracle.hpp"
#include "dage/query.hpp"
#include "dage/rng.hpp"

namespace dage {

// Query structures: 2s 3s sp is us ins, plus 2rs 3rs for the constraint loss.
const std::vector<std::string>& all_tags();
const std::vector<std::string>& benchmark_tags();
bool is_known_tag(std::string_view tag);

// Skeleton with placeholders r1..r4 (relations) and e1, e2 (entities).
ConceptPtr template_skeleton(std::string_view tag);

// Replaces placeholder names; names missing from the bindings are kept.
ConceptPtr ground(const ConceptPtr& skeleton, const std::map<std::string, std::string>& bindings);

struct Instantiation {
  ConceptPtr query;    // null when rejected
  std::string reason;  // why it was rejected
  AnswerSet answers;   // on the sampling graph
  bool ok() const noexcept { return query != nullptr; }
};

// Answer-first grounding: pick an answer entity and walk edges backwards so
// the answer set cannot be empty, then answer with the oracle.
Instantiation instantiate_template(const KnowledgeGraph& kg, std::string_view tag, Rng& rng);

struct MinedQuery {
  std::string tag;  // 2rs or 3rs
  ConceptPtr query;
  AnswerSet answers;
};

// All (e, {r, s[, t]}) with a shared (e, x) edge on kg, deduplicated under
// meet reordering; at most max_count, subsampled with rng.
std::vector<MinedQuery> mine_rs_queries(const KnowledgeGraph& kg, std::size_t max_count, Rng& rng);

}  // namespace dage
