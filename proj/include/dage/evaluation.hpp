#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "dage/dataset.hpp"
#include "dage/embedding.hpp"
#include "dage/geometry.hpp"

namespace dage {

// rank(a) = 1 + #{e not filtered, e != a : s(e) < s(a)}
//             + #{e not filtered, e != a : s(e) == s(a), e < a}
// Lower scores are better. With filter, `known` entities other than a are
// removed from the candidates.
std::size_t rank_of(const std::vector<double>& scores, EntityId a, const AnswerSet& known, bool filtered = true);

// Distance of every entity to the query.
std::vector<double> score_all(ModelParams& m, const Vocabulary& vocab, const ConceptPtr& q, const EmbedOptions& options);

// One rank per hard answer, in hard_answers order.
std::vector<std::size_t> rank_answers(ModelParams& m, const Vocabulary& vocab, const QueryInstance& q,
                                      const EmbedOptions& options, bool filtered = true);

double mrr(const std::vector<std::size_t>& ranks);

struct MrrCell {
  double mrr = 0.0;
  std::size_t count = 0;  // (query, hard answer) pairs
};

struct MrrReport {
  std::map<std::string, MrrCell> by_type;
  std::array<MrrCell, 4> by_bucket{};
  double avg_nn = 0.0, avg = 0.0;  // means of the per-type MRRs
  bool has_avg_nn = false, has_avg = false;
};

// Ranks per query; the parallel path fans out over queries with OpenMP.
std::vector<std::vector<std::size_t>> rank_split(ModelParams& m, const Vocabulary& vocab, const DatasetSplit& split,
                                                 const EmbedOptions& options, bool filtered = true, bool parallel = true);

MrrReport summarize(const DatasetSplit& split, const std::vector<std::vector<std::size_t>>& ranks);

// Ranks a model that scores every entity the same, so the id tie-break
// alone decides: computed directly from the filter sets.
std::vector<std::vector<std::size_t>> constant_model_ranks(const DatasetSplit& split, std::size_t n_entities,
                                                           bool filtered = true);

}  // namespace dage
