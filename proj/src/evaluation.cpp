#include "dage/evaluation.hpp"

#include <algorithm>
#include <exception>

namespace dage {

std::size_t rank_of(const std::vector<double>& scores, EntityId a, const AnswerSet& known, bool filtered) {
  const double sa = scores[a];
  std::size_t rank = 1;
  for (EntityId e = 0; e < scores.size(); ++e) {
    if (e == a) continue;
    if (scores[e] < sa || (scores[e] == sa && e < a)) {
      if (filtered && std::binary_search(known.begin(), known.end(), e)) continue;
      ++rank;
    }
  }
  return rank;
}

std::vector<double> score_all(ModelParams& m, const Vocabulary& vocab, const ConceptPtr& q, const EmbedOptions& options) {
  // The query is re-embedded per chunk so the tape stays small on large graphs.
  constexpr std::size_t kChunk = 512;
  std::vector<double> scores(m.n_entities());
  Tape t;
  for (std::size_t begin = 0; begin < scores.size(); begin += kChunk) {
    t.clear();
    const Embedding emb = embed_query(t, m, vocab, q, options);
    const std::size_t end = std::min(scores.size(), begin + kChunk);
    for (std::size_t e = begin; e < end; ++e) scores[e] = score(t, m, static_cast<EntityId>(e), emb).item();
  }
  return scores;
}

std::vector<std::size_t> rank_answers(ModelParams& m, const Vocabulary& vocab, const QueryInstance& q,
                                      const EmbedOptions& options, bool filtered) {
  const std::vector<double> scores = score_all(m, vocab, q.query, options);
  const AnswerSet known = set_union(q.easy_answers, q.hard_answers);
  std::vector<std::size_t> ranks;
  for (EntityId a : q.hard_answers) ranks.push_back(rank_of(scores, a, known, filtered));
  return ranks;
}

double mrr(const std::vector<std::size_t>& ranks) {
  if (ranks.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t r : ranks) acc += 1.0 / static_cast<double>(r);
  return acc / static_cast<double>(ranks.size());
}

std::vector<std::vector<std::size_t>> rank_split(ModelParams& m, const Vocabulary& vocab, const DatasetSplit& split,
                                                 const EmbedOptions& options, bool filtered, bool parallel) {
  std::vector<std::vector<std::size_t>> out(split.instances.size());
  std::exception_ptr failure;
  const long n = static_cast<long>(split.instances.size());
#pragma omp parallel for schedule(dynamic, 4) if (parallel)
  for (long i = 0; i < n; ++i) {
    try {
      out[i] = rank_answers(m, vocab, split.instances[i], options, filtered);
    } catch (...) {
#pragma omp critical(dage_eval_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

MrrReport summarize(const DatasetSplit& split, const std::vector<std::vector<std::size_t>>& ranks) {
  MrrReport report;
  std::map<std::string, std::vector<std::size_t>> by_type;
  std::array<std::vector<std::size_t>, 4> by_bucket;
  for (std::size_t i = 0; i < split.instances.size(); ++i) {
    const auto& q = split.instances[i];
    auto& t = by_type[q.type];
    t.insert(t.end(), ranks[i].begin(), ranks[i].end());
    auto& b = by_bucket[overlap_bucket(q.overlap)];
    b.insert(b.end(), ranks[i].begin(), ranks[i].end());
  }
  double nn = 0.0, all = 0.0;
  std::size_t n_nn = 0, n_all = 0;
  for (const auto& [type, rs] : by_type) {
    if (rs.empty()) continue;
    report.by_type[type] = {mrr(rs), rs.size()};
    all += mrr(rs);
    ++n_all;
    if (type != "ins") {
      nn += mrr(rs);
      ++n_nn;
    }
  }
  for (std::size_t k = 0; k < 4; ++k) report.by_bucket[k] = {mrr(by_bucket[k]), by_bucket[k].size()};
  if (n_nn) report.avg_nn = nn / static_cast<double>(n_nn), report.has_avg_nn = true;
  if (n_all) report.avg = all / static_cast<double>(n_all), report.has_avg = true;
  return report;
}

std::vector<std::vector<std::size_t>> constant_model_ranks(const DatasetSplit& split, std::size_t n_entities,
                                                           bool filtered) {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& q : split.instances) {
    const AnswerSet known = set_union(q.easy_answers, q.hard_answers);
    std::vector<std::size_t> rs;
    for (EntityId a : q.hard_answers) {
      std::size_t below = a;  // entities with a smaller id
      if (filtered) below -= static_cast<std::size_t>(std::lower_bound(known.begin(), known.end(), a) - known.begin());
      rs.push_back(1 + below);
    }
    out.push_back(std::move(rs));
  }
  (void)n_entities;
  return out;
}

}  // namespace dage
