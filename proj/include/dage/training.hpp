#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "dage/dataset.hpp"
#include "dage/embedding.hpp"
#include "dage/geometry.hpp"
#include "dage/templates.hpp"
#include "json.hpp"

namespace dage {

struct TrainConfig {
  Geometry geometry = Geometry::Box;
  std::size_t dim = 32;
  std::size_t batch_size = 32;
  std::size_t negatives = 16;
  double margin = 6.0;
  double learning_rate = 0.01;
  double lambda_mono = 0.02;
  double lambda_conj = 0.02;
  std::size_t steps = 1000;
  std::uint64_t seed = 0;
  GeometryConfig geo;
  bool relaxed = false;           // train and answer on relax(Q), no RCombiner
  std::size_t mined_pool = 2000;  // 2rs/3rs instances mined from the train graph
  std::size_t conj_batch = 16;    // mined instances per step
  std::size_t probe_size = 64;    // fixed pools for the constraint-loss trace

  void validate() const;  // UsageError
  nlohmann::ordered_json to_json() const;
};

struct NegativeSample {
  std::size_t query = 0;
  EntityId positive = 0;
  std::vector<EntityId> negatives;
};

// k distinct entities outside `known` and different from `positive`.
NegativeSample sample_negatives(std::size_t n_entities, const AnswerSet& known, EntityId positive,
                                std::size_t k, Rng& rng);  // TooFewEntities

// -log s(margin - d_pos) - mean_j log s(d_neg_j - margin)
Var answer_loss(Tape& t, ModelParams& m, const Embedding& q, EntityId positive,
                const std::vector<EntityId>& negatives, double margin);

// Sum over the meets of q of the containment penalty of the full meet inside
// one uniformly chosen member.
Var mono_loss(Tape& t, ModelParams& m, const Embedding& q, Rng& rng);

// Mean diff between exists (r & s).{e} through the RCombiner and the
// intersection of the single-relation embeddings.
Var conj_preserve_loss(Tape& t, ModelParams& m, const Vocabulary& vocab, const std::vector<const MinedQuery*>& mined);

struct LossRow {
  std::size_t step = 0;
  double answer = 0.0, mono = 0.0, conj = 0.0, total = 0.0;
};

struct TrainResult {
  ModelParams model;
  std::vector<LossRow> trace;
  // Constraint losses on fixed query pools before the first and after the
  // last update.
  double mono_start = 0.0, mono_end = 0.0, conj_start = 0.0, conj_end = 0.0;
};

TrainResult train(const KnowledgeGraph& kg_train, const DatasetSplit& train_split, const TrainConfig& config);

void write_loss_trace(const std::vector<LossRow>& trace, const std::filesystem::path& path);

// Adam with beta1 0.9, beta2 0.999, eps 1e-8 over every model parameter.
class Adam {
 public:
  Adam(ModelParams& m, double lr);
  void step();

 private:
  ModelParams& model_;
  double lr_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace dage
