#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dage/kg_store.hpp"
#include "dage/oracle.hpp"
#include "dage/query.hpp"

namespace dage {

enum class Difficulty { Easy, Hard };

struct QueryInstance {
  std::int64_t id = 0;
  std::string type;
  ConceptPtr query;
  AnswerSet easy_answers;  // on the train graph
  AnswerSet hard_answers;  // on the full graph only
  double overlap = 1.0;    // answers vs. answers of the relaxation, full graph
  Difficulty difficulty = Difficulty::Easy;
};

struct DatasetSplit {
  std::string name;  // train | valid | test-easy | test-hard
  std::vector<QueryInstance> instances;
};

// Sets q.overlap from the full graph and returns the label: hard iff the
// overlap is strictly below threshold.
Difficulty classify_difficulty(const KnowledgeGraph& kg_full, QueryInstance& q, double threshold);

struct GenerationConfig {
  std::vector<std::string> types = {"2s", "3s", "sp", "is", "us", "ins"};
  // Instances per type and split.
  std::size_t n_train = 0;
  std::size_t n_valid = 0;
  std::size_t n_test_easy = 0;
  std::size_t n_test_hard = 0;
  // Per-type test-hard counts; listed types override n_test_hard.
  std::map<std::string, std::size_t> hard_counts;
  double hard_threshold = 0.5;
  std::uint64_t seed = 0;
  // Consecutive rejected attempts tolerated for one (split, type) slot.
  std::size_t max_retries = 100;
  // Test instances need at least this many hard answers.
  std::size_t min_hard_answers = 0;
  // Attempts evaluated together; the parallel and serial paths accept the
  // same attempts in the same order.
  std::size_t block_size = 64;
};

// Splits in the order train, valid, test-easy, test-hard. Concepts are unique
// across all splits after normalization. Throws ExhaustedRetries.
std::vector<DatasetSplit> generate_dataset(const KnowledgeGraph& kg_train, const KnowledgeGraph& kg_full,
                                           const GenerationConfig& config, bool parallel = true);

// Counts for [0,.3) [.3,.6) [.6,.9) [.9,1].
std::array<std::size_t, 4> overlap_histogram(const DatasetSplit& split);
std::size_t overlap_bucket(double overlap);
const std::array<std::string, 4>& bucket_labels();

// JSONL with entity names. Reading resolves names against `entities`; with
// allow_new unknown names are interned, otherwise they raise UnknownName.
void write_dataset(const DatasetSplit& split, const SymbolTable& entities,
                   const std::filesystem::path& path);
DatasetSplit read_dataset(const std::filesystem::path& path, SymbolTable& entities,
                          bool allow_new = false);

std::string split_file_name(const std::string& split);
std::string difficulty_name(Difficulty d);

}  // namespace dage
