#include "dage/dataset.hpp"

#include <algorithm>
#include <exception>
#include <fstream>
#include <unordered_set>

#include "dage/error.hpp"
#include "dage/rng.hpp"
#include "dage/templates.hpp"
#include "json.hpp"

namespace dage {

using ordered_json = nlohmann::ordered_json;

std::string difficulty_name(Difficulty d) { return d == Difficulty::Hard ? "hard" : "easy"; }

std::string split_file_name(const std::string& split) { return split + ".jsonl"; }

Difficulty classify_difficulty(const KnowledgeGraph& kg_full, QueryInstance& q, double threshold) {
  q.overlap = overlap_ratio(eval_concept(kg_full, q.query), eval_concept(kg_full, relax(q.query)));
  q.difficulty = q.overlap < threshold ? Difficulty::Hard : Difficulty::Easy;
  return q.difficulty;
}

namespace {

struct Candidate {
  bool ok = false;
  QueryInstance instance;
  std::string key;
};

struct SplitPlan {
  std::string name;
  std::size_t per_type;
  bool on_train;
  bool hard_only;
};

Candidate attempt(const KnowledgeGraph& kg_train, const KnowledgeGraph& kg_full,
                  const GenerationConfig& config, const SplitPlan& plan, const std::string& tag,
                  std::uint64_t index) {
  Candidate c;
  Rng rng = make_rng(config.seed, "generation/" + plan.name + "/" + tag, index);
  const KnowledgeGraph& sample_graph = plan.on_train ? kg_train : kg_full;
  Instantiation inst = instantiate_template(sample_graph, tag, rng);
  if (!inst.ok()) return c;
  QueryInstance& q = c.instance;
  q.type = tag;
  q.query = inst.query;
  if (plan.on_train) {
    q.easy_answers = std::move(inst.answers);
  } else {
    q.easy_answers = eval_concept(kg_train, q.query);
    q.hard_answers = set_difference(inst.answers, q.easy_answers);
    if (q.hard_answers.size() < config.min_hard_answers) return c;
  }
  classify_difficulty(kg_full, q, config.hard_threshold);
  if (plan.hard_only && q.difficulty != Difficulty::Hard) return c;
  c.key = render_concept(normalize_concept(q.query));
  c.ok = true;
  return c;
}

void check_graphs(const KnowledgeGraph& kg_train, const KnowledgeGraph& kg_full) {
  if (kg_train.entities().names() != kg_full.entities().names() ||
      kg_train.relations().names() != kg_full.relations().names())
    throw Error("InvalidInput", "train and full graphs must share entity and relation tables");
  for (const Triple& t : kg_train.triples())
    if (!kg_full.contains(t.head, t.relation, t.tail))
      throw Error("InvalidInput", "train graph has a triple missing from the full graph");
}

}  // namespace

std::vector<DatasetSplit> generate_dataset(const KnowledgeGraph& kg_train, const KnowledgeGraph& kg_full,
                                           const GenerationConfig& config, bool parallel) {
  check_graphs(kg_train, kg_full);
  for (const auto& t : config.types)
    if (!is_known_tag(t)) throw UsageError("unknown query type '" + t + "'");
  for (const auto& [t, n] : config.hard_counts)
    if (std::find(config.types.begin(), config.types.end(), t) == config.types.end())
      throw UsageError("hard count given for type '" + t + "' outside the type list");
  const std::vector<SplitPlan> plans = {
      {"train", config.n_train, true, false},
      {"valid", config.n_valid, true, false},
      {"test-easy", config.n_test_easy, false, false},
      {"test-hard", config.n_test_hard, false, true},
  };
  const std::size_t block = std::max<std::size_t>(1, config.block_size);
  std::unordered_set<std::string> seen;
  std::vector<DatasetSplit> splits;
  for (const auto& plan : plans) {
    DatasetSplit split{plan.name, {}};
    for (const auto& tag : config.types) {
      std::size_t accepted = 0, consecutive = 0;
      std::uint64_t next = 0;
      std::vector<Candidate> batch(block);
      std::size_t quota = plan.per_type;
      if (plan.hard_only)
        if (auto it = config.hard_counts.find(tag); it != config.hard_counts.end()) quota = it->second;
      while (accepted < quota) {
        const long n = static_cast<long>(block);
        std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
        for (long i = 0; i < n; ++i) {
          try {
            batch[i] = attempt(kg_train, kg_full, config, plan, tag, next + static_cast<std::uint64_t>(i));
          } catch (...) {
#pragma omp critical(dage_generation_failure)
            if (!failure) failure = std::current_exception();
          }
        }
        if (failure) std::rethrow_exception(failure);
        next += block;
        for (auto& c : batch) {
          if (accepted == quota) break;
          if (c.ok && seen.insert(c.key).second) {
            c.instance.id = static_cast<std::int64_t>(split.instances.size());
            split.instances.push_back(std::move(c.instance));
            ++accepted;
            consecutive = 0;
          } else if (++consecutive > config.max_retries) {
            throw ExhaustedRetries("split " + plan.name + ", type " + tag + ": " +
                                   std::to_string(accepted) + " of " + std::to_string(quota) +
                                   " instances after " + std::to_string(config.max_retries) +
                                   " consecutive rejections");
          }
        }
      }
    }
    splits.push_back(std::move(split));
  }
  return splits;
}

std::size_t overlap_bucket(double overlap) {
  if (overlap < 0.3) return 0;
  if (overlap < 0.6) return 1;
  if (overlap < 0.9) return 2;
  return 3;
}

const std::array<std::string, 4>& bucket_labels() {
  static const std::array<std::string, 4> labels = {"0-30", "30-60", "60-90", "90-100"};
  return labels;
}

std::array<std::size_t, 4> overlap_histogram(const DatasetSplit& split) {
  std::array<std::size_t, 4> counts{};
  for (const auto& q : split.instances) ++counts[overlap_bucket(q.overlap)];
  return counts;
}

void write_dataset(const DatasetSplit& split, const SymbolTable& entities,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  auto names = [&](const AnswerSet& s) {
    ordered_json a = ordered_json::array();
    for (EntityId e : s) a.push_back(entities.name(e));
    return a;
  };
  for (const auto& q : split.instances) {
    ordered_json j;
    j["id"] = q.id;
    j["type"] = q.type;
    j["concept"] = ordered_json::parse(concept_to_json(q.query).dump());
    j["easy_answers"] = names(q.easy_answers);
    j["hard_answers"] = names(q.hard_answers);
    j["overlap"] = q.overlap;
    j["difficulty"] = difficulty_name(q.difficulty);
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

DatasetSplit read_dataset(const std::filesystem::path& path, SymbolTable& entities, bool allow_new) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  DatasetSplit split;
  split.name = path.stem().string();
  std::string line;
  std::size_t line_no = 0;
  auto resolve = [&](const nlohmann::json& arr) {
    if (!arr.is_array()) throw std::invalid_argument("answers must be an array");
    AnswerSet s;
    for (const auto& x : arr) {
      const std::string name = x.get<std::string>();
      if (allow_new) {
        s.push_back(entities.intern(name));
      } else {
        auto id = entities.find(name);
        if (!id) throw UnknownName(name);
        s.push_back(*id);
      }
    }
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      QueryInstance q;
      q.id = j.at("id").get<std::int64_t>();
      q.type = j.at("type").get<std::string>();
      q.query = concept_from_json(j.at("concept"));
      q.easy_answers = resolve(j.at("easy_answers"));
      q.hard_answers = resolve(j.at("hard_answers"));
      q.overlap = j.at("overlap").get<double>();
      auto d = j.find("difficulty");
      if (d != j.end()) {
        const std::string label = d->get<std::string>();
        if (label != "easy" && label != "hard") throw std::invalid_argument("bad difficulty '" + label + "'");
        q.difficulty = label == "hard" ? Difficulty::Hard : Difficulty::Easy;
      }
      split.instances.push_back(std::move(q));
    } catch (const UnknownName&) {
      throw;
    } catch (const std::exception& e) {
      throw FormatError(line_no, e.what());
    }
  }
  return split;
}

}  // namespace dage
