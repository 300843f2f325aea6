#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "dage/dataset.hpp"
#include "dage/evaluation.hpp"
#include "dage/report.hpp"
#include "dage/synthetic.hpp"
#include "test_util.hpp"

using namespace dage;
using namespace dage::testing;

namespace {

QueryInstance instance(const std::string& type, AnswerSet easy, AnswerSet hard, double overlap = 0.1) {
  QueryInstance q;
  q.type = type;
  q.query = parse_concept("{a}");
  q.easy_answers = std::move(easy);
  q.hard_answers = std::move(hard);
  q.overlap = overlap;
  return q;
}

// rank by brute force over a sorted candidate list
std::size_t sorted_rank(const std::vector<double>& s, EntityId a, const AnswerSet& known, bool filtered) {
  std::vector<EntityId> cand;
  for (EntityId e = 0; e < s.size(); ++e)
    if (e == a || !filtered || !std::binary_search(known.begin(), known.end(), e)) cand.push_back(e);
  std::stable_sort(cand.begin(), cand.end(), [&](EntityId x, EntityId y) { return s[x] < s[y]; });
  return static_cast<std::size_t>(std::find(cand.begin(), cand.end(), a) - cand.begin()) + 1;
}

}  // namespace

TEST(Rank, Examples) {
  const std::vector<double> s = {0.5, 0.1, 0.9, 0.1};
  EXPECT_EQ(rank_of(s, 1, {}, false), 1u);
  EXPECT_EQ(rank_of(s, 3, {}, false), 2u);  // tie broken by id
  EXPECT_EQ(rank_of(s, 0, {}, false), 3u);
  EXPECT_EQ(rank_of(s, 2, {}, false), 4u);
  EXPECT_EQ(rank_of(s, 2, {0, 1, 2}, true), 2u);
  EXPECT_EQ(rank_of(s, 2, {0, 1, 2}, false), 4u);
}

TEST(Rank, MatchesSortAndIsInvariantToMonotoneMaps) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> s(30);
    for (auto& x : s) x = static_cast<double>(rng() % 10);
    AnswerSet known;
    for (EntityId e = 0; e < 30; ++e)
      if (rng() % 4 == 0) known.push_back(e);
    std::vector<double> mapped = s;
    for (auto& x : mapped) x = 2 * x + 1;
    for (EntityId a = 0; a < 30; ++a)
      for (bool f : {false, true}) {
        EXPECT_EQ(rank_of(s, a, known, f), sorted_rank(s, a, known, f));
        EXPECT_EQ(rank_of(s, a, known, f), rank_of(mapped, a, known, f));
      }
  }
}

TEST(Mrr, Values) {
  EXPECT_DOUBLE_EQ(mrr({1, 2, 4}), 7.0 / 12.0);
  EXPECT_EQ(mrr({}), 0.0);
  EXPECT_EQ(mrr({1}), 1.0);
}

TEST(ConstantModel, MatchesZeroedEntityTable) {
  SyntheticConfig sc;
  sc.width = 8;
  sc.height = 6;
  sc.seed = 4;
  const auto g = make_grid_kg(sc);
  GenerationConfig gc;
  gc.types = {"2s", "is"};
  gc.n_test_hard = 5;
  gc.seed = 2;
  gc.max_retries = 20000;
  const DatasetSplit hard = generate_dataset(g.train, g.full, gc)[3];
  const Vocabulary vocab{&g.full.entities(), &g.full.relations()};
  ModelParams m(Geometry::Box, 4, g.full.num_entities(), g.full.num_relations(), 1);
  std::fill(m.entities.value.data.begin(), m.entities.value.data.end(), 0.0);
  for (bool f : {true, false}) {
    const auto model = rank_split(m, vocab, hard, EmbedOptions{}, f, false);
    const auto constant = constant_model_ranks(hard, g.full.num_entities(), f);
    EXPECT_EQ(model, constant);
    for (std::size_t i = 0; i < hard.instances.size(); ++i) {
      const auto& q = hard.instances[i];
      const AnswerSet known = set_union(q.easy_answers, q.hard_answers);
      for (std::size_t j = 0; j < q.hard_answers.size(); ++j) {
        const EntityId a = q.hard_answers[j];
        std::size_t expect = 1;
        for (EntityId e = 0; e < a; ++e)
          if (!f || !std::binary_search(known.begin(), known.end(), e)) ++expect;
        EXPECT_EQ(constant[i][j], expect);
      }
    }
  }
}

TEST(Summarize, AveragesPerType) {
  DatasetSplit s{"test-hard", {}};
  s.instances.push_back(instance("2s", {}, {1, 2}, 0.1));
  s.instances.push_back(instance("2s", {}, {3}, 0.95));
  s.instances.push_back(instance("ins", {}, {4}, 0.4));
  const std::vector<std::vector<std::size_t>> ranks = {{1, 2}, {4}, {2}};
  const MrrReport r = summarize(s, ranks);
  EXPECT_DOUBLE_EQ(r.by_type.at("2s").mrr, 7.0 / 12.0);
  EXPECT_EQ(r.by_type.at("2s").count, 3u);
  EXPECT_DOUBLE_EQ(r.avg_nn, 7.0 / 12.0);
  EXPECT_DOUBLE_EQ(r.avg, (7.0 / 12.0 + 0.5) / 2.0);
  EXPECT_DOUBLE_EQ(r.by_bucket[0].mrr, 0.75);
  EXPECT_EQ(r.by_bucket[1].count, 1u);
  EXPECT_EQ(r.by_bucket[2].count, 0u);
  EXPECT_DOUBLE_EQ(r.by_bucket[3].mrr, 0.25);
}

TEST(Report, Layout) {
  DatasetSplit s{"test-hard", {}};
  s.instances.push_back(instance("us", {}, {1}, 0.1));
  s.instances.push_back(instance("2s", {}, {1}, 0.1));
  s.instances.push_back(instance("ins", {}, {1}, 0.1));
  const MrrReport r = summarize(s, {{2}, {1}, {4}});
  EXPECT_EQ(report_tables(r, true),
            "type,mrr,count\n2s,1.000000,1\nus,0.500000,1\nins,0.250000,1\n\n"
            "bucket,mrr,count\n0-30,0.583333,3\n30-60,,0\n60-90,,0\n90-100,,0\n\n"
            "2s,3s,sp,is,us,Avg_nn,ins,Avg\n1.000000,,,,0.500000,0.750000,0.250000,0.583333\n");
  const std::string box = report_tables(r, false);
  EXPECT_NE(box.find("\n1.000000,,,,0.500000,0.750000,,\n"), std::string::npos);
}

TEST(Report, EmptyAndHistogram) {
  DatasetSplit s{"test-easy", {}};
  const std::string t = report_tables(summarize(s, {}), true);
  EXPECT_NE(t.find("\n,,,,,,,\n"), std::string::npos);
  s.instances.push_back(instance("2s", {1}, {}, 1.0));
  s.instances.push_back(instance("2s", {1}, {}, 0.0));
  s.instances.push_back(instance("2s", {1}, {}, 0.3));
  EXPECT_EQ(overlap_histogram_csv(s), "bucket,count\n0-30,1\n30-60,1\n60-90,0\n90-100,1\n");
}

TEST(RankSplit, ParallelMatchesSerial) {
  SyntheticConfig sc;
  sc.seed = 6;
  const auto g = make_grid_kg(sc);
  GenerationConfig gc;
  gc.types = {"2s", "sp", "us", "ins"};
  gc.n_test_easy = 6;
  gc.seed = 3;
  gc.max_retries = 20000;
  const DatasetSplit split = generate_dataset(g.train, g.full, gc)[2];
  const Vocabulary vocab{&g.full.entities(), &g.full.relations()};
  ModelParams m(Geometry::Cone, 8, g.full.num_entities(), g.full.num_relations(), 5);
  EXPECT_EQ(rank_split(m, vocab, split, EmbedOptions{}, true, true),
            rank_split(m, vocab, split, EmbedOptions{}, true, false));
}
