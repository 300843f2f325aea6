// Serial reference vs OpenMP paths for the three parallel kernels.
#include <benchmark/benchmark.h>

#include "dage/dataset.hpp"
#include "dage/evaluation.hpp"
#include "dage/oracle.hpp"
#include "dage/synthetic.hpp"

namespace {

using namespace dage;

const SyntheticGraphs& graphs() {
  static const SyntheticGraphs g = [] {
    SyntheticConfig c;
    c.width = 40;
    c.height = 25;
    c.seed = 7;
    return make_grid_kg(c);
  }();
  return g;
}

GenerationConfig gen_config() {
  GenerationConfig c;
  c.types = {"2s", "3s", "sp", "is", "us", "ins"};
  c.n_train = 60;
  c.n_test_easy = 20;
  c.seed = 3;
  c.max_retries = 5000;
  return c;
}

const std::vector<DatasetSplit>& splits() {
  static const auto s = generate_dataset(graphs().train, graphs().full, gen_config());
  return s;
}

std::vector<ConceptPtr> queries() {
  std::vector<ConceptPtr> qs;
  for (const auto& q : splits()[0].instances) qs.push_back(q.query);
  return qs;
}

void BM_OracleBatch(benchmark::State& state) {
  const auto qs = queries();
  const bool parallel = state.range(0);
  for (auto _ : state) {
    auto r = parallel ? eval_batch(graphs().full, qs) : eval_batch_serial(graphs().full, qs);
    benchmark::DoNotOptimize(r);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(qs.size()));
}
BENCHMARK(BM_OracleBatch)->ArgName("omp")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Generate(benchmark::State& state) {
  const bool parallel = state.range(0);
  for (auto _ : state) {
    auto s = generate_dataset(graphs().train, graphs().full, gen_config(), parallel);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_Generate)->ArgName("omp")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Mrr(benchmark::State& state) {
  const bool parallel = state.range(0);
  ModelParams model(Geometry::Cone, 16, graphs().full.num_entities(), graphs().full.num_relations(), 1);
  const Vocabulary vocab{&graphs().full.entities(), &graphs().full.relations()};
  const DatasetSplit& split = splits()[2];
  for (auto _ : state) {
    auto ranks = rank_split(model, vocab, split, EmbedOptions{}, true, parallel);
    benchmark::DoNotOptimize(ranks);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(split.instances.size()));
}
BENCHMARK(BM_Mrr)->ArgName("omp")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
