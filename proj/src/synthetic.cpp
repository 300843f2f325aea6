#include "dage/synthetic.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "dage/rng.hpp"

namespace dage {

namespace {

constexpr std::array<std::array<int, 2>, 8> kOffsets = {{
    {1, 0}, {0, 1}, {1, 1}, {-1, 0}, {0, -1}, {-1, 1}, {1, -1}, {-1, -1},
}};

template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

}  // namespace

SyntheticGraphs make_grid_kg(const SyntheticConfig& config) {
  if (config.width == 0 || config.height == 0 || config.relations == 0)
    throw std::invalid_argument("grid and relation counts must be positive");
  if (config.labels_per_offset == 0 || config.labels_per_offset > config.relations)
    throw std::invalid_argument("labels_per_offset must be in [1, relations]");
  if (config.extra_label_prob < 0.0 || config.extra_label_prob > 1.0)
    throw std::invalid_argument("extra_label_prob must be in [0,1]");
  if (config.holdout < 0.0 || config.holdout >= 1.0)
    throw std::invalid_argument("holdout must be in [0,1)");

  SymbolTable entities, relations;
  for (std::size_t y = 0; y < config.height; ++y)
    for (std::size_t x = 0; x < config.width; ++x)
      entities.intern("e" + std::to_string(x) + "_" + std::to_string(y));
  for (std::size_t r = 0; r < config.relations; ++r) relations.intern("r" + std::to_string(r));

  Rng layout = make_rng(config.seed, "synthetic/labels");
  std::vector<std::vector<RelationId>> labels(kOffsets.size());
  for (auto& l : labels) {
    std::vector<RelationId> pool(config.relations);
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = static_cast<RelationId>(i);
    for (std::size_t i = 0; i < config.labels_per_offset; ++i)
      std::swap(pool[i], pool[i + uniform_index(layout, pool.size() - i)]);
    l.assign(pool.begin(), pool.begin() + static_cast<long>(config.labels_per_offset));
  }

  Rng draw = make_rng(config.seed, "synthetic/links");
  std::vector<Triple> all;
  const long w = static_cast<long>(config.width), h = static_cast<long>(config.height);
  for (long y = 0; y < h; ++y)
    for (long x = 0; x < w; ++x)
      for (std::size_t o = 0; o < kOffsets.size(); ++o) {
        const long tx = x + kOffsets[o][0], ty = y + kOffsets[o][1];
        if (tx < 0 || ty < 0 || tx >= w || ty >= h) continue;
        const std::size_t primary = uniform_index(draw, labels[o].size());
        for (std::size_t i = 0; i < labels[o].size(); ++i) {
          const bool keep = i == primary || uniform_unit(draw) < config.extra_label_prob;
          if (keep)
            all.push_back({static_cast<EntityId>(y * w + x), labels[o][i], static_cast<EntityId>(ty * w + tx)});
        }
      }

  std::vector<Triple> train = all;
  Rng split = make_rng(config.seed, "synthetic/holdout");
  shuffle(train, split);
  const std::size_t held = static_cast<std::size_t>(static_cast<double>(train.size()) * config.holdout);
  train.erase(train.begin(), train.begin() + static_cast<long>(held));

  SyntheticGraphs out;
  out.full = KnowledgeGraph::build(entities, relations, all);
  out.train = KnowledgeGraph::build(std::move(entities), std::move(relations), std::move(train));
  return out;
}

}  // namespace dage
