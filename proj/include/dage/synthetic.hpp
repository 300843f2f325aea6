#pragma once

#include <cstdint>

#include "dage/kg_store.hpp"

namespace dage {

// Grid world with one entity e<x>_<y> per cell and links to the eight
// neighbouring cells. Each displacement owns a fixed set of relation labels;
// a link carries one of them for sure and each other one with probability
// extra_label_prob, so pairs linked by two relations at once are rarer than
// pairs reachable by both. A random holdout fraction of the triples is
// missing from the train graph.
struct SyntheticConfig {
  std::size_t width = 20;
  std::size_t height = 10;
  std::size_t relations = 6;
  std::size_t labels_per_offset = 3;
  double extra_label_prob = 0.3;
  double holdout = 0.15;
  std::uint64_t seed = 0;
};

struct SyntheticGraphs {
  KnowledgeGraph train;
  KnowledgeGraph full;
};

SyntheticGraphs make_grid_kg(const SyntheticConfig& config);

}  // namespace dage
