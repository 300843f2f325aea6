#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "dage/query.hpp"

namespace dage {

// Labelled DAG whose edges point from an operand to the operator node that
// consumes it. Nominal nodes are the only sources.
struct ComputationGraph {
  enum class Label { Nominal, ExistsRole, Meet, Not, And, Or };

  struct Node {
    Label label;
    std::string name;                 // entity for Nominal, relation for ExistsRole
    bool inverse = false;             // ExistsRole only
    std::vector<std::size_t> inputs;  // incoming edges, in operand order
    std::size_t source = 0;           // Meet only: node the branches start from
  };

  std::vector<Node> nodes;
  std::size_t target = 0;

  std::size_t size() const noexcept { return nodes.size(); }
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;
  std::size_t add(Node n);
};

ComputationGraph compose_graph(const ComputationGraph& g, const RolePtr& r);
ComputationGraph build_computation_graph(const ConceptPtr& c);

// Kahn's algorithm, smallest ready id first; target last. Throws CycleError.
std::vector<std::size_t> topo_order(const ComputationGraph& g);

std::string label_text(const ComputationGraph::Node& n);

}  // namespace dage
