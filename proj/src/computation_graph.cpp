#include "dage/computation_graph.hpp"

#include <functional>
#include <queue>

#include "dage/error.hpp"

namespace dage {

std::vector<std::pair<std::size_t, std::size_t>> ComputationGraph::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t v = 0; v < nodes.size(); ++v)
    for (std::size_t u : nodes[v].inputs) out.emplace_back(u, v);
  return out;
}

std::size_t ComputationGraph::add(Node n) {
  nodes.push_back(std::move(n));
  return nodes.size() - 1;
}

namespace {

// Appends the nodes of `other` beyond its first `shared` ids; ids below
// `shared` are identified with the same ids of g. Returns the new id of
// other.target.
std::size_t splice(ComputationGraph& g, const ComputationGraph& other, std::size_t shared) {
  std::vector<std::size_t> remap(other.size());
  for (std::size_t i = 0; i < shared; ++i) remap[i] = i;
  for (std::size_t i = shared; i < other.size(); ++i) {
    ComputationGraph::Node n = other.nodes[i];
    for (auto& in : n.inputs) in = remap[in];
    if (n.label == ComputationGraph::Label::Meet) n.source = remap[n.source];
    remap[i] = g.add(std::move(n));
  }
  return remap[other.target];
}

ComputationGraph compose_normalized(const ComputationGraph& g, const RolePtr& r) {
  using Label = ComputationGraph::Label;
  switch (r->kind) {
    case Role::Kind::Name:
    case Role::Kind::Inverse: {
      const bool inv = r->kind == Role::Kind::Inverse;
      ComputationGraph out = g;
      out.target = out.add({Label::ExistsRole, inv ? r->args[0]->name : r->name, inv, {g.target}, 0});
      return out;
    }
    case Role::Kind::Compose:
      // exists (R;S) . C == exists R . exists S . C: S is applied first.
      return compose_normalized(compose_normalized(g, r->args[1]), r->args[0]);
    case Role::Kind::Meet: {
      ComputationGraph out = g;
      std::vector<std::size_t> ends;
      for (const auto& member : r->args)
        ends.push_back(splice(out, compose_normalized(g, member), g.size()));
      out.target = out.add({Label::Meet, {}, false, std::move(ends), g.target});
      return out;
    }
  }
  return g;
}

ComputationGraph build(const ConceptPtr& c) {
  using Label = ComputationGraph::Label;
  switch (c->kind) {
    case Concept::Kind::Nominal: {
      ComputationGraph g;
      g.target = g.add({Label::Nominal, c->name, false, {}, 0});
      return g;
    }
    case Concept::Kind::Not: {
      ComputationGraph g = build(c->args[0]);
      g.target = g.add({Label::Not, {}, false, {g.target}, 0});
      return g;
    }
    case Concept::Kind::Exists:
      return compose_normalized(build(c->args[0]), normalize_role(c->role));
    case Concept::Kind::And:
    case Concept::Kind::Or: {
      ComputationGraph g;
      std::vector<std::size_t> ends;
      for (const auto& a : c->args) ends.push_back(splice(g, build(a), 0));
      g.target = g.add({c->kind == Concept::Kind::And ? Label::And : Label::Or, {}, false,
                        std::move(ends), 0});
      return g;
    }
  }
  return {};
}

}  // namespace

ComputationGraph compose_graph(const ComputationGraph& g, const RolePtr& r) {
  return compose_normalized(g, normalize_role(r));
}

ComputationGraph build_computation_graph(const ConceptPtr& c) { return build(c); }

std::vector<std::size_t> topo_order(const ComputationGraph& g) {
  const std::size_t n = g.size();
  std::vector<std::size_t> indegree(n, 0);
  std::vector<std::vector<std::size_t>> out(n);
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t u : g.nodes[v].inputs) {
      ++indegree[v];
      out[u].push_back(v);
    }
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t v = 0; v < n; ++v)
    if (indegree[v] == 0 && v != g.target) ready.push(v);
  std::vector<std::size_t> order;
  bool target_ready = n > 0 && indegree[g.target] == 0;
  while (!ready.empty()) {
    const std::size_t u = ready.top();
    ready.pop();
    order.push_back(u);
    for (std::size_t v : out[u])
      if (--indegree[v] == 0) {
        if (v == g.target)
          target_ready = true;
        else
          ready.push(v);
      }
  }
  if (n > 0) {
    if (!target_ready) throw CycleError("computation graph has a cycle");
    order.push_back(g.target);
  }
  if (order.size() != n) throw CycleError("computation graph has a cycle or a node after the target");
  return order;
}

std::string label_text(const ComputationGraph::Node& n) {
  switch (n.label) {
    case ComputationGraph::Label::Nominal: return "{" + n.name + "}";
    case ComputationGraph::Label::ExistsRole: return "exists " + (n.inverse ? "inv " + n.name : n.name);
    case ComputationGraph::Label::Meet: return "meet";
    case ComputationGraph::Label::Not: return "not";
    case ComputationGraph::Label::And: return "and";
    case ComputationGraph::Label::Or: return "or";
  }
  return {};
}

}  // namespace dage
