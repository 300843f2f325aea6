#include "dage/oracle.hpp"

#include <algorithm>
#include <exception>
#include <iterator>

#include "dage/error.hpp"

namespace dage {

namespace {

// Dense membership mask over the entity table.
using Mask = std::vector<char>;

AnswerSet to_set(const Mask& m) {
  AnswerSet out;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i]) out.push_back(static_cast<EntityId>(i));
  return out;
}

Mask singleton(std::size_t n, EntityId v) {
  Mask m(n, 0);
  m[v] = 1;
  return m;
}

// Follows one relation edge set: backward gives heads of edges into `from`,
// forward gives tails of edges out of `from`.
Mask step(const KnowledgeGraph& kg, RelationId r, bool backward, const Mask& from) {
  Mask out(from.size(), 0);
  for (std::size_t v = 0; v < from.size(); ++v) {
    if (!from[v]) continue;
    for (EntityId u : kg.query_edges(static_cast<EntityId>(v), r, backward)) out[u] = 1;
  }
  return out;
}

// backward: {u | exists v in S, (u,v) in R}; forward: {v | exists u in S, (u,v) in R}.
Mask walk(const KnowledgeGraph& kg, const RolePtr& r, const Mask& s, bool backward) {
  switch (r->kind) {
    case Role::Kind::Name:
      return step(kg, kg.relation_id(r->name), backward, s);
    case Role::Kind::Inverse:
      return walk(kg, r->args[0], s, !backward);
    case Role::Kind::Compose:
      if (backward) return walk(kg, r->args[0], walk(kg, r->args[1], s, true), true);
      return walk(kg, r->args[1], walk(kg, r->args[0], s, false), false);
    case Role::Kind::Meet: {
      Mask out(s.size(), 0);
      for (std::size_t v = 0; v < s.size(); ++v) {
        if (!s[v]) continue;
        const Mask one = singleton(s.size(), static_cast<EntityId>(v));
        Mask acc = walk(kg, r->args[0], one, backward);
        for (std::size_t i = 1; i < r->args.size(); ++i) {
          const Mask m = walk(kg, r->args[i], one, backward);
          for (std::size_t k = 0; k < acc.size(); ++k) acc[k] &= m[k];
        }
        for (std::size_t k = 0; k < acc.size(); ++k) out[k] |= acc[k];
      }
      return out;
    }
  }
  return s;
}

Mask eval_mask(const KnowledgeGraph& kg, const ConceptPtr& c) {
  const std::size_t n = kg.num_entities();
  switch (c->kind) {
    case Concept::Kind::Nominal:
      return singleton(n, kg.entity_id(c->name));
    case Concept::Kind::Not: {
      Mask m = eval_mask(kg, c->args[0]);
      for (auto& x : m) x = !x;
      return m;
    }
    case Concept::Kind::And:
    case Concept::Kind::Or: {
      Mask acc = eval_mask(kg, c->args[0]);
      const bool is_and = c->kind == Concept::Kind::And;
      for (std::size_t i = 1; i < c->args.size(); ++i) {
        const Mask m = eval_mask(kg, c->args[i]);
        for (std::size_t k = 0; k < n; ++k) acc[k] = is_and ? (acc[k] && m[k]) : (acc[k] || m[k]);
      }
      return acc;
    }
    case Concept::Kind::Exists:
      return walk(kg, c->role, eval_mask(kg, c->args[0]), true);
  }
  return Mask(n, 0);
}

PairSet join(const PairSet& a, const PairSet& b) {
  // b is sorted by first component.
  PairSet out;
  for (const auto& [x, y] : a) {
    auto it = std::lower_bound(b.begin(), b.end(), std::make_pair(y, EntityId{0}));
    for (; it != b.end() && it->first == y; ++it) out.emplace_back(x, it->second);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Graph evaluator. reach() gives the members produced at `node` when the
// node `from` is replaced by the set x; used to evaluate meet branches for one
// source element at a time.
class GraphEval {
 public:
  GraphEval(const KnowledgeGraph& kg, const ComputationGraph& g) : kg_(kg), g_(g) {}

  AnswerSet run() {
    values_.assign(g_.size(), {});
    const std::size_t n = kg_.num_entities();
    for (std::size_t id : topo_order(g_)) {
      const auto& node = g_.nodes[id];
      Mask out;
      switch (node.label) {
        case ComputationGraph::Label::Nominal:
          out = singleton(n, kg_.entity_id(node.name));
          break;
        case ComputationGraph::Label::ExistsRole:
          out = apply(node, values_[node.inputs[0]]);
          break;
        case ComputationGraph::Label::Not:
          out = values_[node.inputs[0]];
          for (auto& x : out) x = !x;
          break;
        case ComputationGraph::Label::And:
        case ComputationGraph::Label::Or: {
          const bool is_and = node.label == ComputationGraph::Label::And;
          out.assign(n, is_and ? 1 : 0);
          for (std::size_t in : node.inputs)
            for (std::size_t k = 0; k < n; ++k)
              out[k] = is_and ? (out[k] && values_[in][k]) : (out[k] || values_[in][k]);
          break;
        }
        case ComputationGraph::Label::Meet:
          out = meet(id, values_[node.source]);
          break;
      }
      values_[id] = std::move(out);
    }
    return g_.size() ? to_set(values_[g_.target]) : AnswerSet{};
  }

 private:
  Mask apply(const ComputationGraph::Node& node, const Mask& x) const {
    // exists r . X takes heads of edges into X; exists inv r . X takes tails.
    return step(kg_, kg_.relation_id(node.name), !node.inverse, x);
  }

  Mask meet(std::size_t id, const Mask& source_values) const {
    const auto& node = g_.nodes[id];
    Mask out(source_values.size(), 0);
    for (std::size_t v = 0; v < source_values.size(); ++v) {
      if (!source_values[v]) continue;
      const Mask one = singleton(source_values.size(), static_cast<EntityId>(v));
      Mask acc = reach(node.inputs[0], node.source, one);
      for (std::size_t i = 1; i < node.inputs.size(); ++i) {
        const Mask m = reach(node.inputs[i], node.source, one);
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] &= m[k];
      }
      for (std::size_t k = 0; k < out.size(); ++k) out[k] |= acc[k];
    }
    return out;
  }

  Mask reach(std::size_t node_id, std::size_t from, const Mask& x) const {
    if (node_id == from) return x;
    const auto& node = g_.nodes[node_id];
    switch (node.label) {
      case ComputationGraph::Label::ExistsRole:
        return apply(node, reach(node.inputs[0], from, x));
      case ComputationGraph::Label::Meet:
        return meet(node_id, reach(node.source, from, x));
      default:
        throw Error("InternalError", "meet branch contains a non-role node");
    }
  }

  const KnowledgeGraph& kg_;
  const ComputationGraph& g_;
  std::vector<Mask> values_;
};

}  // namespace

AnswerSet eval_concept(const KnowledgeGraph& kg, const ConceptPtr& c) {
  return to_set(eval_mask(kg, c));
}

PairSet eval_role_pairs(const KnowledgeGraph& kg, const RolePtr& r) {
  switch (r->kind) {
    case Role::Kind::Name:
      return kg.relation_pairs(kg.relation_id(r->name));
    case Role::Kind::Inverse: {
      PairSet p = eval_role_pairs(kg, r->args[0]);
      for (auto& [a, b] : p) std::swap(a, b);
      std::sort(p.begin(), p.end());
      return p;
    }
    case Role::Kind::Compose:
      return join(eval_role_pairs(kg, r->args[0]), eval_role_pairs(kg, r->args[1]));
    case Role::Kind::Meet: {
      PairSet acc = eval_role_pairs(kg, r->args[0]);
      for (std::size_t i = 1; i < r->args.size(); ++i) {
        const PairSet p = eval_role_pairs(kg, r->args[i]);
        PairSet next;
        std::set_intersection(acc.begin(), acc.end(), p.begin(), p.end(), std::back_inserter(next));
        acc = std::move(next);
      }
      return acc;
    }
  }
  return {};
}

AnswerSet eval_graph(const KnowledgeGraph& kg, const ComputationGraph& g) {
  return GraphEval(kg, g).run();
}

AnswerSet set_intersection(const AnswerSet& a, const AnswerSet& b) {
  AnswerSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

AnswerSet set_union(const AnswerSet& a, const AnswerSet& b) {
  AnswerSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

AnswerSet set_difference(const AnswerSet& a, const AnswerSet& b) {
  AnswerSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

double overlap_ratio(const AnswerSet& a, const AnswerSet& b) {
  const std::size_t inter = set_intersection(a, b).size();
  const std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<AnswerSet> eval_batch_serial(const KnowledgeGraph& kg,
                                         const std::vector<ConceptPtr>& queries) {
  std::vector<AnswerSet> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(eval_concept(kg, q));
  return out;
}

std::vector<AnswerSet> eval_batch(const KnowledgeGraph& kg, const std::vector<ConceptPtr>& queries) {
  std::vector<AnswerSet> out(queries.size());
  std::exception_ptr failure;
  const long n = static_cast<long>(queries.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (long i = 0; i < n; ++i) {
    try {
      out[i] = eval_concept(kg, queries[i]);
    } catch (...) {
#pragma omp critical(dage_oracle_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace dage
