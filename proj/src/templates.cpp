#include "dage/templates.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <stdexcept>

namespace dage {

namespace {

const std::map<std::string, std::string, std::less<>>& skeleton_texts() {
  static const std::map<std::string, std::string, std::less<>> texts = {
      {"2s", "exists (inv (r1 ; (r2 & r3))) . {e1}"},
      {"3s", "exists (inv (r1 ; (r2 & r3 & r4))) . {e1}"},
      {"sp", "exists (inv (r1 ; (r2 & r3) ; r4)) . {e1}"},
      {"is", "exists (inv (r3 & r4)) . (exists r1 . {e1} & exists r2 . {e2})"},
      {"us", "exists (inv (r3 & r4)) . (exists r1 . {e1} | exists r2 . {e2})"},
      {"ins", "exists (inv (r3 & r4)) . (exists r1 . {e1} & not exists r2 . {e2})"},
      {"2rs", "exists (inv (r1 & r2)) . {e1}"},
      {"3rs", "exists (inv (r1 & r2 & r3)) . {e1}"},
  };
  return texts;
}

struct Edge {
  EntityId other;
  RelationId relation;
};

std::vector<Edge> in_edges(const KnowledgeGraph& kg, EntityId v) {
  std::vector<Edge> out;
  for (RelationId r = 0; r < kg.num_relations(); ++r)
    for (EntityId h : kg.query_edges(v, r, true)) out.push_back({h, r});
  return out;
}

std::vector<Edge> out_edges(const KnowledgeGraph& kg, EntityId v) {
  std::vector<Edge> out;
  for (RelationId r = 0; r < kg.num_relations(); ++r)
    for (EntityId t : kg.query_edges(v, r, false)) out.push_back({t, r});
  return out;
}

template <class T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[uniform_index(rng, v.size())];
}

// Partial Fisher-Yates: k distinct elements, returned sorted.
std::vector<RelationId> choose_sorted(std::vector<RelationId> pool, std::size_t k, Rng& rng) {
  for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + uniform_index(rng, pool.size() - i)]);
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

struct MeetChoice {
  EntityId source;
  std::vector<RelationId> relations;
};

// A source y and k distinct relations that all link y to v.
std::optional<MeetChoice> sample_meet(const KnowledgeGraph& kg, EntityId v, std::size_t k, Rng& rng,
                                      std::string& reason) {
  const auto edges = in_edges(kg, v);
  if (edges.empty()) {
    reason = "answer candidate has no incoming edge";
    return std::nullopt;
  }
  const EntityId y = pick(edges, rng).other;
  std::vector<RelationId> shared;
  for (RelationId r = 0; r < kg.num_relations(); ++r)
    if (kg.contains(y, r, v)) shared.push_back(r);
  if (shared.size() < k) {
    reason = "fewer than " + std::to_string(k) + " distinct relations share a pair";
    return std::nullopt;
  }
  return MeetChoice{y, choose_sorted(std::move(shared), k, rng)};
}

std::string rel(const KnowledgeGraph& kg, RelationId r) { return kg.relations().name(r); }
std::string ent(const KnowledgeGraph& kg, EntityId e) { return kg.entities().name(e); }

RolePtr ground_role(const RolePtr& r, const std::map<std::string, std::string>& b) {
  switch (r->kind) {
    case Role::Kind::Name: {
      auto it = b.find(r->name);
      return it == b.end() ? r : role_name(it->second);
    }
    case Role::Kind::Inverse:
      return role_inverse(ground_role(r->args[0], b));
    case Role::Kind::Compose:
      return role_compose(ground_role(r->args[0], b), ground_role(r->args[1], b));
    case Role::Kind::Meet: {
      std::vector<RolePtr> m;
      for (const auto& a : r->args) m.push_back(ground_role(a, b));
      return role_meet(std::move(m));
    }
  }
  return r;
}

}  // namespace

const std::vector<std::string>& all_tags() {
  static const std::vector<std::string> tags = {"2s", "3s", "sp", "is", "us", "ins", "2rs", "3rs"};
  return tags;
}

const std::vector<std::string>& benchmark_tags() {
  static const std::vector<std::string> tags = {"2s", "3s", "sp", "is", "us", "ins"};
  return tags;
}

bool is_known_tag(std::string_view tag) { return skeleton_texts().count(tag) > 0; }

ConceptPtr template_skeleton(std::string_view tag) {
  auto it = skeleton_texts().find(tag);
  if (it == skeleton_texts().end()) throw std::invalid_argument("unknown query type '" + std::string(tag) + "'");
  return parse_concept(it->second);
}

ConceptPtr ground(const ConceptPtr& c, const std::map<std::string, std::string>& b) {
  switch (c->kind) {
    case Concept::Kind::Nominal: {
      auto it = b.find(c->name);
      return it == b.end() ? c : nominal(it->second);
    }
    case Concept::Kind::Not:
      return negation(ground(c->args[0], b));
    case Concept::Kind::Exists:
      return exists(ground_role(c->role, b), ground(c->args[0], b));
    case Concept::Kind::And:
    case Concept::Kind::Or: {
      std::vector<ConceptPtr> args;
      for (const auto& a : c->args) args.push_back(ground(a, b));
      return c->kind == Concept::Kind::And ? conjunction(std::move(args)) : disjunction(std::move(args));
    }
  }
  return c;
}

Instantiation instantiate_template(const KnowledgeGraph& kg, std::string_view tag, Rng& rng) {
  Instantiation result;
  const ConceptPtr skeleton = template_skeleton(tag);
  if (kg.num_entities() == 0 || kg.num_triples() == 0) {
    result.reason = "empty graph";
    return result;
  }
  std::map<std::string, std::string> b;
  std::string& reason = result.reason;
  auto reject = [&](std::string why) {
    reason = std::move(why);
    return result;
  };
  const EntityId answer = static_cast<EntityId>(uniform_index(rng, kg.num_entities()));

  if (tag == "2s" || tag == "3s" || tag == "sp") {
    EntityId meet_target = answer;
    if (tag == "sp") {
      const auto last = in_edges(kg, answer);
      if (last.empty()) return reject("answer candidate has no incoming edge");
      const Edge& e = pick(last, rng);
      meet_target = e.other;
      b["r4"] = rel(kg, e.relation);
    }
    const std::size_t k = tag == "3s" ? 3 : 2;
    auto meet = sample_meet(kg, meet_target, k, rng, reason);
    if (!meet) return result;
    const auto first = in_edges(kg, meet->source);
    if (first.empty()) return reject("meet source has no incoming edge");
    const Edge& e = pick(first, rng);
    b["r1"] = rel(kg, e.relation);
    b["e1"] = ent(kg, e.other);
    b["r2"] = rel(kg, meet->relations[0]);
    b["r3"] = rel(kg, meet->relations[1]);
    if (k == 3) b["r4"] = rel(kg, meet->relations[2]);
  } else if (tag == "is" || tag == "us" || tag == "ins") {
    auto meet = sample_meet(kg, answer, 2, rng, reason);
    if (!meet) return result;
    b["r3"] = rel(kg, meet->relations[0]);
    b["r4"] = rel(kg, meet->relations[1]);
    const EntityId x = meet->source;
    const auto outs = out_edges(kg, x);
    const Edge first = pick(outs, rng);  // nonempty: x links to the answer
    b["r1"] = rel(kg, first.relation);
    b["e1"] = ent(kg, first.other);
    if (tag == "is") {
      // Prefer a second branch that x shares with another member of the
      // first one, so the intersection is not a single entity.
      std::vector<Edge> others, shared;
      for (const Edge& e : outs) {
        if (e.other == first.other && e.relation == first.relation) continue;
        others.push_back(e);
        for (EntityId s : kg.query_edges(first.other, first.relation, true))
          if (s != x && kg.contains(s, e.relation, e.other)) {
            shared.push_back(e);
            break;
          }
      }
      if (others.empty()) return reject("intersection branch needs two distinct edges");
      const Edge second = pick(shared.empty() ? others : shared, rng);
      b["r2"] = rel(kg, second.relation);
      b["e2"] = ent(kg, second.other);
    } else if (tag == "us") {
      const auto triples = kg.triples();
      const Triple& t = triples[uniform_index(rng, triples.size())];
      if (t.relation == first.relation && t.tail == first.other)
        return reject("union branches coincide");
      b["r2"] = rel(kg, t.relation);
      b["e2"] = ent(kg, t.tail);
    } else {
      // The negated branch must exclude some other member of the first branch.
      std::vector<EntityId> siblings;
      for (EntityId s : kg.query_edges(first.other, first.relation, true))
        if (s != x) siblings.push_back(s);
      if (siblings.empty()) return reject("negation would be vacuous");
      const EntityId sib = pick(siblings, rng);
      std::vector<Edge> excluding;
      for (const Edge& e : out_edges(kg, sib))
        if (!kg.contains(x, e.relation, e.other)) excluding.push_back(e);
      if (excluding.empty()) return reject("negation would be vacuous");
      const Edge& e = pick(excluding, rng);
      b["r2"] = rel(kg, e.relation);
      b["e2"] = ent(kg, e.other);
    }
  } else if (tag == "2rs" || tag == "3rs") {
    auto meet = sample_meet(kg, answer, tag == "3rs" ? 3 : 2, rng, reason);
    if (!meet) return result;
    b["e1"] = ent(kg, meet->source);
    for (std::size_t i = 0; i < meet->relations.size(); ++i)
      b["r" + std::to_string(i + 1)] = rel(kg, meet->relations[i]);
  }

  ConceptPtr query = ground(skeleton, b);
  AnswerSet answers = eval_concept(kg, query);
  if (answers.empty()) return reject("empty answer set");
  if (tag == "ins") {
    // Dropping the negated conjunct must enlarge the answer set.
    const ConceptPtr positive = exists(query->role, query->args[0]->args[0]);
    if (eval_concept(kg, positive).size() <= answers.size()) return reject("negation is vacuous");
  }
  result.query = std::move(query);
  result.answers = std::move(answers);
  return result;
}

std::vector<MinedQuery> mine_rs_queries(const KnowledgeGraph& kg, std::size_t max_count, Rng& rng) {
  // Candidates: (e, sorted relation subset), canonical by construction.
  std::vector<std::pair<EntityId, std::vector<RelationId>>> candidates;
  std::set<std::pair<EntityId, std::vector<RelationId>>> seen;
  for (EntityId e = 0; e < kg.num_entities(); ++e) {
    std::map<EntityId, std::vector<RelationId>> by_target;
    for (RelationId r = 0; r < kg.num_relations(); ++r)
      for (EntityId t : kg.query_edges(e, r, false)) by_target[t].push_back(r);
    for (const auto& [t, rels] : by_target) {
      const std::size_t n = rels.size();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
          std::vector<RelationId> two{rels[i], rels[j]};
          if (seen.insert({e, two}).second) candidates.emplace_back(e, two);
          for (std::size_t k = j + 1; k < n; ++k) {
            std::vector<RelationId> three{rels[i], rels[j], rels[k]};
            if (seen.insert({e, three}).second) candidates.emplace_back(e, three);
          }
        }
    }
  }
  if (candidates.size() > max_count) {
    for (std::size_t i = 0; i < max_count; ++i)
      std::swap(candidates[i], candidates[i + uniform_index(rng, candidates.size() - i)]);
    candidates.resize(max_count);
  }
  std::vector<MinedQuery> out;
  for (const auto& [e, rels] : candidates) {
    std::vector<RolePtr> members;
    for (RelationId r : rels) members.push_back(role_name(rel(kg, r)));
    MinedQuery q;
    q.tag = rels.size() == 2 ? "2rs" : "3rs";
    q.query = exists(role_inverse(role_meet(std::move(members))), nominal(ent(kg, e)));
    q.answers = eval_concept(kg, q.query);
    out.push_back(std::move(q));
  }
  return out;
}

}  // namespace dage
