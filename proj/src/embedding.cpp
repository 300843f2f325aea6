#include "dage/embedding.hpp"

#include "dage/error.hpp"

namespace dage {

EntityId Vocabulary::entity(const std::string& name) const {
  auto id = entities->find(name);
  if (!id) throw UnknownName(name);
  return *id;
}

RelationId Vocabulary::relation(const std::string& name) const {
  auto id = relations->find(name);
  if (!id) throw UnknownName(name);
  return *id;
}

namespace {

// The stored rows move along triples: row 2r from head to tail, row 2r+1 back.
// exists r . C collects heads of C, so a bare name uses the backward row.
Var atom(Tape& t, ModelParams& m, const Vocabulary& vocab, const RolePtr& r) {
  if (r->kind == Role::Kind::Name) return role_vec(t, m, vocab.relation(r->name), true);
  return role_vec(t, m, vocab.relation(r->args[0]->name), false);
}

class Embedder {
 public:
  Embedder(Tape& t, ModelParams& m, const Vocabulary& v, std::vector<MeetSite>& meets)
      : t_(t), m_(m), vocab_(v), meets_(meets) {}

  QueryEmb concept_emb(const ConceptPtr& c) {
    switch (c->kind) {
      case Concept::Kind::Nominal:
        return nominal(t_, m_, vocab_.entity(c->name));
      case Concept::Kind::Not:
        return complement(t_, m_, concept_emb(c->args[0]));
      case Concept::Kind::And: {
        std::vector<QueryEmb> parts;
        for (const auto& a : c->args) parts.push_back(concept_emb(a));
        return intersect(t_, m_, parts);
      }
      case Concept::Kind::Exists:
        return apply(concept_emb(c->args[0]), c->role);
      case Concept::Kind::Or:
        break;
    }
    throw Error("InvalidInput", "union below the top level after DNF expansion");
  }

 private:
  // exists R . C from the embedding of C; compositions apply right to left.
  QueryEmb apply(const QueryEmb& q, const RolePtr& r) {
    switch (r->kind) {
      case Role::Kind::Name:
      case Role::Kind::Inverse:
        return rel_transform(t_, m_, q, atom(t_, m_, vocab_, r));
      case Role::Kind::Compose:
        return apply(apply(q, r->args[1]), r->args[0]);
      case Role::Kind::Meet: {
        MeetSite site;
        site.input = q;
        for (const auto& a : r->args) site.members.push_back(embed_role(t_, m_, vocab_, a));
        site.result = rel_transform(t_, m_, q, rcombine(t_, m_, site.members));
        meets_.push_back(site);
        return site.result;
      }
    }
    return q;
  }

  Tape& t_;
  ModelParams& m_;
  const Vocabulary& vocab_;
  std::vector<MeetSite>& meets_;
};

}  // namespace

Var embed_role(Tape& t, ModelParams& m, const Vocabulary& vocab, const RolePtr& r) {
  switch (r->kind) {
    case Role::Kind::Name:
    case Role::Kind::Inverse:
      return atom(t, m, vocab, r);
    case Role::Kind::Compose:
      return rcompose(t, m, embed_role(t, m, vocab, r->args[1]), embed_role(t, m, vocab, r->args[0]));
    case Role::Kind::Meet: {
      std::vector<Var> members;
      for (const auto& a : r->args) members.push_back(embed_role(t, m, vocab, a));
      return rcombine(t, m, members);
    }
  }
  return {};
}

Embedding embed_query(Tape& t, ModelParams& m, const Vocabulary& vocab, const ConceptPtr& c,
                      const EmbedOptions& options) {
  ConceptPtr q = normalize_concept(c);
  if (options.relaxed) q = relax(q);
  Embedding out;
  Embedder e(t, m, vocab, out.meets);
  for (const auto& d : to_dnf(q)) out.disjuncts.push_back(e.concept_emb(d));
  return out;
}

Var score(Tape& t, ModelParams& m, EntityId e, const Embedding& q) {
  Var point = entity_point(t, m, e);
  Var best = distance(t, m, point, q.disjuncts[0]);
  for (std::size_t i = 1; i < q.disjuncts.size(); ++i) best = min(best, distance(t, m, point, q.disjuncts[i]));
  return best;
}

}  // namespace dage
