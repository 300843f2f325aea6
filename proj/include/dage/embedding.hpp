#pragma once

#include <vector>

#include "dage/geometry.hpp"
#include "dage/kg_store.hpp"
#include "dage/query.hpp"

namespace dage {

// Names in queries are resolved against these tables.
struct Vocabulary {
  const SymbolTable* entities = nullptr;
  const SymbolTable* relations = nullptr;
  EntityId entity(const std::string& name) const;      // UnknownName
  RelationId relation(const std::string& name) const;  // UnknownName
};

// A role meet met while embedding: `input` is the embedding the meet is
// applied to, `members` the member role vectors and `result` the embedding
// through the combined role.
struct MeetSite {
  QueryEmb input;
  std::vector<Var> members;
  QueryEmb result;
};

struct Embedding {
  std::vector<QueryEmb> disjuncts;  // one per DNF disjunct
  std::vector<MeetSite> meets;
};

struct EmbedOptions {
  bool relaxed = false;  // embed relax(c) instead of c; no meet is combined then
};

Embedding embed_query(Tape& t, ModelParams& m, const Vocabulary& vocab, const ConceptPtr& c,
                      const EmbedOptions& options = {});

// Vector for a normalized role inside a meet: rows for (inverse) names,
// rcompose for compositions, rcombine for nested meets.
Var embed_role(Tape& t, ModelParams& m, const Vocabulary& vocab, const RolePtr& r);

// Minimum distance over the disjuncts.
Var score(Tape& t, ModelParams& m, EntityId e, const Embedding& q);

}  // namespace dage
