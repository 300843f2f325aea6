#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace dage {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

struct Triple {
  EntityId head;
  RelationId relation;
  EntityId tail;
  auto operator<=>(const Triple&) const = default;
};

// Dense name <-> id table; ids are assigned in first-insertion order.
class SymbolTable {
 public:
  std::uint32_t intern(std::string_view name);
  std::optional<std::uint32_t> find(std::string_view name) const;
  const std::string& name(std::uint32_t id) const { return names_.at(id); }
  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> ids_;
};

// Immutable triple store with CSR-style forward and inverse adjacency.
// Inverse roles are a lookup direction, never separate relation ids.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  // Triples are deduplicated; order of the input does not matter for the
  // indexes but does fix nothing about ids (the tables are given).
  static KnowledgeGraph build(SymbolTable entities, SymbolTable relations,
                              std::vector<Triple> triples);

  std::size_t num_entities() const noexcept { return entities_.size(); }
  std::size_t num_relations() const noexcept { return relations_.size(); }
  std::size_t num_triples() const noexcept { return triples_.size(); }

  const SymbolTable& entities() const noexcept { return entities_; }
  const SymbolTable& relations() const noexcept { return relations_; }
  // Sorted by (head, relation, tail).
  std::span<const Triple> triples() const noexcept { return triples_; }

  // Sorted neighbours: tails of (entity, relation) when !inverse, heads of
  // (.., relation, entity) when inverse.
  std::span<const EntityId> query_edges(EntityId entity, RelationId relation,
                                        bool inverse) const;
  std::vector<std::pair<EntityId, EntityId>> relation_pairs(RelationId relation) const;
  bool contains(EntityId head, RelationId relation, EntityId tail) const;

  EntityId entity_id(std::string_view name) const;      // throws UnknownName
  RelationId relation_id(std::string_view name) const;  // throws UnknownName

 private:
  void check_ids(EntityId entity, RelationId relation) const;

  SymbolTable entities_;
  SymbolTable relations_;
  std::vector<Triple> triples_;
  // CSR keyed by entity * num_relations + relation.
  std::vector<std::uint32_t> fwd_offsets_, inv_offsets_;
  std::vector<EntityId> fwd_targets_, inv_targets_;
};

KnowledgeGraph load_triples(const std::filesystem::path& path);

// Reads a graph using existing symbol tables as a prefix, so a held-out split
// shares ids with its training graph. New names are appended.
KnowledgeGraph load_triples(const std::filesystem::path& path, SymbolTable entities,
                            SymbolTable relations);

void write_triples(const KnowledgeGraph& kg, const std::filesystem::path& path);

}  // namespace dage
