#include "dage/kg_store.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "dage/error.hpp"

namespace dage {

std::uint32_t SymbolTable::intern(std::string_view name) {
  auto it = ids_.find(std::string(name));
  if (it != ids_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(names_.size());
  names_.emplace_back(name);
  ids_.emplace(names_.back(), id);
  return id;
}

std::optional<std::uint32_t> SymbolTable::find(std::string_view name) const {
  auto it = ids_.find(std::string(name));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

namespace {

void build_csr(std::size_t buckets, const std::vector<std::pair<std::size_t, EntityId>>& keyed,
               std::vector<std::uint32_t>& offsets, std::vector<EntityId>& targets) {
  offsets.assign(buckets + 1, 0);
  for (const auto& [key, _] : keyed) ++offsets[key + 1];
  for (std::size_t i = 0; i < buckets; ++i) offsets[i + 1] += offsets[i];
  targets.resize(keyed.size());
  std::vector<std::uint32_t> fill(offsets.begin(), offsets.end() - 1);
  for (const auto& [key, value] : keyed) targets[fill[key]++] = value;
  for (std::size_t i = 0; i < buckets; ++i)
    std::sort(targets.begin() + offsets[i], targets.begin() + offsets[i + 1]);
}

}  // namespace

KnowledgeGraph KnowledgeGraph::build(SymbolTable entities, SymbolTable relations,
                                     std::vector<Triple> triples) {
  KnowledgeGraph kg;
  kg.entities_ = std::move(entities);
  kg.relations_ = std::move(relations);
  std::sort(triples.begin(), triples.end());
  triples.erase(std::unique(triples.begin(), triples.end()), triples.end());
  for (const auto& t : triples) {
    if (t.head >= kg.entities_.size() || t.tail >= kg.entities_.size() ||
        t.relation >= kg.relations_.size())
      throw UnknownId("triple references an id outside the symbol tables");
  }
  kg.triples_ = std::move(triples);

  const std::size_t nr = kg.relations_.size();
  const std::size_t buckets = kg.entities_.size() * nr;
  std::vector<std::pair<std::size_t, EntityId>> fwd, inv;
  fwd.reserve(kg.triples_.size());
  inv.reserve(kg.triples_.size());
  for (const auto& t : kg.triples_) {
    fwd.emplace_back(std::size_t{t.head} * nr + t.relation, t.tail);
    inv.emplace_back(std::size_t{t.tail} * nr + t.relation, t.head);
  }
  build_csr(buckets, fwd, kg.fwd_offsets_, kg.fwd_targets_);
  build_csr(buckets, inv, kg.inv_offsets_, kg.inv_targets_);
  return kg;
}

void KnowledgeGraph::check_ids(EntityId entity, RelationId relation) const {
  if (entity >= num_entities())
    throw UnknownId("entity id " + std::to_string(entity));
  if (relation >= num_relations())
    throw UnknownId("relation id " + std::to_string(relation));
}

std::span<const EntityId> KnowledgeGraph::query_edges(EntityId entity, RelationId relation,
                                                      bool inverse) const {
  check_ids(entity, relation);
  const std::size_t key = std::size_t{entity} * num_relations() + relation;
  const auto& offsets = inverse ? inv_offsets_ : fwd_offsets_;
  const auto& targets = inverse ? inv_targets_ : fwd_targets_;
  return {targets.data() + offsets[key], targets.data() + offsets[key + 1]};
}

std::vector<std::pair<EntityId, EntityId>> KnowledgeGraph::relation_pairs(
    RelationId relation) const {
  if (relation >= num_relations()) throw UnknownId("relation id " + std::to_string(relation));
  std::vector<std::pair<EntityId, EntityId>> out;
  for (const auto& t : triples_)
    if (t.relation == relation) out.emplace_back(t.head, t.tail);
  return out;  // triples_ is sorted by head first, so pairs are sorted
}

bool KnowledgeGraph::contains(EntityId head, RelationId relation, EntityId tail) const {
  auto tails = query_edges(head, relation, false);
  return std::binary_search(tails.begin(), tails.end(), tail);
}

EntityId KnowledgeGraph::entity_id(std::string_view name) const {
  if (auto id = entities_.find(name)) return *id;
  throw UnknownName(std::string(name));
}

RelationId KnowledgeGraph::relation_id(std::string_view name) const {
  if (auto id = relations_.find(name)) return *id;
  throw UnknownName(std::string(name));
}

KnowledgeGraph load_triples(const std::filesystem::path& path) {
  return load_triples(path, SymbolTable{}, SymbolTable{});
}

KnowledgeGraph load_triples(const std::filesystem::path& path, SymbolTable entities,
                            SymbolTable relations) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<Triple> triples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto first = line.find('\t');
    const auto second = first == std::string::npos ? first : line.find('\t', first + 1);
    if (second == std::string::npos || line.find('\t', second + 1) != std::string::npos)
      throw FormatError(line_no, "expected head<TAB>relation<TAB>tail");
    const std::string_view view(line);
    const auto head = view.substr(0, first);
    const auto rel = view.substr(first + 1, second - first - 1);
    const auto tail = view.substr(second + 1);
    if (head.empty() || rel.empty() || tail.empty())
      throw FormatError(line_no, "empty field");
    const EntityId h = entities.intern(head);
    const RelationId r = relations.intern(rel);
    const EntityId t = entities.intern(tail);
    triples.push_back({h, r, t});
  }
  if (in.bad()) throw IoError("read failure on " + path.string());
  return KnowledgeGraph::build(std::move(entities), std::move(relations), std::move(triples));
}

void write_triples(const KnowledgeGraph& kg, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& t : kg.triples())
    out << kg.entities().name(t.head) << '\t' << kg.relations().name(t.relation) << '\t'
        << kg.entities().name(t.tail) << '\n';
  if (!out) throw IoError("write failure on " + path.string());
}

}  // namespace dage
