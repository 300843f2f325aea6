#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "dage/error.hpp"
#include "dage/kg_store.hpp"
#include "dage/rng.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace dage;
using dage::testing::make_kg;

namespace {

fs::path write_temp(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / ("dage_kg_" + name);
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

}  // namespace

TEST(KgStore, LoadThreeTriples) {
  const auto p = write_temp("three.tsv", "a\tr\tb\nb\tr\tc\na\ts\tc\n");
  const KnowledgeGraph kg = load_triples(p);
  EXPECT_EQ(kg.num_entities(), 3u);
  EXPECT_EQ(kg.num_relations(), 2u);
  EXPECT_EQ(kg.num_triples(), 3u);
}

TEST(KgStore, EmptyFile) {
  const KnowledgeGraph kg = load_triples(write_temp("empty.tsv", ""));
  EXPECT_EQ(kg.num_entities(), 0u);
  EXPECT_EQ(kg.num_triples(), 0u);
}

TEST(KgStore, SpacesAreAFormatError) {
  try {
    load_triples(write_temp("spaces.tsv", "a r b\n"));
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
}

TEST(KgStore, MissingFileIsIoError) {
  EXPECT_THROW(load_triples("/nonexistent/dir/graph.tsv"), IoError);
}

TEST(KgStore, QueryEdges) {
  const KnowledgeGraph kg = make_kg({{"a", "r", "b"}});
  const auto a = kg.entity_id("a"), b = kg.entity_id("b");
  const auto r = kg.relation_id("r");
  const auto fwd = kg.query_edges(a, r, false);
  ASSERT_EQ(fwd.size(), 1u);
  EXPECT_EQ(fwd[0], b);
  const auto inv = kg.query_edges(b, r, true);
  ASSERT_EQ(inv.size(), 1u);
  EXPECT_EQ(inv[0], a);
  EXPECT_TRUE(kg.query_edges(b, r, false).empty());
  EXPECT_THROW(kg.query_edges(7, r, false), UnknownId);
  EXPECT_THROW(kg.query_edges(a, 3, false), UnknownId);
}

TEST(KgStore, RelationPairs) {
  const KnowledgeGraph kg = make_kg({{"a", "r", "b"}, {"c", "r", "d"}, {"a", "s", "b"}});
  using P = std::pair<EntityId, EntityId>;
  const auto id = [&](const char* n) { return kg.entity_id(n); };
  EXPECT_EQ(kg.relation_pairs(kg.relation_id("r")), (std::vector<P>{{id("a"), id("b")}, {id("c"), id("d")}}));
  EXPECT_EQ(kg.relation_pairs(kg.relation_id("s")), (std::vector<P>{{id("a"), id("b")}}));
  EXPECT_THROW(kg.relation_pairs(9), UnknownId);
}

TEST(KgStore, RelationWithoutTriples) {
  SymbolTable e, r;
  e.intern("a");
  r.intern("r");
  r.intern("unused");
  const KnowledgeGraph kg = KnowledgeGraph::build(e, r, {{0, 0, 0}});
  EXPECT_TRUE(kg.relation_pairs(1).empty());
}

TEST(KgStore, DuplicatesCollapse) {
  const KnowledgeGraph kg = make_kg({{"a", "r", "b"}, {"a", "r", "b"}});
  EXPECT_EQ(kg.num_triples(), 1u);
}

TEST(KgStore, UnknownNames) {
  const KnowledgeGraph kg = make_kg({{"a", "r", "b"}});
  EXPECT_THROW(kg.entity_id("zz"), UnknownName);
  EXPECT_THROW(kg.relation_id("zz"), UnknownName);
}

TEST(KgStore, SharedTablesKeepIds) {
  const auto full = load_triples(write_temp("full.tsv", "a\tr\tb\nc\ts\td\n"));
  const auto train = load_triples(write_temp("train.tsv", "c\ts\td\n"), full.entities(), full.relations());
  EXPECT_EQ(train.entities().names(), full.entities().names());
  EXPECT_EQ(train.entity_id("c"), full.entity_id("c"));
  EXPECT_EQ(train.num_triples(), 1u);
}

TEST(KgStore, WriteReadRoundTrip) {
  const KnowledgeGraph kg = make_kg({{"a", "r", "b"}, {"b", "s", "c"}, {"c", "r", "a"}});
  const fs::path p = fs::temp_directory_path() / "dage_kg_roundtrip.tsv";
  write_triples(kg, p);
  const KnowledgeGraph back = load_triples(p);
  ASSERT_EQ(back.num_triples(), kg.num_triples());
  for (const Triple& t : kg.triples())
    EXPECT_TRUE(back.contains(back.entity_id(kg.entities().name(t.head)), back.relation_id(kg.relations().name(t.relation)),
                              back.entity_id(kg.entities().name(t.tail))));
}

// Every adjacency answer agrees with a scan of the triple list.
TEST(KgStore, IndexMatchesScan) {
  Rng rng = make_rng(5, "test/kg");
  std::vector<dage::testing::NamedTriple> ts;
  for (int i = 0; i < 300; ++i)
    ts.emplace_back("n" + std::to_string(uniform_index(rng, 30)), "q" + std::to_string(uniform_index(rng, 4)),
                    "n" + std::to_string(uniform_index(rng, 30)));
  const KnowledgeGraph kg = make_kg(ts);
  for (EntityId e = 0; e < kg.num_entities(); ++e)
    for (RelationId r = 0; r < kg.num_relations(); ++r)
      for (bool inv : {false, true}) {
        std::vector<EntityId> want;
        for (const Triple& t : kg.triples())
          if (t.relation == r && (inv ? t.tail : t.head) == e) want.push_back(inv ? t.head : t.tail);
        std::sort(want.begin(), want.end());
        want.erase(std::unique(want.begin(), want.end()), want.end());
        const auto got = kg.query_edges(e, r, inv);
        EXPECT_EQ(std::vector<EntityId>(got.begin(), got.end()), want);
      }
}
