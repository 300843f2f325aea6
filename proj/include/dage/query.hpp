#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace dage {

struct Role;
struct Concept;
using RolePtr = std::shared_ptr<const Role>;
using ConceptPtr = std::shared_ptr<const Concept>;

// Role descriptions: r | R- | R;S | R&S. Compose is binary; chains are
// left-associated. Meet is n-ary with at least two members.
struct Role {
  enum class Kind { Name, Inverse, Compose, Meet };
  Kind kind;
  std::string name;            // Name only
  std::vector<RolePtr> args;   // Inverse: 1, Compose: 2, Meet: >= 2
};

// Concept descriptions: {a} | not C | C & D | C | D | exists R . C.
// Or is kept explicitly instead of being expanded through negation.
struct Concept {
  enum class Kind { Nominal, Not, And, Or, Exists };
  Kind kind;
  std::string name;              // Nominal only
  RolePtr role;                  // Exists only
  std::vector<ConceptPtr> args;  // Not/Exists: 1, And/Or: >= 2
};

RolePtr role_name(std::string name);
RolePtr role_inverse(RolePtr arg);
RolePtr role_compose(RolePtr left, RolePtr right);
RolePtr role_meet(std::vector<RolePtr> args);

ConceptPtr nominal(std::string entity);
ConceptPtr negation(ConceptPtr arg);
ConceptPtr conjunction(std::vector<ConceptPtr> args);
ConceptPtr disjunction(std::vector<ConceptPtr> args);
ConceptPtr exists(RolePtr role, ConceptPtr arg);

bool equal(const RolePtr& a, const RolePtr& b);
bool equal(const ConceptPtr& a, const ConceptPtr& b);

ConceptPtr parse_concept(std::string_view text);
RolePtr parse_role(std::string_view text);
std::string render_concept(const ConceptPtr& c);
std::string render_role(const RolePtr& r);

// Pushes inverses down to role names, removes double inverses, flattens
// nested meets and left-associates composition chains.
RolePtr normalize_role(const RolePtr& r);
ConceptPtr normalize_concept(const ConceptPtr& c);

bool is_meet_free(const RolePtr& r);
bool is_tree_form(const ConceptPtr& c);
bool has_negation(const ConceptPtr& c);
bool has_disjunction(const ConceptPtr& c);

// Meet-free alternatives of a normalized role, deduplicated, in first-seen order.
std::vector<RolePtr> role_paths(const RolePtr& r);

// Tree-form upper approximation: every exists over a role with several
// paths becomes the conjunction of one exists per path.
ConceptPtr relax(const ConceptPtr& c);

// Disjunctive normal form over the union operator only: the result is a list
// of union-free concepts whose union is equivalent to c.
std::vector<ConceptPtr> to_dnf(const ConceptPtr& c);

void collect_entity_names(const ConceptPtr& c, std::vector<std::string>& out);
void collect_relation_names(const ConceptPtr& c, std::vector<std::string>& out);

nlohmann::json role_to_json(const RolePtr& r);
nlohmann::json concept_to_json(const ConceptPtr& c);
RolePtr role_from_json(const nlohmann::json& j);      // throws std::invalid_argument
ConceptPtr concept_from_json(const nlohmann::json& j);

}  // namespace dage
