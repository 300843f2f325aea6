#include <stdexcept>

#include "dage/query.hpp"

namespace dage {

using nlohmann::json;

namespace {

void flatten_compose(const RolePtr& r, json& out) {
  if (r->kind == Role::Kind::Compose) {
    flatten_compose(r->args[0], out);
    flatten_compose(r->args[1], out);
  } else {
    out.push_back(role_to_json(r));
  }
}

const json& field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw std::invalid_argument(std::string("missing field '") + key + "'");
  return *it;
}

std::string op_of(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("AST node is not an object");
  const json& op = field(j, "op");
  if (!op.is_string()) throw std::invalid_argument("'op' is not a string");
  return op.get<std::string>();
}

const json& array_field(const json& j, const char* key, std::size_t min_size) {
  const json& a = field(j, key);
  if (!a.is_array() || a.size() < min_size)
    throw std::invalid_argument(std::string("'") + key + "' needs at least " +
                                std::to_string(min_size) + " elements");
  return a;
}

std::string string_field(const json& j, const char* key) {
  const json& s = field(j, key);
  if (!s.is_string() || s.get<std::string>().empty())
    throw std::invalid_argument(std::string("'") + key + "' is not a nonempty string");
  return s.get<std::string>();
}

}  // namespace

json role_to_json(const RolePtr& r) {
  switch (r->kind) {
    case Role::Kind::Name:
      return {{"op", "rel"}, {"name", r->name}};
    case Role::Kind::Inverse:
      return {{"op", "inv"}, {"arg", role_to_json(r->args[0])}};
    case Role::Kind::Compose: {
      json args = json::array();
      flatten_compose(r, args);
      return {{"op", "comp"}, {"args", std::move(args)}};
    }
    case Role::Kind::Meet: {
      json args = json::array();
      for (const auto& a : r->args) args.push_back(role_to_json(a));
      return {{"op", "meet"}, {"args", std::move(args)}};
    }
  }
  return {};
}

json concept_to_json(const ConceptPtr& c) {
  switch (c->kind) {
    case Concept::Kind::Nominal:
      return {{"op", "nominal"}, {"entity", c->name}};
    case Concept::Kind::Not:
      return {{"op", "not"}, {"arg", concept_to_json(c->args[0])}};
    case Concept::Kind::Exists:
      return {{"op", "exists"}, {"role", role_to_json(c->role)}, {"arg", concept_to_json(c->args[0])}};
    case Concept::Kind::And:
    case Concept::Kind::Or: {
      json args = json::array();
      for (const auto& a : c->args) args.push_back(concept_to_json(a));
      return {{"op", c->kind == Concept::Kind::And ? "and" : "or"}, {"args", std::move(args)}};
    }
  }
  return {};
}

// Composition arrays are folded to the left, matching the parser.
RolePtr role_from_json(const json& j) {
  const std::string op = op_of(j);
  if (op == "rel") return role_name(string_field(j, "name"));
  if (op == "inv") return role_inverse(role_from_json(field(j, "arg")));
  if (op == "comp") {
    const json& args = array_field(j, "args", 2);
    RolePtr acc = role_from_json(args[0]);
    for (std::size_t i = 1; i < args.size(); ++i) acc = role_compose(acc, role_from_json(args[i]));
    return acc;
  }
  if (op == "meet") {
    std::vector<RolePtr> members;
    for (const auto& a : array_field(j, "args", 2)) members.push_back(role_from_json(a));
    return role_meet(std::move(members));
  }
  throw std::invalid_argument("unknown role op '" + op + "'");
}

ConceptPtr concept_from_json(const json& j) {
  const std::string op = op_of(j);
  if (op == "nominal") return nominal(string_field(j, "entity"));
  if (op == "not") return negation(concept_from_json(field(j, "arg")));
  if (op == "exists") return exists(role_from_json(field(j, "role")), concept_from_json(field(j, "arg")));
  if (op == "and" || op == "or") {
    std::vector<ConceptPtr> args;
    for (const auto& a : array_field(j, "args", 2)) args.push_back(concept_from_json(a));
    return op == "and" ? conjunction(std::move(args)) : disjunction(std::move(args));
  }
  throw std::invalid_argument("unknown concept op '" + op + "'");
}

}  // namespace dage
