#include "dage/query.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <unordered_set>

#include "dage/error.hpp"

namespace dage {

RolePtr role_name(std::string name) {
  if (name.empty()) throw std::invalid_argument("empty role name");
  return std::make_shared<const Role>(Role{Role::Kind::Name, std::move(name), {}});
}

RolePtr role_inverse(RolePtr arg) {
  return std::make_shared<const Role>(Role{Role::Kind::Inverse, {}, {std::move(arg)}});
}

RolePtr role_compose(RolePtr left, RolePtr right) {
  return std::make_shared<const Role>(
      Role{Role::Kind::Compose, {}, {std::move(left), std::move(right)}});
}

RolePtr role_meet(std::vector<RolePtr> args) {
  if (args.size() < 2) throw std::invalid_argument("meet needs at least two roles");
  return std::make_shared<const Role>(Role{Role::Kind::Meet, {}, std::move(args)});
}

ConceptPtr nominal(std::string entity) {
  if (entity.empty()) throw std::invalid_argument("empty entity name");
  return std::make_shared<const Concept>(
      Concept{Concept::Kind::Nominal, std::move(entity), nullptr, {}});
}

ConceptPtr negation(ConceptPtr arg) {
  return std::make_shared<const Concept>(Concept{Concept::Kind::Not, {}, nullptr, {std::move(arg)}});
}

ConceptPtr conjunction(std::vector<ConceptPtr> args) {
  if (args.size() < 2) throw std::invalid_argument("conjunction needs at least two concepts");
  return std::make_shared<const Concept>(Concept{Concept::Kind::And, {}, nullptr, std::move(args)});
}

ConceptPtr disjunction(std::vector<ConceptPtr> args) {
  if (args.size() < 2) throw std::invalid_argument("disjunction needs at least two concepts");
  return std::make_shared<const Concept>(Concept{Concept::Kind::Or, {}, nullptr, std::move(args)});
}

ConceptPtr exists(RolePtr role, ConceptPtr arg) {
  return std::make_shared<const Concept>(
      Concept{Concept::Kind::Exists, {}, std::move(role), {std::move(arg)}});
}

bool equal(const RolePtr& a, const RolePtr& b) {
  if (a == b) return true;
  if (a->kind != b->kind || a->name != b->name || a->args.size() != b->args.size()) return false;
  for (std::size_t i = 0; i < a->args.size(); ++i)
    if (!equal(a->args[i], b->args[i])) return false;
  return true;
}

bool equal(const ConceptPtr& a, const ConceptPtr& b) {
  if (a == b) return true;
  if (a->kind != b->kind || a->name != b->name || a->args.size() != b->args.size()) return false;
  if (a->kind == Concept::Kind::Exists && !equal(a->role, b->role)) return false;
  for (std::size_t i = 0; i < a->args.size(); ++i)
    if (!equal(a->args[i], b->args[i])) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

enum class Tok { LBrace, RBrace, LParen, RParen, Amp, Bar, Semi, Dot, Ident, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '/' ||
         c == ':' || c == '-';
}

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    Tok single = Tok::End;
    switch (c) {
      case '{': single = Tok::LBrace; break;
      case '}': single = Tok::RBrace; break;
      case '(': single = Tok::LParen; break;
      case ')': single = Tok::RParen; break;
      case '&': single = Tok::Amp; break;
      case '|': single = Tok::Bar; break;
      case ';': single = Tok::Semi; break;
      default: break;
    }
    if (single != Tok::End) {
      out.push_back({single, std::string(1, c), i});
      ++i;
      continue;
    }
    if (!ident_char(c)) throw ParseError(i, "a token (unexpected character '" + std::string(1, c) + "')");
    const std::size_t start = i;
    while (i < s.size() && ident_char(s[i])) ++i;
    std::string text(s.substr(start, i - start));
    out.push_back({text == "." ? Tok::Dot : Tok::Ident, std::move(text), start});
  }
  out.push_back({Tok::End, "", s.size()});
  return out;
}

bool is_keyword(const std::string& t) { return t == "exists" || t == "not" || t == "inv"; }

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(lex(text)) {}

  ConceptPtr concept_top() {
    auto c = or_c();
    expect(Tok::End, "end of input");
    return c;
  }

  RolePtr role_top() {
    auto r = role();
    expect(Tok::End, "end of input");
    return r;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  bool at_keyword(const char* kw) const {
    return peek().kind == Tok::Ident && peek().text == kw;
  }
  const Token& take() { return toks_[pos_++]; }
  void expect(Tok kind, const char* what) {
    if (peek().kind != kind) throw ParseError(peek().pos, what);
    ++pos_;
  }

  ConceptPtr or_c() {
    std::vector<ConceptPtr> items{and_c()};
    while (peek().kind == Tok::Bar) {
      take();
      items.push_back(and_c());
    }
    return items.size() == 1 ? items.front() : disjunction(std::move(items));
  }

  ConceptPtr and_c() {
    std::vector<ConceptPtr> items{unary_c()};
    while (peek().kind == Tok::Amp) {
      take();
      items.push_back(unary_c());
    }
    return items.size() == 1 ? items.front() : conjunction(std::move(items));
  }

  ConceptPtr unary_c() {
    const Token& t = peek();
    if (t.kind == Tok::LBrace) {
      take();
      if (peek().kind != Tok::Ident) throw ParseError(peek().pos, "entity name");
      std::string name = take().text;
      expect(Tok::RBrace, "'}'");
      return nominal(std::move(name));
    }
    if (t.kind == Tok::LParen) {
      take();
      auto c = or_c();
      expect(Tok::RParen, "')'");
      return c;
    }
    if (at_keyword("not")) {
      take();
      return negation(unary_c());
    }
    if (at_keyword("exists")) {
      take();
      auto r = role();
      expect(Tok::Dot, "'.' after role");
      return exists(std::move(r), unary_c());
    }
    throw ParseError(t.pos, "'{', '(', 'not' or 'exists'");
  }

  RolePtr role() {
    std::vector<RolePtr> items{comp_r()};
    while (peek().kind == Tok::Amp) {
      take();
      items.push_back(comp_r());
    }
    return items.size() == 1 ? items.front() : role_meet(std::move(items));
  }

  RolePtr comp_r() {
    RolePtr acc = inv_r();
    while (peek().kind == Tok::Semi) {
      take();
      acc = role_compose(std::move(acc), inv_r());
    }
    return acc;
  }

  RolePtr inv_r() {
    const Token& t = peek();
    if (t.kind == Tok::LParen) {
      take();
      auto r = role();
      expect(Tok::RParen, "')'");
      return r;
    }
    if (at_keyword("inv")) {
      take();
      return role_inverse(inv_r());
    }
    if (t.kind == Tok::Ident && !is_keyword(t.text)) return role_name(take().text);
    throw ParseError(t.pos, "relation name, 'inv' or '('");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

ConceptPtr parse_concept(std::string_view text) { return Parser(text).concept_top(); }
RolePtr parse_role(std::string_view text) { return Parser(text).role_top(); }

// ---------------------------------------------------------------------------
// Printer

std::string render_role(const RolePtr& r) {
  auto wrapped = [](const RolePtr& x) {
    return x->kind == Role::Kind::Name ? x->name : "(" + render_role(x) + ")";
  };
  switch (r->kind) {
    case Role::Kind::Name:
      return r->name;
    case Role::Kind::Inverse:
      return "inv " + wrapped(r->args[0]);
    case Role::Kind::Compose: {
      auto operand = [&](const RolePtr& x) {
        return x->kind == Role::Kind::Compose || x->kind == Role::Kind::Meet
                   ? "(" + render_role(x) + ")"
                   : render_role(x);
      };
      return operand(r->args[0]) + " ; " + operand(r->args[1]);
    }
    case Role::Kind::Meet: {
      std::string out;
      for (std::size_t i = 0; i < r->args.size(); ++i) {
        if (i) out += " & ";
        const auto& a = r->args[i];
        out += a->kind == Role::Kind::Meet ? "(" + render_role(a) + ")" : render_role(a);
      }
      return out;
    }
  }
  return {};
}

std::string render_concept(const ConceptPtr& c) {
  auto unary = [](const ConceptPtr& x) {
    return x->kind == Concept::Kind::And || x->kind == Concept::Kind::Or
               ? "(" + render_concept(x) + ")"
               : render_concept(x);
  };
  switch (c->kind) {
    case Concept::Kind::Nominal:
      return "{" + c->name + "}";
    case Concept::Kind::Not:
      return "not " + unary(c->args[0]);
    case Concept::Kind::Exists: {
      const auto& r = c->role;
      std::string role_text =
          r->kind == Role::Kind::Name ? r->name : "(" + render_role(r) + ")";
      return "exists " + role_text + " . " + unary(c->args[0]);
    }
    case Concept::Kind::And:
    case Concept::Kind::Or: {
      const bool is_and = c->kind == Concept::Kind::And;
      std::string out;
      for (std::size_t i = 0; i < c->args.size(); ++i) {
        if (i) out += is_and ? " & " : " | ";
        const auto& a = c->args[i];
        const bool paren = a->kind == Concept::Kind::Or || (is_and && a->kind == Concept::Kind::And);
        out += paren ? "(" + render_concept(a) + ")" : render_concept(a);
      }
      return out;
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Normalization

namespace {

RolePtr invert_normalized(const RolePtr& r);

void compose_factors(const RolePtr& r, std::vector<RolePtr>& out) {
  if (r->kind == Role::Kind::Compose) {
    compose_factors(r->args[0], out);
    compose_factors(r->args[1], out);
  } else {
    out.push_back(r);
  }
}

RolePtr chain(const std::vector<RolePtr>& factors) {
  RolePtr acc = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) acc = role_compose(acc, factors[i]);
  return acc;
}

RolePtr meet_flat(const std::vector<RolePtr>& members) {
  std::vector<RolePtr> flat;
  for (const auto& m : members) {
    if (m->kind == Role::Kind::Meet)
      flat.insert(flat.end(), m->args.begin(), m->args.end());
    else
      flat.push_back(m);
  }
  return role_meet(std::move(flat));
}

RolePtr invert_normalized(const RolePtr& r) {
  switch (r->kind) {
    case Role::Kind::Name:
      return role_inverse(r);
    case Role::Kind::Inverse:
      return r->args[0];
    case Role::Kind::Compose: {
      std::vector<RolePtr> factors;
      compose_factors(r, factors);
      std::vector<RolePtr> inverted;
      for (auto it = factors.rbegin(); it != factors.rend(); ++it)
        inverted.push_back(invert_normalized(*it));
      std::vector<RolePtr> flat;
      for (const auto& f : inverted) compose_factors(f, flat);
      return chain(flat);
    }
    case Role::Kind::Meet: {
      std::vector<RolePtr> members;
      for (const auto& m : r->args) members.push_back(invert_normalized(m));
      return meet_flat(members);
    }
  }
  return r;
}

}  // namespace

RolePtr normalize_role(const RolePtr& r) {
  switch (r->kind) {
    case Role::Kind::Name:
      return r;
    case Role::Kind::Inverse:
      return invert_normalized(normalize_role(r->args[0]));
    case Role::Kind::Compose: {
      std::vector<RolePtr> factors;
      compose_factors(role_compose(normalize_role(r->args[0]), normalize_role(r->args[1])),
                      factors);
      return chain(factors);
    }
    case Role::Kind::Meet: {
      std::vector<RolePtr> members;
      for (const auto& m : r->args) members.push_back(normalize_role(m));
      return meet_flat(members);
    }
  }
  return r;
}

ConceptPtr normalize_concept(const ConceptPtr& c) {
  switch (c->kind) {
    case Concept::Kind::Nominal:
      return c;
    case Concept::Kind::Not:
      return negation(normalize_concept(c->args[0]));
    case Concept::Kind::Exists:
      return exists(normalize_role(c->role), normalize_concept(c->args[0]));
    case Concept::Kind::And:
    case Concept::Kind::Or: {
      std::vector<ConceptPtr> args;
      for (const auto& a : c->args) args.push_back(normalize_concept(a));
      return c->kind == Concept::Kind::And ? conjunction(std::move(args))
                                           : disjunction(std::move(args));
    }
  }
  return c;
}

bool is_meet_free(const RolePtr& r) {
  if (r->kind == Role::Kind::Meet) return false;
  return std::all_of(r->args.begin(), r->args.end(), [](const RolePtr& a) { return is_meet_free(a); });
}

bool is_tree_form(const ConceptPtr& c) {
  if (c->kind == Concept::Kind::Exists && !is_meet_free(c->role)) return false;
  return std::all_of(c->args.begin(), c->args.end(), [](const ConceptPtr& a) { return is_tree_form(a); });
}

bool has_negation(const ConceptPtr& c) {
  if (c->kind == Concept::Kind::Not) return true;
  return std::any_of(c->args.begin(), c->args.end(), [](const ConceptPtr& a) { return has_negation(a); });
}

bool has_disjunction(const ConceptPtr& c) {
  if (c->kind == Concept::Kind::Or) return true;
  return std::any_of(c->args.begin(), c->args.end(),
                     [](const ConceptPtr& a) { return has_disjunction(a); });
}

std::vector<RolePtr> role_paths(const RolePtr& r) {
  std::vector<RolePtr> out;
  std::unordered_set<std::string> seen;
  auto add = [&](RolePtr p) {
    if (seen.insert(render_role(p)).second) out.push_back(std::move(p));
  };
  switch (r->kind) {
    case Role::Kind::Name:
      add(r);
      break;
    case Role::Kind::Inverse:
      for (auto& q : role_paths(r->args[0])) add(role_inverse(std::move(q)));
      break;
    case Role::Kind::Compose: {
      const auto left = role_paths(r->args[0]);
      const auto right = role_paths(r->args[1]);
      for (const auto& a : left)
        for (const auto& b : right) {
          std::vector<RolePtr> factors;
          compose_factors(role_compose(a, b), factors);
          add(chain(factors));
        }
      break;
    }
    case Role::Kind::Meet:
      for (const auto& m : r->args)
        for (auto& q : role_paths(m)) add(std::move(q));
      break;
  }
  return out;
}

ConceptPtr relax(const ConceptPtr& c) {
  switch (c->kind) {
    case Concept::Kind::Nominal:
      return c;
    case Concept::Kind::Not: {
      auto a = relax(c->args[0]);
      return a == c->args[0] ? c : negation(std::move(a));
    }
    case Concept::Kind::And:
    case Concept::Kind::Or: {
      std::vector<ConceptPtr> args;
      bool changed = false;
      for (const auto& a : c->args) {
        args.push_back(relax(a));
        changed |= args.back() != a;
      }
      if (!changed) return c;
      return c->kind == Concept::Kind::And ? conjunction(std::move(args))
                                           : disjunction(std::move(args));
    }
    case Concept::Kind::Exists: {
      auto inner = relax(c->args[0]);
      if (is_meet_free(c->role))
        return inner == c->args[0] ? c : exists(c->role, std::move(inner));
      auto paths = role_paths(normalize_role(c->role));
      if (paths.size() == 1) return exists(paths.front(), std::move(inner));
      std::vector<ConceptPtr> parts;
      for (auto& p : paths) parts.push_back(exists(std::move(p), inner));
      return conjunction(std::move(parts));
    }
  }
  return c;
}

std::vector<ConceptPtr> to_dnf(const ConceptPtr& c) {
  switch (c->kind) {
    case Concept::Kind::Nominal:
      return {c};
    case Concept::Kind::Or: {
      std::vector<ConceptPtr> out;
      for (const auto& a : c->args) {
        auto d = to_dnf(a);
        out.insert(out.end(), d.begin(), d.end());
      }
      return out;
    }
    case Concept::Kind::Exists: {
      auto d = to_dnf(c->args[0]);
      if (d.size() == 1 && d.front() == c->args[0]) return {c};
      std::vector<ConceptPtr> out;
      for (auto& x : d) out.push_back(exists(c->role, std::move(x)));
      return out;
    }
    case Concept::Kind::Not: {
      auto d = to_dnf(c->args[0]);
      if (d.size() == 1) return {d.front() == c->args[0] ? c : negation(d.front())};
      std::vector<ConceptPtr> negs;
      for (auto& x : d) negs.push_back(negation(std::move(x)));
      return {conjunction(std::move(negs))};
    }
    case Concept::Kind::And: {
      std::vector<std::vector<ConceptPtr>> parts;
      for (const auto& a : c->args) parts.push_back(to_dnf(a));
      std::vector<std::vector<ConceptPtr>> combos{{}};
      for (const auto& options : parts) {
        std::vector<std::vector<ConceptPtr>> next;
        for (const auto& prefix : combos)
          for (const auto& o : options) {
            auto extended = prefix;
            extended.push_back(o);
            next.push_back(std::move(extended));
          }
        combos = std::move(next);
      }
      if (combos.size() == 1) {
        bool unchanged = true;
        for (std::size_t i = 0; i < c->args.size(); ++i) unchanged &= combos[0][i] == c->args[i];
        if (unchanged) return {c};
      }
      std::vector<ConceptPtr> out;
      for (auto& combo : combos) out.push_back(conjunction(std::move(combo)));
      return out;
    }
  }
  return {c};
}

namespace {
void collect_role_names(const RolePtr& r, std::vector<std::string>& out) {
  if (r->kind == Role::Kind::Name) out.push_back(r->name);
  for (const auto& a : r->args) collect_role_names(a, out);
}
}  // namespace

void collect_entity_names(const ConceptPtr& c, std::vector<std::string>& out) {
  if (c->kind == Concept::Kind::Nominal) out.push_back(c->name);
  for (const auto& a : c->args) collect_entity_names(a, out);
}

void collect_relation_names(const ConceptPtr& c, std::vector<std::string>& out) {
  if (c->kind == Concept::Kind::Exists) collect_role_names(c->role, out);
  for (const auto& a : c->args) collect_relation_names(a, out);
}

}  // namespace dage
