#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dval/error.hpp"
#include "dval/pddl/model.hpp"
#include "dval/pddl/sexpr.hpp"
#include "dval/pddl/validate.hpp"

namespace dval::pddl {

// Result of a tolerant parse: constructs outside typed STRIPS are reported
// as UnsupportedFeature violations and skipped instead of aborting.
struct ParseResult {
  DomainModel model;
  std::vector<Violation> unsupported;
};

namespace detail {

class DomainParser {
 public:
  ParseResult parse(std::string_view text) {
    std::vector<SExpr> top = read_sexprs(text);
    if (top.empty()) throw SyntaxError({1, 1}, "(define (domain ...) ...)");
    if (top.size() > 1) throw SyntaxError(top[1].loc, "end of input after domain definition");
    const SExpr& def = top.front();
    if (def.head() != "define") throw SyntaxError(def.loc, "(define ...)");
    if (def.items.size() < 2 || def.items[1].head() != "domain" ||
        def.items[1].items.size() != 2 || !def.items[1].items[1].is_symbol()) {
      throw SyntaxError(def.items.size() > 1 ? def.items[1].loc : def.loc, "(domain <name>)");
    }
    result_.model.name = def.items[1].items[1].symbol;

    for (std::size_t i = 2; i < def.items.size(); ++i) section(def.items[i]);
    return std::move(result_);
  }

 private:
  void unsupported(std::string construct, const SExpr& at) {
    result_.unsupported.push_back(
        {"UnsupportedFeature", construct, "construct '" + construct + "' is outside typed STRIPS",
         at.loc});
  }

  static const SExpr& expect_list(const SExpr& e, const char* what) {
    if (!e.is_list) throw SyntaxError(e.loc, what);
    return e;
  }

  void section(const SExpr& s) {
    std::string_view head = expect_list(s, "domain section").head();
    if (head == ":requirements") {
      for (std::size_t i = 1; i < s.items.size(); ++i) {
        const SExpr& r = s.items[i];
        if (!r.is_symbol()) throw SyntaxError(r.loc, "requirement keyword");
        if (r.symbol == ":strips" || r.symbol == ":typing") {
          result_.model.requirements.push_back(r.symbol);
        } else {
          unsupported("requirement " + r.symbol, r);
        }
      }
    } else if (head == ":types") {
      types(s);
    } else if (head == ":predicates") {
      for (std::size_t i = 1; i < s.items.size(); ++i) predicate(s.items[i]);
    } else if (head == ":action") {
      action(s);
    } else if (head == ":constants") {
      unsupported("constants", s);
    } else if (head == ":functions") {
      unsupported("numeric-fluents", s);
    } else if (head == ":derived") {
      unsupported("axioms", s);
    } else if (head == ":durative-action") {
      unsupported("durative-actions", s);
    } else {
      throw SyntaxError(s.loc, "domain section keyword, found '" + std::string(head) + "'");
    }
  }

  // Parses "a b - t c - u d" style lists. Untyped entries get the root type.
  template <typename Emit>
  void typed_list(const std::vector<SExpr>& items, std::size_t from, Emit emit) {
    std::vector<const SExpr*> pending;
    for (std::size_t i = from; i < items.size(); ++i) {
      const SExpr& e = items[i];
      if (e.is_symbol("-")) {
        if (i + 1 >= items.size()) throw SyntaxError(e.loc, "type after '-'");
        const SExpr& t = items[++i];
        std::string type;
        if (t.is_list) {
          if (t.head() == "either") {
            unsupported("either", t);
            type = std::string(kRootType);
          } else {
            throw SyntaxError(t.loc, "type name");
          }
        } else {
          type = t.symbol;
        }
        for (const SExpr* p : pending) emit(*p, type);
        pending.clear();
      } else if (e.is_symbol()) {
        pending.push_back(&e);
      } else {
        throw SyntaxError(e.loc, "name in typed list");
      }
    }
    for (const SExpr* p : pending) emit(*p, std::string(kRootType));
  }

  void types(const SExpr& s) {
    std::vector<std::string> parents;
    typed_list(s.items, 1, [&](const SExpr& name, const std::string& type) {
      if (name.symbol == kRootType && type == kRootType) return;
      result_.model.types.push_back({name.symbol, type, name.loc});
      parents.push_back(type);
    });
    // Supertypes that are only mentioned as parents are declared under the root.
    for (const auto& p : parents) {
      if (!result_.model.has_type(p)) result_.model.types.push_back({p, std::string(kRootType), s.loc});
    }
  }

  std::vector<TypedParam> params(const SExpr& list) {
    std::vector<TypedParam> out;
    typed_list(expect_list(list, "parameter list").items, 0,
               [&](const SExpr& name, const std::string& type) {
                 if (!is_variable(name.symbol)) throw SyntaxError(name.loc, "variable (?name)");
                 out.push_back({name.symbol, type});
               });
    return out;
  }

  void predicate(const SExpr& p) {
    expect_list(p, "predicate declaration");
    if (p.items.empty() || !p.items.front().is_symbol()) {
      throw SyntaxError(p.loc, "predicate name");
    }
    PredicateSchema schema;
    schema.name = p.items.front().symbol;
    schema.loc = p.loc;
    typed_list(p.items, 1, [&](const SExpr& name, const std::string& type) {
      if (!is_variable(name.symbol)) throw SyntaxError(name.loc, "variable (?name)");
      schema.params.push_back({name.symbol, type});
    });
    result_.model.predicates.push_back(std::move(schema));
  }

  void action(const SExpr& s) {
    if (s.items.size() < 2 || !s.items[1].is_symbol()) throw SyntaxError(s.loc, "action name");
    Operator op;
    op.name = s.items[1].symbol;
    op.loc = s.loc;
    for (std::size_t i = 2; i < s.items.size(); i += 2) {
      const SExpr& key = s.items[i];
      if (!key.is_symbol()) throw SyntaxError(key.loc, "action keyword");
      if (i + 1 >= s.items.size()) throw SyntaxError(key.loc, "value after " + key.symbol);
      const SExpr& val = s.items[i + 1];
      if (key.symbol == ":parameters") {
        op.params = params(val);
      } else if (key.symbol == ":precondition") {
        precondition(val, op.pre);
      } else if (key.symbol == ":effect") {
        effect(val, op);
      } else {
        throw SyntaxError(key.loc, ":parameters, :precondition or :effect");
      }
    }
    result_.model.operators.push_back(std::move(op));
  }

  Atom atom(const SExpr& e) {
    if (e.items.empty() || !e.items.front().is_symbol()) throw SyntaxError(e.loc, "atom");
    Atom a;
    a.pred = e.items.front().symbol;
    a.loc = e.loc;
    for (std::size_t i = 1; i < e.items.size(); ++i) {
      if (!e.items[i].is_symbol()) throw SyntaxError(e.items[i].loc, "term");
      a.args.push_back(e.items[i].symbol);
    }
    return a;
  }

  void precondition(const SExpr& e, std::vector<Atom>& out) {
    expect_list(e, "precondition formula");
    if (e.items.empty()) return;
    std::string_view h = e.head();
    if (h == "and") {
      for (std::size_t i = 1; i < e.items.size(); ++i) precondition(e.items[i], out);
    } else if (h == "not") {
      unsupported("negative-preconditions", e);
    } else if (h == "=") {
      unsupported("equality", e);
    } else if (h == "or") {
      unsupported("disjunction", e);
    } else if (h == "imply") {
      unsupported("implication", e);
    } else if (h == "forall" || h == "exists") {
      unsupported("quantifiers", e);
    } else if (h == "<" || h == ">" || h == "<=" || h == ">=") {
      unsupported("numeric-fluents", e);
    } else {
      out.push_back(atom(e));
    }
  }

  void effect(const SExpr& e, Operator& op) {
    expect_list(e, "effect formula");
    if (e.items.empty()) return;
    std::string_view h = e.head();
    if (h == "and") {
      for (std::size_t i = 1; i < e.items.size(); ++i) effect(e.items[i], op);
    } else if (h == "not") {
      if (e.items.size() != 2 || !e.items[1].is_list) throw SyntaxError(e.loc, "(not <atom>)");
      if (e.items[1].head() == "=") {
        unsupported("equality", e.items[1]);
        return;
      }
      op.del.push_back(atom(e.items[1]));
    } else if (h == "when") {
      unsupported("conditional-effects", e);
    } else if (h == "forall") {
      unsupported("quantifiers", e);
    } else if (h == "increase" || h == "decrease" || h == "assign" || h == "scale-up" ||
               h == "scale-down") {
      unsupported("numeric-fluents", e);
    } else {
      op.add.push_back(atom(e));
    }
  }

  ParseResult result_;
};

}  // namespace detail

// Parses leniently, collecting unsupported constructs. Throws SyntaxError.
inline ParseResult parse_domain_diagnostics(std::string_view text) {
  return detail::DomainParser().parse(text);
}

// Parses a typed-STRIPS domain. Throws SyntaxError, UnsupportedFeature on
// the first construct outside the subset, or SemanticError on the first
// validation failure.
inline DomainModel parse_domain(std::string_view text) {
  ParseResult r = parse_domain_diagnostics(text);
  if (!r.unsupported.empty()) {
    throw UnsupportedFeature(r.unsupported.front().where, r.unsupported.front().loc);
  }
  std::vector<Violation> v = validate_strips(r.model);
  if (!v.empty()) {
    throw SemanticError(v.front().rule, v.front().where + ": " + v.front().message,
                        v.front().loc);
  }
  return std::move(r.model);
}

}  // namespace dval::pddl
