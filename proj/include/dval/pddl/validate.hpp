#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "dval/pddl/model.hpp"

namespace dval::pddl {

// A rule violation found in a domain. Violations are data; callers decide
// whether they are fatal.
struct Violation {
  std::string rule;  // e.g. "ArityMismatch", "UnsupportedFeature"
  std::string where;
  std::string message;
  SourceLoc loc{};

  std::string str() const {
    std::string s = rule;
    if (loc.known()) s += " at " + loc.str();
    if (!where.empty()) s += " (" + where + ")";
    if (!message.empty()) s += ": " + message;
    return s;
  }
};

namespace detail {

// Parent chain walk; returns false on cycles or unknown types.
inline bool walks_to(const std::map<std::string, std::string>& parent,
                     const std::string& sub, const std::string& super) {
  std::string cur = sub;
  for (std::size_t steps = 0; steps <= parent.size() + 1; ++steps) {
    if (cur == super) return true;
    if (cur == kRootType) return false;
    auto it = parent.find(cur);
    if (it == parent.end()) return false;
    cur = it->second;
  }
  return false;
}

}  // namespace detail

inline std::vector<Violation> validate_strips(const DomainModel& d) {
  std::vector<Violation> out;
  auto report = [&](std::string rule, std::string where, std::string msg, SourceLoc loc) {
    out.push_back({std::move(rule), std::move(where), std::move(msg), loc});
  };

  std::map<std::string, std::string> parent;
  for (const auto& t : d.types) {
    if (t.name == kRootType) {
      report("DuplicateType", "types", "the root type 'object' cannot be redeclared", t.loc);
      continue;
    }
    if (!parent.emplace(t.name, t.parent).second) {
      report("DuplicateType", "types", "type '" + t.name + "' declared twice", t.loc);
    }
  }
  for (const auto& t : d.types) {
    if (!d.has_type(t.parent)) {
      report("UndeclaredType", "types", "parent '" + t.parent + "' of '" + t.name + "'", t.loc);
    }
  }
  for (const auto& [name, _] : parent) {
    // A type whose parent chain never reaches the root sits on a cycle.
    bool reaches_root = detail::walks_to(parent, name, std::string(kRootType));
    bool parent_known = d.has_type(parent.at(name));
    if (!reaches_root && parent_known) {
      report("CyclicTypeGraph", "types", "type '" + name + "' is on a cycle", {});
    }
  }
  auto subtype = [&](const std::string& sub, const std::string& super) {
    return super == kRootType || detail::walks_to(parent, sub, super);
  };

  auto check_params = [&](const std::vector<TypedParam>& params, const std::string& where,
                          SourceLoc loc) {
    std::set<std::string> seen;
    for (const auto& p : params) {
      if (!seen.insert(p.name).second) {
        report("DuplicateParameter", where, "parameter '" + p.name + "' repeated", loc);
      }
      if (!d.has_type(p.type)) {
        report("UndeclaredType", where, "type '" + p.type + "' of '" + p.name + "'", loc);
      }
    }
  };

  std::set<std::string> pred_names;
  for (const auto& p : d.predicates) {
    if (!pred_names.insert(p.name).second) {
      report("DuplicatePredicate", "predicates", "predicate '" + p.name + "' declared twice",
             p.loc);
    }
    check_params(p.params, "predicate " + p.name, p.loc);
  }

  std::set<std::string> op_names;
  for (const auto& o : d.operators) {
    const std::string where = "operator " + o.name;
    if (!op_names.insert(o.name).second) {
      report("DuplicateOperator", where, "operator '" + o.name + "' declared twice", o.loc);
    }
    check_params(o.params, where, o.loc);

    auto check_atoms = [&](const std::vector<Atom>& atoms, const char* part) {
      for (const auto& a : atoms) {
        const std::string at = where + " " + part + " " + to_string(a);
        const PredicateSchema* schema = d.find_predicate(a.pred);
        if (schema == nullptr) {
          report("UndeclaredPredicate", at, "predicate '" + a.pred + "'", a.loc);
          continue;
        }
        if (schema->arity() != a.args.size()) {
          report("ArityMismatch", at,
                 "expected " + std::to_string(schema->arity()) + " arguments, got " +
                     std::to_string(a.args.size()),
                 a.loc);
          continue;
        }
        for (std::size_t i = 0; i < a.args.size(); ++i) {
          const std::string& term = a.args[i];
          if (!is_variable(term)) {
            report("UndeclaredConstant", at, "object '" + term + "' used as argument", a.loc);
            continue;
          }
          const TypedParam* param = o.find_param(term);
          if (param == nullptr) {
            report("UndeclaredVariable", at, "variable '" + term + "'", a.loc);
            continue;
          }
          if (d.has_type(param->type) && !subtype(param->type, schema->params[i].type)) {
            report("TypeMismatch", at,
                   "'" + term + "' has type " + param->type + ", expected " +
                       schema->params[i].type,
                   a.loc);
          }
        }
      }
    };
    check_atoms(o.pre, "precondition");
    check_atoms(o.add, "add effect");
    check_atoms(o.del, "delete effect");
  }
  return out;
}

}  // namespace dval::pddl
