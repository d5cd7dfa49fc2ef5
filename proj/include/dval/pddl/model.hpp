#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "dval/error.hpp"

namespace dval::pddl {

inline constexpr std::string_view kRootType = "object";

// PDDL identifiers are case-insensitive; every name stored in a model is
// already folded to lowercase, so plain string comparison is identity.
inline std::string fold_case(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

inline bool is_variable(std::string_view term) {
  return !term.empty() && term.front() == '?';
}

struct TypedParam {
  std::string name;  // variables keep their leading '?'
  std::string type = std::string(kRootType);

  friend bool operator==(const TypedParam&, const TypedParam&) = default;
  friend auto operator<=>(const TypedParam&, const TypedParam&) = default;
};

// Locations are carried for diagnostics only and never take part in equality.
struct Atom {
  std::string pred;
  std::vector<std::string> args;
  SourceLoc loc{};

  friend bool operator==(const Atom& a, const Atom& b) {
    return a.pred == b.pred && a.args == b.args;
  }
  friend bool operator<(const Atom& a, const Atom& b) {
    return std::tie(a.pred, a.args) < std::tie(b.pred, b.args);
  }
};

struct PredicateSchema {
  std::string name;
  std::vector<TypedParam> params;
  SourceLoc loc{};

  std::size_t arity() const { return params.size(); }

  friend bool operator==(const PredicateSchema& a, const PredicateSchema& b) {
    return a.name == b.name && a.params == b.params;
  }
};

struct Operator {
  std::string name;
  std::vector<TypedParam> params;
  std::vector<Atom> pre;
  std::vector<Atom> del;
  std::vector<Atom> add;
  SourceLoc loc{};

  const TypedParam* find_param(std::string_view var) const {
    auto it = std::find_if(params.begin(), params.end(),
                           [&](const TypedParam& p) { return p.name == var; });
    return it == params.end() ? nullptr : &*it;
  }

  friend bool operator==(const Operator& a, const Operator& b) {
    return a.name == b.name && a.params == b.params && a.pre == b.pre &&
           a.del == b.del && a.add == b.add;
  }
};

struct TypeDecl {
  std::string name;
  std::string parent = std::string(kRootType);
  SourceLoc loc{};

  friend bool operator==(const TypeDecl& a, const TypeDecl& b) {
    return a.name == b.name && a.parent == b.parent;
  }
};

struct DomainModel {
  std::string name;
  std::vector<std::string> requirements;
  std::vector<TypeDecl> types;  // the implicit root is never listed
  std::vector<PredicateSchema> predicates;
  std::vector<Operator> operators;

  const PredicateSchema* find_predicate(std::string_view n) const {
    auto it = std::find_if(predicates.begin(), predicates.end(),
                           [&](const PredicateSchema& p) { return p.name == n; });
    return it == predicates.end() ? nullptr : &*it;
  }

  const Operator* find_operator(std::string_view n) const {
    auto it = std::find_if(operators.begin(), operators.end(),
                           [&](const Operator& o) { return o.name == n; });
    return it == operators.end() ? nullptr : &*it;
  }

  bool has_type(std::string_view t) const {
    return t == kRootType ||
           std::any_of(types.begin(), types.end(),
                       [&](const TypeDecl& d) { return d.name == t; });
  }

  // All type names including the root, root first then declaration order.
  std::vector<std::string> type_names() const {
    std::vector<std::string> out{std::string(kRootType)};
    for (const auto& t : types) out.push_back(t.name);
    return out;
  }

  friend bool operator==(const DomainModel& a, const DomainModel& b) {
    return a.name == b.name && a.requirements == b.requirements &&
           a.types == b.types && a.predicates == b.predicates &&
           a.operators == b.operators;
  }
};

inline std::string to_string(const Atom& a) {
  std::string s = "(" + a.pred;
  for (const auto& arg : a.args) s += " " + arg;
  return s + ")";
}

}  // namespace dval::pddl
