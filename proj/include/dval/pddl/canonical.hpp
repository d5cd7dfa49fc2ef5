#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "dval/pddl/model.hpp"

namespace dval::pddl {

namespace detail {

inline void sort_unique(std::vector<Atom>& atoms) {
  std::sort(atoms.begin(), atoms.end());
  atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
}

inline bool contains(const std::vector<Atom>& sorted, const Atom& a) {
  return std::binary_search(sorted.begin(), sorted.end(), a);
}

}  // namespace detail

// Normal form of an operator: deduplicated sorted atom sets, and an atom that
// is both deleted and added survives only as an add effect.
inline Operator canonicalize(Operator o) {
  o.name = fold_case(o.name);
  for (auto& p : o.params) {
    p.name = fold_case(p.name);
    p.type = fold_case(p.type);
  }
  for (auto* set : {&o.pre, &o.add, &o.del}) {
    for (auto& a : *set) {
      a.pred = fold_case(a.pred);
      for (auto& t : a.args) t = fold_case(t);
    }
    detail::sort_unique(*set);
  }
  std::erase_if(o.del, [&](const Atom& a) { return detail::contains(o.add, a); });
  return o;
}

inline DomainModel canonicalize(DomainModel d) {
  d.name = fold_case(d.name);
  d.requirements = {":strips", ":typing"};
  for (auto& t : d.types) {
    t.name = fold_case(t.name);
    t.parent = fold_case(t.parent);
  }
  std::sort(d.types.begin(), d.types.end(),
            [](const TypeDecl& a, const TypeDecl& b) { return a.name < b.name; });
  d.types.erase(std::unique(d.types.begin(), d.types.end(),
                            [](const TypeDecl& a, const TypeDecl& b) { return a.name == b.name; }),
                d.types.end());
  for (auto& p : d.predicates) {
    p.name = fold_case(p.name);
    for (auto& q : p.params) {
      q.name = fold_case(q.name);
      q.type = fold_case(q.type);
    }
  }
  std::sort(d.predicates.begin(), d.predicates.end(),
            [](const PredicateSchema& a, const PredicateSchema& b) { return a.name < b.name; });
  for (auto& o : d.operators) o = canonicalize(std::move(o));
  std::sort(d.operators.begin(), d.operators.end(),
            [](const Operator& a, const Operator& b) { return a.name < b.name; });
  return d;
}

namespace detail {

inline void write_params(std::ostream& os, const std::vector<TypedParam>& params) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i) os << ' ';
    os << params[i].name << " - " << params[i].type;
  }
}

inline void write_atoms(std::ostream& os, const std::vector<Atom>& atoms, bool negated,
                        const char* indent) {
  for (const auto& a : atoms) {
    os << indent << (negated ? "(not " : "") << to_string(a) << (negated ? ")" : "") << '\n';
  }
}

}  // namespace detail

// Writes PDDL with two-space indentation. Expects a canonical model.
inline std::string serialize(const DomainModel& d) {
  std::ostringstream os;
  os << "(define (domain " << d.name << ")\n";
  os << "  (:requirements :strips :typing)\n";
  if (!d.types.empty()) {
    os << "  (:types\n";
    for (const auto& t : d.types) os << "    " << t.name << " - " << t.parent << '\n';
    os << "  )\n";
  }
  os << "  (:predicates\n";
  for (const auto& p : d.predicates) {
    os << "    (" << p.name;
    if (!p.params.empty()) {
      os << ' ';
      detail::write_params(os, p.params);
    }
    os << ")\n";
  }
  os << "  )\n";
  for (const auto& o : d.operators) {
    os << "  (:action " << o.name << '\n';
    os << "    :parameters (";
    detail::write_params(os, o.params);
    os << ")\n";
    os << "    :precondition (and\n";
    detail::write_atoms(os, o.pre, false, "      ");
    os << "    )\n";
    os << "    :effect (and\n";
    detail::write_atoms(os, o.add, false, "      ");
    detail::write_atoms(os, o.del, true, "      ");
    os << "    )\n";
    os << "  )\n";
  }
  os << ")\n";
  return os.str();
}

}  // namespace dval::pddl
