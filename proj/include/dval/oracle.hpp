#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "dval/error.hpp"
#include "dval/ground.hpp"
#include "dval/mapping.hpp"
#include "dval/pddl/model.hpp"

namespace dval::oracle {

using ground::GroundAtom;
using ground::ObjectSet;
using pddl::DomainModel;
using pddl::Operator;

// A state is a bit vector over an atom order; bit i set = atom i true.
using StateId = std::uint64_t;

struct OracleConfig {
  std::size_t atom_cap = 20;
};

class OracleTooLarge : public Error {
 public:
  OracleTooLarge(std::size_t atoms, std::size_t cap)
      : Error("oracle instance has " + std::to_string(atoms) + " ground atoms (cap " +
              std::to_string(cap) + ")"),
        atoms_(atoms) {}
  std::size_t atoms() const { return atoms_; }

 private:
  std::size_t atoms_;
};

// A ground action as bit masks over a StateSpace.
struct MaskAction {
  StateId pre = 0;
  StateId del = 0;
  StateId add = 0;

  bool applicable(StateId s) const { return (s & pre) == pre; }
  StateId apply(StateId s) const { return (s & ~del) | add; }
};

// Fixed atom order shared by every relation computed against it.
class StateSpace {
 public:
  StateSpace(std::vector<GroundAtom> atoms, const OracleConfig& cfg) : atoms_(std::move(atoms)) {
    std::sort(atoms_.begin(), atoms_.end());
    atoms_.erase(std::unique(atoms_.begin(), atoms_.end()), atoms_.end());
    if (atoms_.size() > cfg.atom_cap || atoms_.size() > 40) throw OracleTooLarge(atoms_.size(), cfg.atom_cap);
  }

  std::size_t width() const { return atoms_.size(); }
  StateId state_count() const { return StateId{1} << atoms_.size(); }
  const std::vector<GroundAtom>& atoms() const { return atoms_; }

  std::optional<std::size_t> bit(const GroundAtom& a) const {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), a);
    if (it == atoms_.end() || !(*it == a)) return std::nullopt;
    return static_cast<std::size_t>(it - atoms_.begin());
  }

  // Masks of an action; nullopt if an atom is outside the space.
  std::optional<MaskAction> mask(const ground::GroundAction& a) const {
    MaskAction m;
    auto fill = [&](const std::vector<GroundAtom>& atoms, StateId& out) {
      for (const auto& g : atoms) {
        auto b = bit(g);
        if (!b) return false;
        out |= StateId{1} << *b;
      }
      return true;
    };
    if (!fill(a.pre, m.pre) || !fill(a.del, m.del) || !fill(a.add, m.add)) return std::nullopt;
    m.del &= ~m.add;
    return m;
  }

 private:
  std::vector<GroundAtom> atoms_;
};

// A set of state-pair transitions stored as sorted successor lists.
class ReachSet {
 public:
  ReachSet() = default;
  explicit ReachSet(StateId states) : succ_(states) {}

  StateId state_count() const { return succ_.size(); }
  const std::vector<StateId>& successors(StateId s) const { return succ_[s]; }
  std::vector<StateId>& successors(StateId s) { return succ_[s]; }

  bool contains(StateId s, StateId t) const {
    return std::binary_search(succ_[s].begin(), succ_[s].end(), t);
  }
  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& v : succ_) n += v.size();
    return n;
  }
  bool empty() const { return size() == 0; }

  void normalize() {
    for (auto& v : succ_) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
  }

  bool subset_of(const ReachSet& o) const {
    for (StateId s = 0; s < succ_.size(); ++s) {
      if (!std::includes(o.succ_[s].begin(), o.succ_[s].end(), succ_[s].begin(), succ_[s].end())) {
        return false;
      }
    }
    return true;
  }

  // Pairs (s, u) with (s, t) in this and (t, u) in next.
  ReachSet compose(const ReachSet& next) const {
    ReachSet out(state_count());
    for (StateId s = 0; s < succ_.size(); ++s) {
      for (StateId t : succ_[s]) {
        out.succ_[s].insert(out.succ_[s].end(), next.succ_[t].begin(), next.succ_[t].end());
      }
    }
    out.normalize();
    return out;
  }

  friend bool operator==(const ReachSet&, const ReachSet&) = default;

 private:
  std::vector<std::vector<StateId>> succ_;
};

namespace detail {

inline std::vector<MaskAction> masks_of(const DomainModel& d, const std::vector<const Operator*>& ops,
                                        const ObjectSet& objs, const StateSpace& space) {
  DomainModel only = d;
  only.operators.clear();
  for (const auto* o : ops) only.operators.push_back(*o);
  std::vector<MaskAction> out;
  for (const auto& a : ground::instantiate_actions(only, objs, ground::TypeClosure(d))) {
    if (auto m = space.mask(a)) out.push_back(*m);
  }
  return out;
}

inline ReachSet one_step(const std::vector<MaskAction>& actions, const StateSpace& space) {
  ReachSet r(space.state_count());
  for (StateId s = 0; s < space.state_count(); ++s) {
    auto& succ = r.successors(s);
    for (const auto& a : actions) {
      if (a.applicable(s)) succ.push_back(a.apply(s));
    }
  }
  r.normalize();
  return r;
}

// States reachable from s in one or more steps, sorted.
inline std::vector<StateId> reach_from(StateId s, const std::vector<MaskAction>& actions,
                                       std::unordered_set<StateId>& seen) {
  seen.clear();
  std::vector<StateId> stack{s};
  std::vector<StateId> out;
  while (!stack.empty()) {
    StateId u = stack.back();
    stack.pop_back();
    for (const auto& a : actions) {
      if (!a.applicable(u)) continue;
      StateId v = a.apply(u);
      if (seen.insert(v).second) {
        out.push_back(v);
        stack.push_back(v);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline ReachSet closure(const std::vector<MaskAction>& actions, const StateSpace& space) {
  ReachSet r(space.state_count());
  std::unordered_set<StateId> seen;
  for (StateId s = 0; s < space.state_count(); ++s) r.successors(s) = reach_from(s, actions, seen);
  return r;
}

inline StateSpace space_of(const DomainModel& d, const ObjectSet& objs, const OracleConfig& cfg) {
  return StateSpace(ground::ground_atoms(d, objs, ground::TypeClosure(d)), cfg);
}

}  // namespace detail

// One-step transitions of all ground instances of o. States range over the
// ground atoms of d on objs.
inline ReachSet reach_set_operator(const DomainModel& d, const Operator& o, const ObjectSet& objs,
                                   const OracleConfig& cfg = {}) {
  const StateSpace space = detail::space_of(d, objs, cfg);
  return detail::one_step(detail::masks_of(d, {&o}, objs, space), space);
}

// Transitions of action sequences instantiated position by position from seq.
inline ReachSet reach_set_sequence(const DomainModel& d, const std::vector<Operator>& seq,
                                   const ObjectSet& objs, const OracleConfig& cfg = {}) {
  if (seq.empty()) throw Error("reach_set_sequence needs at least one operator");
  const StateSpace space = detail::space_of(d, objs, cfg);
  ReachSet r = detail::one_step(detail::masks_of(d, {&seq[0]}, objs, space), space);
  for (std::size_t i = 1; i < seq.size(); ++i) {
    r = r.compose(detail::one_step(detail::masks_of(d, {&seq[i]}, objs, space), space));
  }
  return r;
}

// Transitive closure (length >= 1) of the union of all operators' steps.
inline ReachSet reach_set_domain(const DomainModel& d, const ObjectSet& objs, const OracleConfig& cfg = {}) {
  const StateSpace space = detail::space_of(d, objs, cfg);
  std::vector<const Operator*> ops;
  for (const auto& o : d.operators) ops.push_back(&o);
  return detail::closure(detail::masks_of(d, ops, objs, space), space);
}

// D1 with predicates renamed by f and types by the mapping's type
// correspondence; predicate schemas are taken from d2.
inline DomainModel substitute(const DomainModel& d1, const mapping::PredicateMapping& f, const DomainModel& d2) {
  auto rename_type = [&](const std::string& t) {
    auto it = f.type_corr.find(t);
    return it == f.type_corr.end() ? t : it->second;
  };
  DomainModel out;
  out.name = d1.name;
  out.requirements = d1.requirements;
  out.types = d2.types;
  out.predicates = d2.predicates;
  for (auto op : d1.operators) {
    for (auto& p : op.params) p.type = rename_type(p.type);
    for (auto* set : {&op.pre, &op.add, &op.del}) {
      for (auto& a : *set) {
        auto it = f.f.find(a.pred);
        if (it != f.f.end()) a.pred = it->second;
      }
    }
    out.operators.push_back(std::move(op));
  }
  return out;
}

inline ObjectSet translate_objects(const ObjectSet& objs, const std::map<std::string, std::string>& type_corr) {
  ObjectSet out = objs;
  for (auto& o : out.objects) {
    auto it = type_corr.find(o.type);
    if (it != type_corr.end()) o.type = it->second;
  }
  return out;
}

// Γ(substitute(D1, f)) = Γ(D2) on objs (objects typed in D1's types). The
// closure of each start state is compared state by state over a joint
// atom order, without materialising either relation.
inline bool equivalent_under(const DomainModel& d1, const DomainModel& d2, const mapping::PredicateMapping& f,
                             const ObjectSet& objs, const OracleConfig& cfg = {}) {
  const DomainModel d1s = substitute(d1, f, d2);
  const ObjectSet objs2 = translate_objects(objs, f.type_corr);
  std::vector<GroundAtom> atoms = ground::ground_atoms(d2, objs2, ground::TypeClosure(d2));
  auto more = ground::ground_atoms(d1s, objs2, ground::TypeClosure(d1s));
  atoms.insert(atoms.end(), more.begin(), more.end());
  const StateSpace space(std::move(atoms), cfg);

  auto all_masks = [&](const DomainModel& d) {
    std::vector<const Operator*> ops;
    for (const auto& o : d.operators) ops.push_back(&o);
    return detail::masks_of(d, ops, objs2, space);
  };
  const auto a1 = all_masks(d1s);
  const auto a2 = all_masks(d2);
  std::unordered_set<StateId> seen;
  for (StateId s = 0; s < space.state_count(); ++s) {
    if (detail::reach_from(s, a1, seen) != detail::reach_from(s, a2, seen)) return false;
  }
  return true;
}

// Every arity-respecting predicate bijection under which equivalent_under
// holds; the type correspondence is induced from predicate schemas.
inline std::vector<mapping::PredicateMapping> search_mappings(const DomainModel& d1, const DomainModel& d2,
                                                              const ObjectSet& objs, const OracleConfig& cfg = {}) {
  std::vector<mapping::PredicateMapping> found;
  if (d1.predicates.size() != d2.predicates.size()) return found;
  std::vector<std::size_t> perm(d2.predicates.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  do {
    mapping::PredicateMapping m;
    m.type_corr[std::string(pddl::kRootType)] = std::string(pddl::kRootType);
    bool ok = true;
    std::map<std::string, std::string> back;
    for (std::size_t i = 0; i < perm.size() && ok; ++i) {
      const auto& p1 = d1.predicates[i];
      const auto& p2 = d2.predicates[perm[i]];
      ok = p1.arity() == p2.arity();
      for (std::size_t j = 0; ok && j < p1.arity(); ++j) {
        const auto& t1 = p1.params[j].type;
        const auto& t2 = p2.params[j].type;
        auto [it, fresh] = m.type_corr.emplace(t1, t2);
        auto [bt, bfresh] = back.emplace(t2, t1);
        ok = it->second == t2 && bt->second == t1 && (t1 == pddl::kRootType) == (t2 == pddl::kRootType);
      }
      m.f[p1.name] = p2.name;
    }
    if (!ok) continue;
    // Types not reached through predicates keep their name when possible.
    for (const auto& t : d1.types) {
      if (!m.type_corr.count(t.name) && d2.has_type(t.name) && !back.count(t.name)) {
        m.type_corr[t.name] = t.name;
        back[t.name] = t.name;
      }
    }
    if (equivalent_under(d1, d2, m, objs, cfg)) found.push_back(std::move(m));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return found;
}

// Evaluates both sides of "Γ(D1) ⊆ Γ(D2) iff every operator of D1 is covered
// by the reach set of a single operator sequence of D2" (shared predicates)
// and returns whether they agree. Sequence relations are explored breadth
// first up to depth_cap or until no new relation appears.
struct CoverageSides {
  bool domain_subset = false;
  bool every_operator_covered = false;
  bool agree() const { return domain_subset == every_operator_covered; }
};

inline CoverageSides coverage_sides(const DomainModel& d1, const DomainModel& d2, const ObjectSet& objs,
                                    std::size_t depth_cap, const OracleConfig& cfg = {}) {
  std::vector<GroundAtom> atoms = ground::ground_atoms(d1, objs, ground::TypeClosure(d1));
  auto more = ground::ground_atoms(d2, objs, ground::TypeClosure(d2));
  atoms.insert(atoms.end(), more.begin(), more.end());
  const StateSpace space(std::move(atoms), cfg);

  auto masks = [&](const DomainModel& d, std::vector<const Operator*> ops) {
    return detail::masks_of(d, ops, objs, space);
  };
  std::vector<const Operator*> ops1, ops2;
  for (const auto& o : d1.operators) ops1.push_back(&o);
  for (const auto& o : d2.operators) ops2.push_back(&o);

  CoverageSides sides;
  sides.domain_subset = detail::closure(masks(d1, ops1), space).subset_of(detail::closure(masks(d2, ops2), space));

  std::vector<ReachSet> targets;
  for (const auto* o : ops1) targets.push_back(detail::one_step(masks(d1, {o}), space));
  std::vector<ReachSet> steps;
  for (const auto* o : ops2) steps.push_back(detail::one_step(masks(d2, {o}), space));

  std::vector<bool> covered(targets.size(), false);
  auto note = [&](const ReachSet& r) {
    for (std::size_t i = 0; i < targets.size(); ++i) covered[i] = covered[i] || targets[i].subset_of(r);
  };
  auto all_covered = [&] { return std::all_of(covered.begin(), covered.end(), [](bool b) { return b; }); };

  std::vector<ReachSet> seen;
  std::vector<ReachSet> layer;
  for (const auto& s : steps) {
    if (std::find(seen.begin(), seen.end(), s) == seen.end()) {
      seen.push_back(s);
      layer.push_back(s);
      note(s);
    }
  }
  for (std::size_t depth = 1; depth < depth_cap && !layer.empty() && !all_covered(); ++depth) {
    std::vector<ReachSet> next;
    for (const auto& r : layer) {
      for (const auto& s : steps) {
        ReachSet c = r.compose(s);
        if (std::find(seen.begin(), seen.end(), c) != seen.end()) continue;
        seen.push_back(c);
        note(c);
        next.push_back(std::move(c));
      }
    }
    layer = std::move(next);
  }
  sides.every_operator_covered = !steps.empty() ? all_covered() : targets.empty();
  return sides;
}

inline bool check_theorem1(const DomainModel& d1, const DomainModel& d2, const ObjectSet& objs,
                           std::size_t depth_cap = 8, const OracleConfig& cfg = {}) {
  return coverage_sides(d1, d2, objs, depth_cap, cfg).agree();
}

}  // namespace dval::oracle
