#pragma once

#include <algorithm>
#include <cassert>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "dval/ground.hpp"
#include "dval/pddl/model.hpp"

namespace dval::macro {

using ground::AtomId;
using ground::Grounding;
using ground::IndexedAction;
using pddl::Atom;
using pddl::Operator;

// The four counters that characterise a macro's net structure.
struct MacroSignature {
  std::size_t prem = 0;           // |pre(m)|
  std::size_t delm_not_prem = 0;  // |del(m) \ pre(m)|
  std::size_t delm_prem = 0;      // |del(m) ∩ pre(m)|
  std::size_t addm = 0;           // |add(m)|

  // Atoms touched by the macro: |pre ∪ add ∪ del|. Never decreases under append.
  std::size_t touched() const { return prem + addm + delm_not_prem; }

  friend bool operator==(const MacroSignature&, const MacroSignature&) = default;
  friend auto operator<=>(const MacroSignature&, const MacroSignature&) = default;
};

inline std::string to_string(const MacroSignature& s) {
  return "(prem " + std::to_string(s.prem) + ", addm " + std::to_string(s.addm) +
         ", delm_prem " + std::to_string(s.delm_prem) + ", delm_not_prem " +
         std::to_string(s.delm_not_prem) + ")";
}

// A ground macro under construction. Atom sets are sorted id vectors.
struct MacroState {
  std::vector<AtomId> pre;
  std::vector<AtomId> add;
  std::vector<AtomId> del;
  MacroSignature sig;
  std::vector<IndexedAction> seq;  // provenance

  bool same_sets(const MacroState& o) const {
    return pre == o.pre && add == o.add && del == o.del;
  }
};

namespace detail {

inline bool has(const std::vector<AtomId>& v, AtomId x) {
  return std::binary_search(v.begin(), v.end(), x);
}
inline void insert(std::vector<AtomId>& v, AtomId x) {
  v.insert(std::lower_bound(v.begin(), v.end(), x), x);
}
inline void erase(std::vector<AtomId>& v, AtomId x) {
  auto it = std::lower_bound(v.begin(), v.end(), x);
  if (it != v.end() && *it == x) v.erase(it);
}

template <typename Range>
bool range_has(const Range& r, AtomId x) {
  return std::find(std::begin(r), std::end(r), x) != std::end(r);
}

// Applies the update rules without touching provenance. Atom iteration
// order inside each of pre/add/del of the action does not matter.
template <typename Pre, typename Add, typename Del>
std::optional<MacroState> apply(const MacroState& m, const Pre& a_pre, const Add& a_add,
                                const Del& a_del) {
  for (AtomId p : a_pre) {
    if (has(m.del, p)) return std::nullopt;
  }
  MacroState r;
  r.pre = m.pre;
  r.add = m.add;
  r.del = m.del;
  r.sig = m.sig;

  for (AtomId p : a_pre) {
    if (!has(r.add, p) && !has(r.pre, p)) {
      insert(r.pre, p);
      ++r.sig.prem;
    }
  }
  for (AtomId p : a_add) {
    const bool in_pre = has(r.pre, p);
    if (!has(r.add, p) && !in_pre) {
      insert(r.add, p);
      ++r.sig.addm;
    }
    if (has(r.del, p)) {
      erase(r.del, p);
      if (in_pre) {
        --r.sig.delm_prem;
      } else {
        --r.sig.delm_not_prem;
      }
    }
  }
  for (AtomId p : a_del) {
    const bool was_added = has(r.add, p);
    const bool was_deleted = has(r.del, p);
    if (was_added) {
      erase(r.add, p);
      --r.sig.addm;
    }
    if (was_deleted) continue;
    insert(r.del, p);
    bool not_prem;
    if (range_has(a_pre, p)) {
      not_prem = was_added;
    } else {
      not_prem = !has(r.pre, p);
    }
    if (not_prem) {
      ++r.sig.delm_not_prem;
    } else {
      ++r.sig.delm_prem;
    }
  }
  return r;
}

}  // namespace detail

// Count/set consistency and disjointness of a macro state.
inline bool consistent(const MacroState& m) {
  std::size_t del_in_pre = 0;
  for (AtomId p : m.del) del_in_pre += detail::has(m.pre, p) ? 1 : 0;
  for (AtomId p : m.add) {
    if (detail::has(m.pre, p) || detail::has(m.del, p)) return false;
  }
  auto sorted_unique = [](const std::vector<AtomId>& v) {
    return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
  };
  return sorted_unique(m.pre) && sorted_unique(m.add) && sorted_unique(m.del) &&
         m.sig.prem == m.pre.size() && m.sig.addm == m.add.size() &&
         m.sig.delm_prem == del_in_pre && m.sig.delm_not_prem == m.del.size() - del_in_pre;
}

// Extends m with action a, or nullopt when m deletes a precondition of a.
inline std::optional<MacroState> append(const MacroState& m, const IndexedAction& a) {
  auto r = detail::apply(m, a.pre, a.add, a.del);
  if (!r) return std::nullopt;
  r->seq = m.seq;
  r->seq.push_back(a);
  assert(consistent(*r));
  return r;
}

// Net structure of an operator as a single-step macro: add effects that are
// also preconditions are no-ops and dropped.
struct NetOperator {
  std::vector<Atom> pre;
  std::vector<Atom> add;
  std::vector<Atom> del;
};

inline NetOperator net_effect(const Operator& o) {
  NetOperator n;
  n.pre = o.pre;
  n.del = o.del;
  for (const auto& a : o.add) {
    if (std::find(o.pre.begin(), o.pre.end(), a) == o.pre.end() &&
        std::find(n.add.begin(), n.add.end(), a) == n.add.end()) {
      n.add.push_back(a);
    }
  }
  for (auto* s : {&n.pre, &n.add, &n.del}) {
    std::sort(s->begin(), s->end());
    s->erase(std::unique(s->begin(), s->end()), s->end());
  }
  std::erase_if(n.del, [&](const Atom& a) {
    return std::find(o.add.begin(), o.add.end(), a) != o.add.end();
  });
  return n;
}

// Parameters of o that occur in at least one atom, in declaration order.
inline std::vector<pddl::TypedParam> effective_params(const Operator& o) {
  std::vector<pddl::TypedParam> out;
  for (const auto& p : o.params) {
    auto mentions = [&](const std::vector<Atom>& atoms) {
      return std::any_of(atoms.begin(), atoms.end(), [&](const Atom& a) {
        return std::find(a.args.begin(), a.args.end(), p.name) != a.args.end();
      });
    };
    if (mentions(o.pre) || mentions(o.add) || mentions(o.del)) out.push_back(p);
  }
  return out;
}

// Target signature for a canonical operator.
inline MacroSignature signature_of(const Operator& o) {
  NetOperator n = net_effect(o);
  MacroSignature s;
  s.prem = n.pre.size();
  s.addm = n.add.size();
  for (const auto& d : n.del) {
    if (std::binary_search(n.pre.begin(), n.pre.end(), d)) {
      ++s.delm_prem;
    } else {
      ++s.delm_not_prem;
    }
  }
  return s;
}

// A macro lifted back to parameters ?x1..?xn.
struct LiftedMacro {
  std::vector<pddl::TypedParam> params;
  std::vector<Atom> pre;
  std::vector<Atom> add;
  std::vector<Atom> del;
  std::vector<std::string> source_ops;

  // Structural identity; provenance is ignored.
  friend bool operator==(const LiftedMacro& a, const LiftedMacro& b) {
    return a.params == b.params && a.pre == b.pre && a.add == b.add && a.del == b.del;
  }
};

// Objects used by any atom of m, sorted.
inline std::vector<std::uint32_t> used_objects(const MacroState& m, const Grounding& g) {
  std::vector<std::uint32_t> out;
  for (const auto* set : {&m.pre, &m.add, &m.del}) {
    for (AtomId a : *set) {
      const auto& args = g.atom_args(a);
      out.insert(out.end(), args.begin(), args.end());
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Relabels the objects of m so that, per exact type, the used objects
// become the first objects of that type, choosing the bijection whose
// (pre, add, del) id vectors are lexicographically least. States equal up to
// a type-preserving object permutation get the same result.
inline MacroState canonical_relabel(const MacroState& m, const Grounding& g) {
  const auto& objs = g.objects().objects;
  const std::vector<std::uint32_t> used = used_objects(m, g);

  // Group used objects by exact type; targets are the first objects of that type.
  std::map<std::string, std::vector<std::uint32_t>> used_by_type;
  for (auto o : used) used_by_type[objs[o].type].push_back(o);
  struct Group {
    std::vector<std::uint32_t> sources;
    std::vector<std::uint32_t> targets;  // permuted during enumeration
  };
  std::vector<Group> groups;
  for (auto& [type, sources] : used_by_type) {
    Group grp;
    grp.sources = sources;
    for (std::uint32_t i = 0; i < objs.size() && grp.targets.size() < sources.size(); ++i) {
      if (objs[i].type == type) grp.targets.push_back(i);
    }
    groups.push_back(std::move(grp));
  }

  std::vector<std::uint32_t> relabel(objs.size());
  std::vector<std::uint32_t> args;
  auto remap = [&](const std::vector<AtomId>& in) {
    std::vector<AtomId> out;
    out.reserve(in.size());
    for (AtomId a : in) {
      args = g.atom_args(a);
      for (auto& x : args) x = relabel[x];
      out.push_back(*g.encode(g.atom_pred(a), args));
    }
    std::sort(out.begin(), out.end());
    return out;
  };

  std::optional<MacroState> best;
  for (;;) {
    for (const auto& grp : groups) {
      for (std::size_t i = 0; i < grp.sources.size(); ++i) relabel[grp.sources[i]] = grp.targets[i];
    }
    MacroState cand;
    cand.pre = remap(m.pre);
    cand.add = remap(m.add);
    cand.del = remap(m.del);
    if (!best || std::tie(cand.pre, cand.add, cand.del) < std::tie(best->pre, best->add, best->del)) {
      best = std::move(cand);
    }
    // Odometer over per-group permutations.
    std::size_t k = 0;
    for (; k < groups.size(); ++k) {
      if (std::next_permutation(groups[k].targets.begin(), groups[k].targets.end())) break;
    }
    if (k == groups.size()) break;
  }
  best->sig = m.sig;
  best->seq = m.seq;
  return *best;
}

// Lifts m: each distinct object becomes one parameter, typed by the
// object's type, ordered by first occurrence in the canonical relabelling.
inline LiftedMacro lift(const MacroState& m, const Grounding& g) {
  const MacroState c = canonical_relabel(m, g);
  const auto& objs = g.objects().objects;
  const auto& preds = g.domain().predicates;
  std::map<std::uint32_t, std::string> var_of;
  LiftedMacro out;
  auto lift_set = [&](const std::vector<AtomId>& ids, std::vector<Atom>& dst) {
    for (AtomId id : ids) {
      Atom a;
      a.pred = preds[g.atom_pred(id)].name;
      for (auto o : g.atom_args(id)) {
        auto it = var_of.find(o);
        if (it == var_of.end()) {
          std::string v = "?x" + std::to_string(var_of.size() + 1);
          it = var_of.emplace(o, v).first;
          out.params.push_back({v, objs[o].type});
        }
        a.args.push_back(it->second);
      }
      dst.push_back(std::move(a));
    }
  };
  lift_set(c.pre, out.pre);
  lift_set(c.add, out.add);
  lift_set(c.del, out.del);
  for (auto* s : {&out.pre, &out.add, &out.del}) std::sort(s->begin(), s->end());
  for (const auto& a : m.seq) out.source_ops.push_back(g.domain().operators[a.op].name);
  return out;
}

}  // namespace dval::macro
