#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "dval/error.hpp"
#include "dval/pddl/model.hpp"
#include "dval/pddl/sexpr.hpp"

namespace dval::ground {

using pddl::DomainModel;
using pddl::Operator;

// Maps every type to the set of its transitive subtypes, itself included.
class TypeClosure {
 public:
  TypeClosure() = default;

  explicit TypeClosure(const DomainModel& d) {
    std::map<std::string, std::string> parent;
    for (const auto& t : d.types) parent[t.name] = t.parent;
    closure_[std::string(pddl::kRootType)].insert(std::string(pddl::kRootType));
    for (const auto& [name, _] : parent) {
      std::string cur = name;
      std::set<std::string> seen;
      for (;;) {
        if (!seen.insert(cur).second) throw CyclicTypeGraph(name);
        closure_[cur].insert(name);
        if (cur == pddl::kRootType) break;
        auto it = parent.find(cur);
        cur = it == parent.end() ? std::string(pddl::kRootType) : it->second;
      }
    }
  }

  bool is_subtype(std::string_view sub, std::string_view super) const {
    auto it = closure_.find(super);
    return it != closure_.end() && it->second.count(std::string(sub)) > 0;
  }

  const std::set<std::string>& subtypes(std::string_view type) const {
    static const std::set<std::string> kEmpty;
    auto it = closure_.find(type);
    return it == closure_.end() ? kEmpty : it->second;
  }

  friend bool operator==(const TypeClosure&, const TypeClosure&) = default;

 private:
  std::map<std::string, std::set<std::string>, std::less<>> closure_;
};

inline TypeClosure type_closure(const DomainModel& d) { return TypeClosure(d); }

struct Object {
  std::string name;
  std::string type;

  friend bool operator==(const Object&, const Object&) = default;
};

struct ObjectSet {
  std::vector<Object> objects;

  std::size_t size() const { return objects.size(); }
  friend bool operator==(const ObjectSet&, const ObjectSet&) = default;
};

// Largest number of parameters of o sharing one declared type.
inline std::size_t max_same_type_params(const Operator& o) {
  std::map<std::string, std::size_t> count;
  std::size_t best = 0;
  for (const auto& p : o.params) best = std::max(best, ++count[p.type]);
  return best;
}

// Constants for macro search over d when matching operator o (which may
// come from another domain): k = max same-type parameter count of o, at
// least 1, emitted for every type of d including the root.
inline ObjectSet meta_objects_for(const Operator& o, const DomainModel& d,
                                  const TypeClosure& /*tc*/) {
  const std::size_t k = std::max<std::size_t>(1, max_same_type_params(o));
  ObjectSet out;
  for (const auto& type : d.type_names()) {
    for (std::size_t i = 0; i < k; ++i) {
      out.objects.push_back({"c_" + type + "_" + std::to_string(i), type});
    }
  }
  return out;
}

// Reads object declarations: either lines of "<name> [<name>...] - <type>"
// or a PDDL problem file whose :objects block is used (init/goal ignored).
inline ObjectSet parse_objects(std::string_view text) {
  ObjectSet out;
  auto emit_typed = [&](const std::vector<pddl::SExpr>& items, std::size_t from) {
    std::vector<std::string> pending;
    for (std::size_t i = from; i < items.size(); ++i) {
      if (items[i].is_symbol("-")) {
        if (i + 1 >= items.size() || items[i + 1].is_list) {
          throw SyntaxError(items[i].loc, "type name after '-'");
        }
        for (auto& n : pending) out.objects.push_back({n, items[i + 1].symbol});
        pending.clear();
        ++i;
      } else if (items[i].is_symbol()) {
        pending.push_back(items[i].symbol);
      } else {
        throw SyntaxError(items[i].loc, "object name");
      }
    }
    for (auto& n : pending) out.objects.push_back({n, std::string(pddl::kRootType)});
  };

  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '(') {
    std::vector<pddl::SExpr> top = pddl::read_sexprs(text);
    if (top.size() != 1 || top[0].head() != "define") throw SyntaxError({1, 1}, "(define (problem ...))");
    for (const auto& section : top[0].items) {
      if (section.head() == ":objects") emit_typed(section.items, 1);
    }
    return out;
  }
  // Line format: every line is its own typed list.
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (auto c = line.find(';'); c != std::string_view::npos) line = line.substr(0, c);
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
      std::string wrapped = "(" + std::string(line) + ")";
      std::vector<pddl::SExpr> e = pddl::read_sexprs(wrapped);
      emit_typed(e.front().items, 0);
    }
    start = end + 1;
  }
  return out;
}

struct GroundAtom {
  std::string pred;
  std::vector<std::string> args;

  friend bool operator==(const GroundAtom&, const GroundAtom&) = default;
  friend auto operator<=>(const GroundAtom&, const GroundAtom&) = default;
};

inline std::string to_string(const GroundAtom& a) {
  std::string s = "(" + a.pred;
  for (const auto& x : a.args) s += " " + x;
  return s + ")";
}

struct GroundAction {
  std::string op;
  std::vector<std::string> binding;
  std::vector<GroundAtom> pre;
  std::vector<GroundAtom> del;
  std::vector<GroundAtom> add;

  friend bool operator==(const GroundAction&, const GroundAction&) = default;
};

using AtomId = std::uint32_t;

// A ground action over atom ids of a Grounding. Sets are sorted and
// del excludes anything in add (deletes apply before adds).
struct IndexedAction {
  std::uint32_t op = 0;
  std::vector<std::uint32_t> binding;  // object indices
  std::vector<AtomId> pre;
  std::vector<AtomId> del;
  std::vector<AtomId> add;
};

// Dense index of the ground atoms and actions of a domain over an object
// set. Atom ids enumerate predicates in domain order and, within a
// predicate, argument tuples in mixed-radix order over the objects.
class Grounding {
 public:
  Grounding(const DomainModel& d, ObjectSet objs, const TypeClosure& tc)
      : domain_(&d), objects_(std::move(objs)) {
    for (std::uint32_t i = 0; i < objects_.objects.size(); ++i) {
      object_index_.emplace(objects_.objects[i].name, i);
    }
    auto compatible = [&](const std::string& type) {
      std::vector<std::uint32_t> out;
      for (std::uint32_t i = 0; i < objects_.objects.size(); ++i) {
        if (tc.is_subtype(objects_.objects[i].type, type)) out.push_back(i);
      }
      return out;
    };

    AtomId offset = 0;
    for (const auto& p : d.predicates) {
      PredIndex pi;
      pi.offset = offset;
      std::size_t count = 1;
      for (const auto& param : p.params) {
        pi.domains.push_back(compatible(param.type));
        std::vector<std::int32_t> pos(objects_.objects.size(), -1);
        for (std::size_t j = 0; j < pi.domains.back().size(); ++j) {
          pos[pi.domains.back()[j]] = static_cast<std::int32_t>(j);
        }
        pi.position.push_back(std::move(pos));
        count *= pi.domains.back().size();
      }
      pi.strides.assign(p.params.size(), 1);
      for (std::size_t j = p.params.size(); j-- > 1;) {
        pi.strides[j - 1] = pi.strides[j] * pi.domains[j].size();
      }
      pi.count = count;
      offset += static_cast<AtomId>(count);
      preds_.push_back(std::move(pi));
    }
    atom_pred_.reserve(offset);
    atom_args_.reserve(offset);
    for (std::uint32_t p = 0; p < preds_.size(); ++p) {
      const PredIndex& pi = preds_[p];
      for (std::size_t n = 0; n < pi.count; ++n) {
        std::vector<std::uint32_t> args(pi.domains.size());
        std::size_t rest = n;
        for (std::size_t j = 0; j < args.size(); ++j) {
          args[j] = pi.domains[j][rest / pi.strides[j]];
          rest %= pi.strides[j];
        }
        atom_pred_.push_back(p);
        atom_args_.push_back(std::move(args));
      }
    }

    for (std::uint32_t oi = 0; oi < d.operators.size(); ++oi) instantiate(oi, compatible);
  }

  const DomainModel& domain() const { return *domain_; }
  const ObjectSet& objects() const { return objects_; }
  std::size_t atom_count() const { return atom_pred_.size(); }
  const std::vector<IndexedAction>& actions() const { return actions_; }

  std::uint32_t atom_pred(AtomId a) const { return atom_pred_[a]; }
  const std::vector<std::uint32_t>& atom_args(AtomId a) const { return atom_args_[a]; }

  // Atom id for a predicate applied to object indices; nullopt when an
  // object is not type-compatible with the predicate.
  std::optional<AtomId> encode(std::uint32_t pred, std::span<const std::uint32_t> args) const {
    const PredIndex& pi = preds_[pred];
    if (args.size() != pi.domains.size()) return std::nullopt;
    std::size_t id = pi.offset;
    for (std::size_t j = 0; j < args.size(); ++j) {
      std::int32_t pos = pi.position[j][args[j]];
      if (pos < 0) return std::nullopt;
      id += static_cast<std::size_t>(pos) * pi.strides[j];
    }
    return static_cast<AtomId>(id);
  }

  GroundAtom atom(AtomId a) const {
    GroundAtom g{domain_->predicates[atom_pred_[a]].name, {}};
    for (auto o : atom_args_[a]) g.args.push_back(objects_.objects[o].name);
    return g;
  }

  std::optional<AtomId> find(const GroundAtom& g) const {
    auto pit = std::find_if(domain_->predicates.begin(), domain_->predicates.end(),
                            [&](const auto& p) { return p.name == g.pred; });
    if (pit == domain_->predicates.end()) return std::nullopt;
    std::vector<std::uint32_t> args;
    for (const auto& n : g.args) {
      auto it = object_index_.find(n);
      if (it == object_index_.end()) return std::nullopt;
      args.push_back(it->second);
    }
    return encode(static_cast<std::uint32_t>(pit - domain_->predicates.begin()), args);
  }

  GroundAction expand(const IndexedAction& a) const {
    GroundAction g;
    g.op = domain_->operators[a.op].name;
    for (auto o : a.binding) g.binding.push_back(objects_.objects[o].name);
    for (auto id : a.pre) g.pre.push_back(atom(id));
    for (auto id : a.del) g.del.push_back(atom(id));
    for (auto id : a.add) g.add.push_back(atom(id));
    return g;
  }

 private:
  struct PredIndex {
    AtomId offset = 0;
    std::size_t count = 0;
    std::vector<std::vector<std::uint32_t>> domains;  // object indices per argument
    std::vector<std::vector<std::int32_t>> position;  // object index -> slot in domains
    std::vector<std::size_t> strides;
  };

  template <typename Compatible>
  void instantiate(std::uint32_t oi, Compatible& compatible) {
    const Operator& o = domain_->operators[oi];
    struct Template {
      std::uint32_t pred;
      std::vector<std::uint32_t> slots;  // parameter indices
    };
    auto templates = [&](const std::vector<pddl::Atom>& atoms) {
      std::vector<Template> out;
      for (const auto& a : atoms) {
        Template t;
        auto pit = std::find_if(domain_->predicates.begin(), domain_->predicates.end(),
                                [&](const auto& p) { return p.name == a.pred; });
        t.pred = static_cast<std::uint32_t>(pit - domain_->predicates.begin());
        for (const auto& arg : a.args) {
          auto it = std::find_if(o.params.begin(), o.params.end(),
                                 [&](const auto& p) { return p.name == arg; });
          t.slots.push_back(static_cast<std::uint32_t>(it - o.params.begin()));
        }
        out.push_back(std::move(t));
      }
      return out;
    };
    const auto pre = templates(o.pre);
    const auto del = templates(o.del);
    const auto add = templates(o.add);

    std::vector<std::vector<std::uint32_t>> domains;
    for (const auto& p : o.params) {
      domains.push_back(compatible(p.type));
      if (domains.back().empty()) return;
    }
    std::vector<std::size_t> idx(domains.size(), 0);
    std::vector<std::uint32_t> binding(domains.size());
    std::vector<std::uint32_t> args;
    auto ground_set = [&](const std::vector<Template>& ts, std::vector<AtomId>& out) {
      for (const auto& t : ts) {
        args.clear();
        for (auto s : t.slots) args.push_back(binding[s]);
        if (auto id = encode(t.pred, args)) out.push_back(*id);
      }
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
    };
    for (;;) {
      for (std::size_t j = 0; j < domains.size(); ++j) binding[j] = domains[j][idx[j]];
      IndexedAction a;
      a.op = oi;
      a.binding = binding;
      ground_set(pre, a.pre);
      ground_set(del, a.del);
      ground_set(add, a.add);
      std::erase_if(a.del, [&](AtomId x) { return std::binary_search(a.add.begin(), a.add.end(), x); });
      actions_.push_back(std::move(a));

      std::size_t j = domains.size();
      while (j > 0) {
        --j;
        if (++idx[j] < domains[j].size()) break;
        idx[j] = 0;
        if (j == 0) return;
      }
      if (domains.empty()) return;
    }
  }

  const DomainModel* domain_;
  ObjectSet objects_;
  std::unordered_map<std::string, std::uint32_t> object_index_;
  std::vector<PredIndex> preds_;
  std::vector<std::uint32_t> atom_pred_;
  std::vector<std::vector<std::uint32_t>> atom_args_;
  std::vector<IndexedAction> actions_;
};

// All type-consistent ground atoms in id order.
inline std::vector<GroundAtom> ground_atoms(const DomainModel& d, const ObjectSet& objs,
                                            const TypeClosure& tc) {
  Grounding g(d, objs, tc);
  std::vector<GroundAtom> out;
  out.reserve(g.atom_count());
  for (AtomId a = 0; a < g.atom_count(); ++a) out.push_back(g.atom(a));
  return out;
}

// All type-consistent ground instances of every operator; same-object
// bindings are included.
inline std::vector<GroundAction> instantiate_actions(const DomainModel& d, const ObjectSet& objs,
                                                     const TypeClosure& tc) {
  Grounding g(d, objs, tc);
  std::vector<GroundAction> out;
  out.reserve(g.actions().size());
  for (const auto& a : g.actions()) out.push_back(g.expand(a));
  return out;
}

}  // namespace dval::ground
