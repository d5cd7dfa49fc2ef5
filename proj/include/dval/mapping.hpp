#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dval/macro.hpp"
#include "dval/pddl/model.hpp"
#include "dval/search.hpp"

namespace dval::mapping {

using macro::LiftedMacro;
using pddl::Atom;
using pddl::DomainModel;
using pddl::Operator;
using search::CandidateSet;
using NamePairs = std::vector<std::pair<std::string, std::string>>;

// Which way an operator is covered. kSecondByFirst: an operator of the second
// domain matched by a macro of the first; kFirstBySecond: the converse.
enum class Direction { kSecondByFirst, kFirstBySecond };

inline const char* to_string(Direction d) {
  return d == Direction::kSecondByFirst ? "d2-by-d1" : "d1-by-d2";
}

// One way to read an operator as a candidate macro: a parameter bijection and
// a predicate correspondence under which the atom sets coincide exactly.
// Pairs are oriented (operator side, macro side).
struct MappingFragment {
  std::string op;
  std::size_t candidate = 0;                 // index into the operator's CandidateSet
  NamePairs pred_pairs;                      // sorted
  NamePairs type_pairs;                      // sorted
  std::vector<std::size_t> param_bijection;  // effective operator param i -> macro param

  friend bool operator==(const MappingFragment&, const MappingFragment&) = default;
};

struct ChosenMacro {
  Direction direction = Direction::kSecondByFirst;
  std::string op;
  LiftedMacro macro;
  MappingFragment fragment;
};

struct PredicateMapping {
  std::map<std::string, std::string> f;          // predicates of D1 -> D2
  std::map<std::string, std::string> type_corr;  // types of D1 -> D2
  std::vector<ChosenMacro> chosen;
};

enum class UnsatKind { kArityPartitionMismatch, kOperatorWithoutCandidates, kNoConsistentAssignment, kUnknown };

inline const char* to_string(UnsatKind k) {
  switch (k) {
    case UnsatKind::kArityPartitionMismatch: return "ArityPartitionMismatch";
    case UnsatKind::kOperatorWithoutCandidates: return "OperatorWithoutCandidates";
    case UnsatKind::kNoConsistentAssignment: return "NoConsistentAssignment";
    case UnsatKind::kUnknown: return "Unknown";
  }
  return "?";
}

struct UnsatReason {
  UnsatKind kind = UnsatKind::kNoConsistentAssignment;
  std::string op;                       // OperatorWithoutCandidates only
  std::optional<Direction> direction;   // OperatorWithoutCandidates only
  std::string detail;
};

// ok iff both predicate sets have the same number of predicates per arity.
inline std::optional<UnsatReason> arity_partition_check(const DomainModel& d1, const DomainModel& d2) {
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> hist;
  for (const auto& p : d1.predicates) ++hist[p.arity()].first;
  for (const auto& p : d2.predicates) ++hist[p.arity()].second;
  for (const auto& [arity, counts] : hist) {
    if (counts.first != counts.second) {
      return UnsatReason{UnsatKind::kArityPartitionMismatch, {}, std::nullopt,
                         "arity " + std::to_string(arity) + ": " + std::to_string(counts.first) +
                             " vs " + std::to_string(counts.second) + " predicates"};
    }
  }
  return std::nullopt;
}

namespace detail {

struct IndexedAtom {
  std::string pred;
  std::vector<std::size_t> args;
};

inline std::vector<IndexedAtom> index_atoms(const std::vector<Atom>& atoms,
                                            const std::vector<pddl::TypedParam>& params) {
  std::vector<IndexedAtom> out;
  for (const auto& a : atoms) {
    IndexedAtom ia{a.pred, {}};
    for (const auto& arg : a.args) {
      auto it = std::find_if(params.begin(), params.end(),
                             [&](const pddl::TypedParam& p) { return p.name == arg; });
      ia.args.push_back(static_cast<std::size_t>(it - params.begin()));
    }
    out.push_back(std::move(ia));
  }
  return out;
}

// Partial bijection between two name spaces with an undo trail.
class Bijection {
 public:
  bool consistent(const std::string& a, const std::string& b) const {
    auto fa = fwd_.find(a);
    if (fa != fwd_.end()) return fa->second == b;
    return bwd_.find(b) == bwd_.end();
  }
  // Returns false (and changes nothing) on conflict.
  bool bind(const std::string& a, const std::string& b) {
    if (!consistent(a, b)) return false;
    if (fwd_.emplace(a, b).second) {
      bwd_.emplace(b, a);
      trail_.push_back(a);
    }
    return true;
  }
  std::size_t mark() const { return trail_.size(); }
  void undo(std::size_t mark) {
    while (trail_.size() > mark) {
      bwd_.erase(fwd_.at(trail_.back()));
      fwd_.erase(trail_.back());
      trail_.pop_back();
    }
  }
  const std::map<std::string, std::string>& forward() const { return fwd_; }
  const std::map<std::string, std::string>& backward() const { return bwd_; }
  bool has_forward(const std::string& a) const { return fwd_.count(a) > 0; }
  bool has_backward(const std::string& b) const { return bwd_.count(b) > 0; }

 private:
  std::map<std::string, std::string> fwd_;
  std::map<std::string, std::string> bwd_;
  std::vector<std::string> trail_;
};

inline bool bind_type(Bijection& types, const std::string& a, const std::string& b) {
  const bool a_root = a == pddl::kRootType;
  const bool b_root = b == pddl::kRootType;
  if (a_root || b_root) return a_root && b_root;
  return types.bind(a, b);
}

inline bool bind_schema_types(Bijection& types, const pddl::PredicateSchema& a,
                              const pddl::PredicateSchema& b) {
  if (a.arity() != b.arity()) return false;
  for (std::size_t i = 0; i < a.arity(); ++i) {
    if (!bind_type(types, a.params[i].type, b.params[i].type)) return false;
  }
  return true;
}

}  // namespace detail

// All (parameter bijection, predicate correspondence) pairs under which the
// net atom sets of `o` (from op_domain) equal those of `m` (from macro_domain)
// atom for atom.
inline std::vector<MappingFragment> fragments(const Operator& o, const DomainModel& op_domain,
                                              const LiftedMacro& m, const DomainModel& macro_domain,
                                              std::size_t candidate_index = 0) {
  std::vector<MappingFragment> out;
  const auto params = macro::effective_params(o);
  if (params.size() != m.params.size()) return out;
  const macro::NetOperator net = macro::net_effect(o);
  if (net.pre.size() != m.pre.size() || net.add.size() != m.add.size() ||
      net.del.size() != m.del.size()) {
    return out;
  }

  using detail::IndexedAtom;
  const std::vector<IndexedAtom> o_sets[3] = {detail::index_atoms(net.pre, params),
                                              detail::index_atoms(net.add, params),
                                              detail::index_atoms(net.del, params)};
  const std::vector<IndexedAtom> m_sets[3] = {detail::index_atoms(m.pre, m.params),
                                              detail::index_atoms(m.add, m.params),
                                              detail::index_atoms(m.del, m.params)};

  detail::Bijection types;
  detail::Bijection preds;
  std::vector<std::size_t> sigma(params.size());
  std::vector<bool> taken(m.params.size(), false);

  // Atoms of all three sets flattened as (set, index) for the predicate search.
  std::vector<std::pair<int, std::size_t>> order;
  for (int s = 0; s < 3; ++s) {
    for (std::size_t i = 0; i < o_sets[s].size(); ++i) order.emplace_back(s, i);
  }

  std::function<void(std::size_t)> match_atoms = [&](std::size_t k) {
    if (k == order.size()) {
      MappingFragment frag;
      frag.op = o.name;
      frag.candidate = candidate_index;
      frag.pred_pairs.assign(preds.forward().begin(), preds.forward().end());
      frag.type_pairs.assign(types.forward().begin(), types.forward().end());
      frag.param_bijection = sigma;
      out.push_back(std::move(frag));
      return;
    }
    const auto [s, i] = order[k];
    const IndexedAtom& oa = o_sets[s][i];
    for (const IndexedAtom& ma : m_sets[s]) {
      if (ma.args.size() != oa.args.size()) continue;
      bool args_match = true;
      for (std::size_t j = 0; j < oa.args.size() && args_match; ++j) {
        args_match = sigma[oa.args[j]] == ma.args[j];
      }
      if (!args_match || !preds.consistent(oa.pred, ma.pred)) continue;
      const std::size_t pm = preds.mark();
      const std::size_t tm = types.mark();
      const bool fresh = !preds.has_forward(oa.pred);
      bool ok = preds.bind(oa.pred, ma.pred);
      if (ok && fresh) {
        const auto* sa = op_domain.find_predicate(oa.pred);
        const auto* sb = macro_domain.find_predicate(ma.pred);
        ok = sa && sb && detail::bind_schema_types(types, *sa, *sb);
      }
      if (ok) match_atoms(k + 1);
      preds.undo(pm);
      types.undo(tm);
    }
  };

  std::function<void(std::size_t)> match_params = [&](std::size_t i) {
    if (i == params.size()) {
      match_atoms(0);
      return;
    }
    for (std::size_t j = 0; j < m.params.size(); ++j) {
      if (taken[j]) continue;
      const std::size_t tm = types.mark();
      if (detail::bind_type(types, params[i].type, m.params[j].type)) {
        taken[j] = true;
        sigma[i] = j;
        match_params(i + 1);
        taken[j] = false;
      }
      types.undo(tm);
    }
  };
  match_params(0);
  return out;
}

namespace detail {

// Backtracking over one fragment per operator in both directions, keeping a
// single global injective predicate map and type map (oriented D1 -> D2).
class Solver {
 public:
  struct Choice {
    Direction direction;
    std::string op;
    const CandidateSet* set;
    std::vector<MappingFragment> frags;
  };

  Solver(const DomainModel& d1, const DomainModel& d2, std::vector<Choice> vars)
      : d1_(d1), d2_(d2), vars_(std::move(vars)), assigned_(vars_.size(), -1) {}

  // Forces f(p1) = p2 for the next solve.
  void force(const std::map<std::string, std::string>& forced) { forced_ = forced; }

  std::optional<PredicateMapping> solve() {
    preds_ = Bijection();
    types_ = Bijection();
    std::fill(assigned_.begin(), assigned_.end(), -1);
    for (const auto& [a, b] : forced_) {
      const auto* sa = d1_.find_predicate(a);
      const auto* sb = d2_.find_predicate(b);
      if (!sa || !sb || !preds_.bind(a, b) || !bind_schema_types(types_, *sa, *sb)) return std::nullopt;
    }
    if (!search()) return std::nullopt;
    return build();
  }

 private:
  // Fragment pairs oriented as (D1 name, D2 name).
  template <typename F>
  static void oriented(Direction dir, const NamePairs& pairs, F&& fn) {
    for (const auto& [op_side, macro_side] : pairs) {
      if (dir == Direction::kFirstBySecond) {
        fn(op_side, macro_side);
      } else {
        fn(macro_side, op_side);
      }
    }
  }

  bool fits(const Choice& c, const MappingFragment& fr) const {
    bool ok = true;
    oriented(c.direction, fr.pred_pairs, [&](const std::string& a, const std::string& b) {
      ok = ok && preds_.consistent(a, b);
    });
    oriented(c.direction, fr.type_pairs, [&](const std::string& a, const std::string& b) {
      ok = ok && types_.consistent(a, b);
    });
    return ok;
  }

  bool apply(const Choice& c, const MappingFragment& fr) {
    bool ok = true;
    oriented(c.direction, fr.pred_pairs, [&](const std::string& a, const std::string& b) {
      ok = ok && preds_.bind(a, b);
    });
    oriented(c.direction, fr.type_pairs, [&](const std::string& a, const std::string& b) {
      ok = ok && bind_type(types_, a, b);
    });
    return ok;
  }

  bool search() {
    // Fail-first: the unassigned operator with the fewest fitting fragments.
    std::size_t best = vars_.size();
    std::size_t best_count = SIZE_MAX;
    for (std::size_t v = 0; v < vars_.size(); ++v) {
      if (assigned_[v] >= 0) continue;
      std::size_t count = 0;
      for (const auto& fr : vars_[v].frags) count += fits(vars_[v], fr) ? 1 : 0;
      if (count < best_count) {
        best = v;
        best_count = count;
        if (count == 0) return false;
      }
    }
    if (best == vars_.size()) return complete_leftovers();

    const Choice& c = vars_[best];
    for (std::size_t i = 0; i < c.frags.size(); ++i) {
      if (!fits(c, c.frags[i])) continue;
      const std::size_t pm = preds_.mark();
      const std::size_t tm = types_.mark();
      if (apply(c, c.frags[i])) {
        assigned_[best] = static_cast<int>(i);
        if (search()) return true;
        assigned_[best] = -1;
      }
      preds_.undo(pm);
      types_.undo(tm);
    }
    return false;
  }

  // Predicates no chosen fragment mentions are paired in canonical order
  // within their arity class, subject to type consistency.
  bool complete_leftovers() { return complete_pred(0); }

  bool complete_pred(std::size_t i) {
    if (i == d1_.predicates.size()) return true;
    const auto& p1 = d1_.predicates[i];
    if (preds_.has_forward(p1.name)) return complete_pred(i + 1);
    for (const auto& p2 : d2_.predicates) {
      if (p2.arity() != p1.arity() || preds_.has_backward(p2.name)) continue;
      const std::size_t pm = preds_.mark();
      const std::size_t tm = types_.mark();
      if (preds_.bind(p1.name, p2.name) && bind_schema_types(types_, p1, p2) && complete_pred(i + 1)) {
        return true;
      }
      preds_.undo(pm);
      types_.undo(tm);
    }
    return false;
  }

  PredicateMapping build() const {
    PredicateMapping out;
    out.f = preds_.forward();
    out.type_corr = types_.forward();
    out.type_corr.emplace(std::string(pddl::kRootType), std::string(pddl::kRootType));
    // Unpaired types are matched in canonical order where both sides have spares.
    std::vector<std::string> spare2;
    for (const auto& t : d2_.types) {
      if (!types_.has_backward(t.name)) spare2.push_back(t.name);
    }
    std::size_t next = 0;
    for (const auto& t : d1_.types) {
      if (out.type_corr.count(t.name) || next >= spare2.size()) continue;
      out.type_corr.emplace(t.name, spare2[next++]);
    }
    for (std::size_t v = 0; v < vars_.size(); ++v) {
      const Choice& c = vars_[v];
      const MappingFragment& fr = c.frags[static_cast<std::size_t>(assigned_[v])];
      out.chosen.push_back({c.direction, c.op, c.set->candidates[fr.candidate], fr});
    }
    return out;
  }

  const DomainModel& d1_;
  const DomainModel& d2_;
  std::vector<Choice> vars_;
  std::vector<int> assigned_;
  std::map<std::string, std::string> forced_;
  Bijection preds_;
  Bijection types_;
};

}  // namespace detail

// Candidate sets per operator name. second_by_first holds, for each operator
// of d2, macros over d1; first_by_second the converse.
struct SolveInput {
  const DomainModel& d1;
  const DomainModel& d2;
  const std::map<std::string, CandidateSet>& second_by_first;
  const std::map<std::string, CandidateSet>& first_by_second;
};

using SolveResult = std::variant<PredicateMapping, UnsatReason>;

// Finds the lexicographically least consistent, legal, bijective predicate
// mapping (ordered by D1 predicate name, then D2 predicate name), or the
// reason none exists. `forced` pins predicate pairs in advance.
inline SolveResult solve(const SolveInput& in, const std::map<std::string, std::string>& forced = {}) {
  if (auto bad = arity_partition_check(in.d1, in.d2)) return *bad;

  bool all_exhausted = true;
  std::vector<detail::Solver::Choice> vars;
  auto collect = [&](Direction dir, const DomainModel& op_domain, const DomainModel& macro_domain,
                     const std::map<std::string, CandidateSet>& sets) -> std::optional<UnsatReason> {
    for (const auto& op : op_domain.operators) {
      auto it = sets.find(op.name);
      if (it == sets.end() || it->second.candidates.empty()) {
        const bool exhausted = it != sets.end() && it->second.exhausted;
        if (!exhausted) {
          return UnsatReason{UnsatKind::kUnknown, op.name, dir, "candidate search did not finish"};
        }
        return UnsatReason{UnsatKind::kOperatorWithoutCandidates, op.name, dir,
                           "no potentially equivalent macro for '" + op.name + "'"};
      }
      all_exhausted = all_exhausted && it->second.exhausted;
      detail::Solver::Choice c{dir, op.name, &it->second, {}};
      for (std::size_t i = 0; i < it->second.candidates.size(); ++i) {
        auto fr = fragments(op, op_domain, it->second.candidates[i], macro_domain, i);
        c.frags.insert(c.frags.end(), fr.begin(), fr.end());
      }
      vars.push_back(std::move(c));
    }
    return std::nullopt;
  };
  if (auto r = collect(Direction::kSecondByFirst, in.d2, in.d1, in.second_by_first)) return *r;
  if (auto r = collect(Direction::kFirstBySecond, in.d1, in.d2, in.first_by_second)) return *r;

  auto unsat = [&](std::string detail) {
    return UnsatReason{all_exhausted ? UnsatKind::kNoConsistentAssignment : UnsatKind::kUnknown, {},
                       std::nullopt, std::move(detail)};
  };
  for (const auto& v : vars) {
    if (v.frags.empty()) {
      return unsat("no candidate of '" + v.op + "' (" + to_string(v.direction) +
                   ") matches it under any parameter and predicate correspondence");
    }
  }

  detail::Solver solver(in.d1, in.d2, std::move(vars));
  solver.force(forced);
  std::optional<PredicateMapping> best = solver.solve();
  if (!best) return unsat(forced.empty() ? "no consistent predicate mapping" : "no consistent mapping with the forced pairs");

  // Lexicographic refinement: for each D1 predicate in order, try every
  // smaller D2 predicate than the one currently used.
  std::map<std::string, std::string> fixed = forced;
  for (const auto& p1 : in.d1.predicates) {
    if (fixed.count(p1.name)) continue;
    const std::string current = best->f.at(p1.name);
    for (const auto& p2 : in.d2.predicates) {
      if (p2.name >= current) break;
      if (p2.arity() != p1.arity()) continue;
      bool used = false;
      for (const auto& [_, v] : fixed) used = used || v == p2.name;
      if (used) continue;
      auto trial = fixed;
      trial[p1.name] = p2.name;
      solver.force(trial);
      if (auto r = solver.solve()) {
        best = std::move(r);
        break;
      }
    }
    fixed[p1.name] = best->f.at(p1.name);
  }
  return *best;
}

struct VerifyResult {
  bool ok = true;
  std::vector<std::string> evidence;  // one line per failing check
};

// Checks a mapping structurally and, for every operator in both directions,
// that its chosen macro equals the operator after substitution.
inline VerifyResult verify_mapping(const DomainModel& d1, const DomainModel& d2, const PredicateMapping& m) {
  VerifyResult r;
  auto fail = [&](std::string why) {
    r.ok = false;
    r.evidence.push_back(std::move(why));
  };

  std::set<std::string> images;
  for (const auto& p1 : d1.predicates) {
    auto it = m.f.find(p1.name);
    if (it == m.f.end()) {
      fail("predicate '" + p1.name + "' is unmapped");
      continue;
    }
    if (!images.insert(it->second).second) fail("predicate '" + it->second + "' is hit twice");
    const auto* p2 = d2.find_predicate(it->second);
    if (!p2) {
      fail("'" + p1.name + "' maps to unknown predicate '" + it->second + "'");
      continue;
    }
    if (p2->arity() != p1.arity()) {
      fail("'" + p1.name + "' -> '" + p2->name + "' changes arity");
      continue;
    }
    for (std::size_t i = 0; i < p1.arity(); ++i) {
      auto t = m.type_corr.find(p1.params[i].type);
      if (t == m.type_corr.end() || t->second != p2->params[i].type) {
        fail("'" + p1.name + "' -> '" + p2->name + "' disagrees with the type correspondence");
        break;
      }
    }
  }
  if (images.size() != d2.predicates.size() || m.f.size() != d1.predicates.size()) {
    fail("predicate mapping is not a bijection");
  }

  std::map<std::string, std::string> inverse;
  for (const auto& [a, b] : m.f) inverse[b] = a;

  auto check_op = [&](Direction dir, const Operator& op) {
    auto it = std::find_if(m.chosen.begin(), m.chosen.end(), [&](const ChosenMacro& c) {
      return c.direction == dir && c.op == op.name;
    });
    const std::string label = op.name + " (" + to_string(dir) + ")";
    if (it == m.chosen.end()) {
      fail(label + ": no chosen macro");
      return;
    }
    const auto& names = dir == Direction::kFirstBySecond ? m.f : inverse;
    const auto params = macro::effective_params(op);
    const auto& sigma = it->fragment.param_bijection;
    if (sigma.size() != params.size() || it->macro.params.size() != params.size()) {
      fail(label + ": parameter count differs from the chosen macro");
      return;
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (sigma[i] >= it->macro.params.size()) {
        fail(label + ": parameter bijection out of range");
        return;
      }
      std::string t_op = params[i].type;
      std::string t_macro = it->macro.params[sigma[i]].type;
      if (dir == Direction::kSecondByFirst) std::swap(t_op, t_macro);  // orient D1 -> D2
      auto t = m.type_corr.find(t_op);
      if (t == m.type_corr.end() || t->second != t_macro) {
        fail(label + ": parameter " + params[i].name + " breaks the type correspondence");
        return;
      }
    }
    const macro::NetOperator net = macro::net_effect(op);
    auto substitute = [&](const std::vector<Atom>& atoms) {
      std::vector<Atom> out;
      for (const auto& a : atoms) {
        Atom b;
        auto n = names.find(a.pred);
        b.pred = n == names.end() ? "<unmapped " + a.pred + ">" : n->second;
        for (const auto& arg : a.args) {
          auto pit = std::find_if(params.begin(), params.end(),
                                  [&](const pddl::TypedParam& p) { return p.name == arg; });
          b.args.push_back(it->macro.params[sigma[static_cast<std::size_t>(pit - params.begin())]].name);
        }
        out.push_back(std::move(b));
      }
      std::sort(out.begin(), out.end());
      return out;
    };
    if (substitute(net.pre) != it->macro.pre || substitute(net.add) != it->macro.add ||
        substitute(net.del) != it->macro.del) {
      fail(label + ": differs from its chosen macro under the mapping");
    }
  };
  for (const auto& op : d2.operators) check_op(Direction::kSecondByFirst, op);
  for (const auto& op : d1.operators) check_op(Direction::kFirstBySecond, op);
  return r;
}

}  // namespace dval::mapping
