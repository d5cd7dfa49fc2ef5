#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dval/dval.hpp"

namespace dval::test {

inline std::filesystem::path fixture_path(const std::string& name) {
  return std::filesystem::path(DVAL_FIXTURES) / name;
}

inline std::string fixture_text(const std::string& name) { return harness::read_file(fixture_path(name)); }

inline pddl::DomainModel fixture(const std::string& name) {
  return pddl::canonicalize(pddl::parse_domain(fixture_text(name)));
}

inline pddl::DomainModel domain(const std::string& text) { return pddl::canonicalize(pddl::parse_domain(text)); }

inline const std::vector<std::string>& matrix_fixtures() {
  static const std::vector<std::string> names{"gripper.pddl", "blocksworld.pddl", "elevator.pddl",
                                              "childsnack.pddl"};
  return names;
}

inline const std::vector<std::string>& all_fixtures() {
  static const std::vector<std::string> names{"gripper.pddl", "blocksworld.pddl", "elevator.pddl",
                                              "childsnack.pddl", "rover.pddl"};
  return names;
}

inline ground::ObjectSet objects(const std::string& text) { return ground::parse_objects(text); }

// Rendering of a lifted atom-set triple that is independent of parameter
// names: the least rendering over all type-preserving renamings.
inline std::string normal_form(const std::vector<pddl::TypedParam>& params, const std::vector<pddl::Atom>& pre,
                               const std::vector<pddl::Atom>& add, const std::vector<pddl::Atom>& del) {
  std::vector<std::size_t> perm(params.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::string best;
  bool first = true;
  do {
    bool typed = true;
    for (std::size_t i = 0; i < perm.size(); ++i) typed = typed && params[i].type == params[perm[i]].type;
    if (!typed) continue;
    std::map<std::string, std::string> ren;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      std::size_t rank = 0;
      for (std::size_t j = 0; j < perm[i]; ++j) rank += params[j].type == params[perm[i]].type;
      ren[params[i].name] = "?" + params[i].type + std::to_string(rank);
    }
    std::string s;
    for (const auto* set : {&pre, &add, &del}) {
      std::vector<std::string> atoms;
      for (const auto& a : *set) {
        std::string t = "(" + a.pred;
        for (const auto& x : a.args) t += " " + ren.at(x);
        atoms.push_back(t + ")");
      }
      std::sort(atoms.begin(), atoms.end());
      for (const auto& t : atoms) s += t;
      s += "|";
    }
    if (first || s < best) best = s;
    first = false;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline std::string normal_form(const macro::LiftedMacro& m) { return normal_form(m.params, m.pre, m.add, m.del); }

inline std::string normal_form(const pddl::Operator& o) {
  std::vector<pddl::Atom> add;
  for (const auto& a : o.add) {
    if (std::find(o.pre.begin(), o.pre.end(), a) == o.pre.end()) add.push_back(a);
  }
  std::vector<pddl::TypedParam> used;
  for (const auto& p : o.params) {
    bool occurs = false;
    for (const auto* set : {&o.pre, &o.add, &o.del})
      for (const auto& a : *set) occurs = occurs || std::count(a.args.begin(), a.args.end(), p.name);
    if (occurs) used.push_back(p);
  }
  return normal_form(used, o.pre, add, o.del);
}

// Every operator's candidate set in both directions, normal mode.
struct CandidateSets {
  std::map<std::string, search::CandidateSet> second_by_first;
  std::map<std::string, search::CandidateSet> first_by_second;
};

inline CandidateSets candidate_sets(const pddl::DomainModel& d1, const pddl::DomainModel& d2) {
  CandidateSets out;
  search::SearchBudget b;
  b.mode = search::SearchMode::normal;
  auto fill = [&](const pddl::DomainModel& ops, const pddl::DomainModel& source,
                  std::map<std::string, search::CandidateSet>& into) {
    for (const auto& o : ops.operators) {
      into[o.name] = search::find_candidates(o, source, ground::meta_objects_for(o, source, ground::TypeClosure(source)), b);
    }
  };
  fill(d2, d1, out.second_by_first);
  fill(d1, d2, out.first_by_second);
  return out;
}

inline ground::ObjectSet micro_objects(const std::string& name) {
  return ground::parse_objects(fixture_text("micro/" + name + ".objects"));
}

// d restricted to the named operators, in that order.
inline pddl::DomainModel keep_ops(pddl::DomainModel d, const std::vector<std::string>& names) {
  std::vector<pddl::Operator> kept;
  for (const auto& n : names) kept.push_back(*d.find_operator(n));
  d.operators = std::move(kept);
  return pddl::canonicalize(d);
}

struct OraclePair {
  std::string label;
  pddl::DomainModel d1, d2;
  ground::ObjectSet objs;
};

// Micro domain pairs over shared predicates, for both sides of the
// operator-coverage biconditional.
inline std::vector<OraclePair> coverage_pairs() {
  using harness::AddMacro;
  using harness::DeleteOperator;
  using harness::mutate;
  const auto g = fixture("gripper.pddl");
  const auto b = fixture("blocksworld.pddl");
  const auto e = fixture("elevator.pddl");
  const auto l = fixture("micro/lamps.pddl");
  const auto c = fixture("micro/corridor.pddl");
  const auto go = micro_objects("gripper");
  const auto bo = micro_objects("blocksworld");
  const auto eo = micro_objects("elevator");
  const auto lo = micro_objects("lamps");
  const auto co = micro_objects("corridor");
  const auto pick_drop = mutate(g, AddMacro{{"pick", "drop"}, {}}, 1);
  const auto pick_move = mutate(g, AddMacro{{"pick", "move"}, {}}, 1);
  const auto unstack_put = mutate(b, AddMacro{{"unstack", "put-down"}, {}}, 1);
  const auto pick_put = mutate(b, AddMacro{{"pick-up", "put-down"}, {}}, 1);
  const auto board_up = mutate(e, AddMacro{{"board", "up"}, {}}, 1);
  auto two_steps = c;
  two_steps.operators.push_back({"step-step",
                                 {{"?a", "cell"}, {"?b", "cell"}, {"?c", "cell"}},
                                 {{"at", {"?a"}, {}}, {"link", {"?a", "?b"}, {}}, {"link", {"?b", "?c"}, {}}},
                                 {{"at", {"?a"}, {}}},
                                 {{"at", {"?c"}, {}}}});
  two_steps = pddl::canonicalize(two_steps);
  auto teleport = c;
  teleport.operators[0].name = "teleport";
  teleport.operators[0].pre = {{"at", {"?from"}, {}}};
  teleport = pddl::canonicalize(teleport);
  return {
      {"gripper self", g, g, go},
      {"gripper against gripper without move", g, mutate(g, DeleteOperator{"move"}, 1), go},
      {"gripper against gripper without drop", g, mutate(g, DeleteOperator{"drop"}, 1), go},
      {"gripper against gripper without pick", g, mutate(g, DeleteOperator{"pick"}, 1), go},
      {"gripper with pick-drop against gripper", pick_drop, g, go},
      {"pick-drop alone against gripper", keep_ops(pick_drop, {"pick-drop"}), g, go},
      {"pick-move alone against gripper", keep_ops(pick_move, {"pick-move"}), g, go},
      {"gripper against pick-move instead of pick", g, keep_ops(pick_move, {"pick-move", "move", "drop"}), go},
      {"move alone against gripper", keep_ops(g, {"move"}), g, go},
      {"gripper against no operators", g, keep_ops(g, {}), go},
      {"no operators against gripper", keep_ops(g, {}), g, go},
      {"blocksworld self", b, b, bo},
      {"blocksworld against blocksworld without stack", b, mutate(b, DeleteOperator{"stack"}, 1), bo},
      {"unstack-put-down alone against blocksworld", keep_ops(unstack_put, {"unstack-put-down"}), b, bo},
      {"pick-up and put-down against their macro", keep_ops(b, {"pick-up", "put-down"}),
       keep_ops(pick_put, {"pick-up-put-down"}), bo},
      {"elevator self", e, e, eo},
      {"elevator against elevator without down", e, mutate(e, DeleteOperator{"down"}, 1), eo},
      {"elevator against elevator without board", e, mutate(e, DeleteOperator{"board"}, 1), eo},
      {"board-up alone against elevator", keep_ops(board_up, {"board-up"}), e, eo},
      {"lamps switch-on against lamps", keep_ops(l, {"switch-on"}), l, lo},
      {"lamps against switch-on only", l, keep_ops(l, {"switch-on"}), lo},
      {"corridor double step against corridor", keep_ops(two_steps, {"step-step"}), c, co},
      {"corridor against double step only", c, keep_ops(two_steps, {"step-step"}), co},
      {"teleport against corridor", teleport, c, co},
      {"corridor against teleport", c, teleport, co},
  };
}

}  // namespace dval::test
