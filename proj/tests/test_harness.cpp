#include <gtest/gtest.h>

#include <set>

#include "support.hpp"

using namespace dval;
using namespace dval::harness;

namespace {

std::vector<MutationKind> kinds_for(const pddl::DomainModel& d) {
  return {AddMacro{{d.operators[0].name, d.operators.back().name}, "fused", true}, DeletePredicate{d.predicates[0].name},
          DeleteOperator{d.operators[0].name}, RenameAll{}, RenameAll{"-x"}};
}

struct Micro {
  std::string fixture;
  std::string objects;
};

const std::vector<Micro>& micro() {
  static const std::vector<Micro> m{{"gripper.pddl", "gripper"},
                                    {"blocksworld.pddl", "blocksworld"},
                                    {"elevator.pddl", "elevator"},
                                    {"micro/lamps.pddl", "lamps"},
                                    {"micro/corridor.pddl", "corridor"}};
  return m;
}

// Transitions of o's instances that bind distinct parameters to distinct
// objects, tested against r.
bool injective_within(const pddl::DomainModel& d, const pddl::Operator& o, const ground::ObjectSet& objs,
                      const oracle::ReachSet& r) {
  const oracle::StateSpace space(ground::ground_atoms(d, objs, ground::TypeClosure(d)), {});
  for (const auto& a : ground::instantiate_actions(test::keep_ops(d, {o.name}), objs, ground::TypeClosure(d))) {
    if (std::set<std::string>(a.binding.begin(), a.binding.end()).size() != a.binding.size()) continue;
    const auto m = *space.mask(a);
    for (oracle::StateId s = 0; s < space.state_count(); ++s) {
      if (m.applicable(s) && !r.contains(s, m.apply(s))) return false;
    }
  }
  return true;
}

CheckConfig quick() {
  CheckConfig c;
  c.time_limit_seconds = 120;
  return c;
}

}  // namespace

TEST(Mutate, DeterministicPerSeed) {
  for (const auto& f : test::all_fixtures()) {
    const auto d = test::fixture(f);
    for (const auto& k : kinds_for(d)) {
      try {
        EXPECT_EQ(pddl::serialize(mutate(d, k, 7)), pddl::serialize(mutate(d, k, 7))) << f << " " << describe(k);
      } catch (const InvalidMutation&) {
        // Some first/last operator pairs are not composable.
      }
    }
  }
}

TEST(Mutate, SeedsGiveDifferentRenamings) {
  const auto d = test::fixture("childsnack.pddl");
  std::set<std::string> seen;
  for (std::uint64_t seed = 0; seed < 10; ++seed) seen.insert(pddl::serialize(mutate(d, RenameAll{}, seed)));
  EXPECT_GT(seen.size(), 1u);
}

TEST(Mutate, RenameThenInverseIsIdentity) {
  for (const auto& f : test::all_fixtures()) {
    const auto d = test::fixture(f);
    for (std::uint64_t seed : {0u, 1u, 99u}) {
      const auto m = rename_map(d, seed);
      const auto there = apply_rename(d, m);
      EXPECT_EQ(apply_rename(there, invert(m)), d) << f << seed;
      EXPECT_EQ(there, mutate(d, RenameAll{}, seed));
    }
  }
}

TEST(Mutate, RenameIsBijectiveAndTotal) {
  for (const auto& f : test::all_fixtures()) {
    const auto d = test::fixture(f);
    const auto m = rename_map(d, 3);
    std::set<std::string> preds, ops, types;
    for (const auto& [a, b] : m.predicates) preds.insert(b);
    for (const auto& [a, b] : m.operators) ops.insert(b);
    for (const auto& [a, b] : m.types) types.insert(b);
    EXPECT_EQ(preds.size(), d.predicates.size()) << f;
    EXPECT_EQ(ops.size(), d.operators.size()) << f;
    EXPECT_EQ(types.size(), d.types.size()) << f;
    const auto r = apply_rename(d, m);
    for (const auto& p : r.predicates) EXPECT_FALSE(d.find_predicate(p.name)) << f << " " << p.name;
    EXPECT_NE(r.name, d.name);
  }
}

TEST(Mutate, SuffixRename) {
  const auto g = test::fixture("gripper.pddl");
  const auto r = mutate(g, RenameAll{"-m"}, 1);
  EXPECT_TRUE(r.find_predicate("at-robby-m"));
  EXPECT_TRUE(r.find_operator("pick-m"));
  EXPECT_TRUE(r.has_type("ball-m"));
  EXPECT_EQ(r.name, g.name + "-m");
}

TEST(Mutate, AddMacroAppendsAndKeepsOriginals) {
  const auto g = test::fixture("gripper.pddl");
  const auto m = mutate(g, AddMacro{{"pick", "drop"}, {}}, 1);
  ASSERT_EQ(m.operators.size(), 4u);
  for (const auto& o : g.operators) EXPECT_EQ(*m.find_operator(o.name), o);
  const auto& fused = *m.find_operator("pick-drop");
  // pick then drop on the same ball, room and gripper only consumes carry.
  macro::MacroSignature want;
  want.prem = 3;
  want.delm_not_prem = 1;
  EXPECT_EQ(macro::signature_of(fused), want);
  EXPECT_EQ(fused.pre.size(), 3u);
  EXPECT_TRUE(fused.add.empty());
  ASSERT_EQ(fused.del.size(), 1u);
  EXPECT_EQ(fused.del[0].pred, "carry");
}

TEST(Mutate, AddMacroIsAnInstanceOfItsSequence) {
  for (const auto& [f, objs] : std::vector<std::pair<std::string, std::string>>{
           {"gripper.pddl", "gripper"}, {"blocksworld.pddl", "blocksworld"}, {"elevator.pddl", "elevator"}}) {
    const auto d = test::fixture(f);
    const auto o = test::micro_objects(objs);
    for (const auto& a : d.operators) {
      for (const auto& b : d.operators) {
        pddl::DomainModel m;
        try {
          m = mutate(d, AddMacro{{a.name, b.name}, "fused"}, 1);
        } catch (const InvalidMutation&) {
          continue;
        }
        EXPECT_TRUE(injective_within(m, *m.find_operator("fused"), o, oracle::reach_set_sequence(d, {a, b}, o)))
            << f << " " << a.name << " " << b.name;
      }
    }
  }
}

TEST(Mutate, RandomizedBindingIsDeterministic) {
  const auto g = test::fixture("gripper.pddl");
  const AddMacro spec{{"pick", "move"}, {}, true};
  for (std::uint64_t seed = 0; seed < 5; ++seed) EXPECT_EQ(mutate(g, spec, seed), mutate(g, spec, seed));
}

TEST(Mutate, DeletePredicateRemovesEveryMention) {
  const auto g = test::fixture("gripper.pddl");
  const auto m = mutate(g, DeletePredicate{"free"}, 1);
  EXPECT_FALSE(m.find_predicate("free"));
  for (const auto& o : m.operators)
    for (const auto* set : {&o.pre, &o.add, &o.del})
      for (const auto& a : *set) EXPECT_NE(a.pred, "free") << o.name;
  EXPECT_EQ(m.operators.size(), g.operators.size());
}

TEST(Mutate, DeleteOperator) {
  const auto g = test::fixture("gripper.pddl");
  const auto m = mutate(g, DeleteOperator{"drop"}, 1);
  EXPECT_FALSE(m.find_operator("drop"));
  EXPECT_EQ(m.operators.size(), 2u);
  EXPECT_EQ(m.predicates, g.predicates);
}

TEST(Mutate, InvalidMutations) {
  const auto g = test::fixture("gripper.pddl");
  EXPECT_THROW(mutate(g, DeleteOperator{"fly"}, 1), InvalidMutation);
  EXPECT_THROW(mutate(g, DeletePredicate{"wet"}, 1), InvalidMutation);
  EXPECT_THROW(mutate(g, AddMacro{{"pick", "fly"}, {}}, 1), InvalidMutation);
  EXPECT_THROW(mutate(g, AddMacro{{}, {}}, 1), InvalidMutation);
  EXPECT_THROW(mutate(g, AddMacro{{"pick", "pick"}, {}}, 1), InvalidMutation);
  EXPECT_THROW(mutate(g, AddMacro{{"pick", "drop"}, "move"}, 1), InvalidMutation);
}

TEST(Mutate, AddMacroIsEquivalentOnMicroFixtures) {
  std::vector<std::string> escaping;
  for (const auto& m : micro()) {
    const auto d = test::fixture(m.fixture);
    const auto objs = test::micro_objects(m.objects);
    for (const auto& a : d.operators) {
      for (const auto& b : d.operators) {
        pddl::DomainModel plus;
        try {
          plus = mutate(d, AddMacro{{a.name, b.name}, "fused"}, 1);
        } catch (const InvalidMutation&) {
          continue;
        }
        SCOPED_TRACE(m.fixture + " " + a.name + " " + b.name);
        const Verdict v = check(d, plus, quick());
        ASSERT_EQ(v.status, Status::kEquivalent);
        const auto& fused = *plus.find_operator("fused");
        if (oracle::reach_set_operator(plus, fused, objs).subset_of(oracle::reach_set_domain(d, objs))) {
          EXPECT_TRUE(oracle::equivalent_under(d, plus, *v.mapping, objs));
        } else {
          escaping.push_back(m.fixture + " " + a.name + " " + b.name);
        }
      }
    }
  }
  // Only fusions whose parameters can collapse onto one block escape.
  EXPECT_EQ(escaping, (std::vector<std::string>{"blocksworld.pddl pick-up stack", "blocksworld.pddl stack unstack",
                                                "blocksworld.pddl unstack stack"}));
}

// A fused operator is a plain STRIPS schema, so its parameters may be bound
// to the same object. pick-up-stack(a, a) builds (on a a), which no action
// sequence of the source domain reaches; the candidate search grounds every
// parameter on its own object and cannot see this.
TEST(Mutate, CollapsedParametersLeaveTheSourceReachSet) {
  const auto b = test::fixture("blocksworld.pddl");
  const auto plus = mutate(b, AddMacro{{"pick-up", "stack"}, {}}, 1);
  const auto objs = test::micro_objects("blocksworld");
  const oracle::StateSpace space(ground::ground_atoms(b, objs, ground::TypeClosure(b)), {});
  oracle::StateId s = 0;
  for (const auto& a : std::vector<ground::GroundAtom>{{"clear", {"a"}}, {"ontable", {"a"}}, {"handempty", {}}})
    s |= oracle::StateId{1} << *space.bit(a);
  const oracle::StateId t = (s & ~(oracle::StateId{1} << *space.bit({"ontable", {"a"}})) &
                             ~(oracle::StateId{1} << *space.bit({"clear", {"a"}}))) |
                            oracle::StateId{1} << *space.bit({"on", {"a", "a"}});
  EXPECT_TRUE(oracle::reach_set_operator(plus, *plus.find_operator("pick-up-stack"), objs).contains(s, t));
  EXPECT_FALSE(oracle::reach_set_domain(b, objs).contains(s, t));
  EXPECT_EQ(check(b, plus, quick()).status, Status::kEquivalent);
}

// When the oracle shows an operator's transitions escape the closure of the
// others, dropping it must be detected.
TEST(Mutate, DeleteOperatorDetectedWhenOracleConfirms) {
  std::size_t confirmed = 0;
  for (const auto& m : micro()) {
    const auto d = test::fixture(m.fixture);
    const auto objs = test::micro_objects(m.objects);
    for (const auto& o : d.operators) {
      const auto minus = mutate(d, DeleteOperator{o.name}, 1);
      const bool escapes = !oracle::reach_set_operator(d, o, objs).subset_of(oracle::reach_set_domain(minus, objs));
      if (!escapes) continue;
      ++confirmed;
      EXPECT_EQ(check(d, minus, quick()).status, Status::kNotEquivalent) << m.fixture << " " << o.name;
    }
  }
  EXPECT_GT(confirmed, 8u);
}

TEST(Bench, BundledMatrixPattern) {
  BenchConfig cfg;
  cfg.check.time_limit_seconds = 120;
  const auto rows = run_benchmark(bundled_matrix(DVAL_FIXTURES), cfg);
  ASSERT_EQ(rows.size(), 12u);
  std::vector<std::string> got;
  for (const auto& r : rows) got.push_back(r.domain + " " + r.version + " " + eq_label(r.verdict));
  EXPECT_EQ(got, (std::vector<std::string>{
                     "Gripper Add macro Yes", "Gripper Del Pred. No", "Gripper rename Yes",
                     "Blocksworld Add macro Yes", "Blocksworld Del Pred. No", "Blocksworld rename Yes",
                     "Elevator Add macro Yes", "Elevator Del Op No", "Elevator rename Yes",
                     "ChildSnack Add macro Yes", "ChildSnack Del Op No", "ChildSnack rename Yes"}));
  for (const auto& r : rows) {
    EXPECT_EQ(r.mapping_digest.empty(), r.verdict != Status::kEquivalent) << r.domain << " " << r.version;
  }
}

TEST(Bench, EmptyListGivesEmptyReport) {
  const auto rows = run_benchmark({}, BenchConfig{});
  EXPECT_TRUE(rows.empty());
  const auto doc = report::bench_document(rows, BenchConfig{});
  EXPECT_TRUE(doc["rows"].is_array());
  EXPECT_TRUE(doc["rows"].empty());
  EXPECT_EQ(report::bench_csv(rows), "domain,version,eq,cpu_seconds,states,preds,ops,gmo\n");
}

TEST(Bench, BudgetRowIsUnknown) {
  BenchConfig cfg;
  cfg.check.state_cap = 1;
  const auto d = test::fixture("blocksworld.pddl");
  const auto row = run_case({"Blocksworld", d, AddMacro{{"unstack", "put-down"}, {}}}, cfg);
  EXPECT_EQ(row.verdict, Status::kUnknown);
  EXPECT_NE(row.reason.find("Budget"), std::string::npos) << row.reason;
  EXPECT_TRUE(row.mapping_digest.empty());
}

TEST(Bench, FailingRowIsRecorded) {
  const auto d = test::fixture("gripper.pddl");
  const auto row = run_case({"Gripper", d, DeleteOperator{"fly"}}, BenchConfig{});
  EXPECT_EQ(row.verdict, Status::kUnknown);
  EXPECT_NE(row.reason.find("fly"), std::string::npos);
}

TEST(Bench, ParallelRowsMatchSerial) {
  BenchConfig serial, parallel;
  parallel.jobs = 3;
  const auto cases = bundled_matrix(DVAL_FIXTURES);
  const auto a = report::strip_timing(report::bench_document(run_benchmark(cases, serial), serial));
  auto b = report::strip_timing(report::bench_document(run_benchmark(cases, parallel), parallel));
  b["fingerprint"] = a["fingerprint"];
  EXPECT_EQ(a.dump(), b.dump());
}

TEST(Digest, StableAndDistinct) {
  const auto g = test::fixture("gripper.pddl");
  const auto v1 = check(g, g, quick());
  const auto v2 = check(g, mutate(g, RenameAll{}, 1), quick());
  const auto d1 = mapping_digest(v1.mapping);
  EXPECT_EQ(d1.size(), 16u);
  EXPECT_EQ(d1, mapping_digest(check(g, g, quick()).mapping));
  EXPECT_NE(d1, mapping_digest(v2.mapping));
  EXPECT_EQ(mapping_digest(std::nullopt), "");
}
