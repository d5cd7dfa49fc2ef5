#include <cstdio>
#include <functional>
#include <random>
#include <set>

#include "support.hpp"

using namespace dval;
namespace test = dval::test;

namespace {

// Per-row wall-clock ceilings for the verdict criteria, in seconds.
constexpr double kGripperLimit = 60.0;
constexpr double kBlocksworldLimit = 60.0;
constexpr double kElevatorLimit = 120.0;
constexpr double kChildSnackLimit = 120.0;
constexpr double kRoverLimit = 1800.0;
constexpr std::size_t kRenameSeeds = 10;
constexpr std::size_t kAppendSequences = 100'000;
constexpr std::size_t kAppendSteps = 8;
constexpr std::size_t kMinCoveragePairs = 20;
constexpr std::size_t kSweepPredicateLimit = 8;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

Outcome verdict_pair(const std::string& file, const harness::MutationKind& same, const harness::MutationKind& differ,
                     double limit) {
  const auto d = test::fixture(file);
  harness::BenchConfig cfg;
  const auto a = harness::run_case({file, d, same}, cfg);
  const auto b = harness::run_case({file, d, differ}, cfg);
  Outcome o;
  o.pass = a.verdict == Status::kEquivalent && b.verdict == Status::kNotEquivalent && a.wall_seconds < limit &&
           b.wall_seconds < limit;
  o.detail = a.version + "=" + to_string(a.verdict) + " (" + fmt(a.wall_seconds) + "s), " + b.version + "=" +
             to_string(b.verdict) + " (" + fmt(b.wall_seconds) + "s), limit " + fmt(limit) + "s";
  return o;
}

search::CandidateSet candidates(const pddl::Operator& target, const pddl::DomainModel& source) {
  search::SearchBudget b;
  b.mode = search::SearchMode::normal;
  b.deadline = search::Seconds(kRoverLimit);
  return search::find_candidates(target, source, ground::meta_objects_for(target, source, ground::TypeClosure(source)),
                                 b);
}

bool has_sequence(const search::CandidateSet& cs, const std::vector<std::string>& ops) {
  return std::any_of(cs.candidates.begin(), cs.candidates.end(), [&](const auto& m) { return m.source_ops == ops; });
}

Outcome rover() {
  const auto d1 = test::fixture("rover.pddl");
  const auto d2 = harness::mutate(harness::mutate(d1, harness::RenameAll{"-m"}, 1),
                                  harness::AddMacro{{"calibrate-m", "take-image-m"}, "calibrate-take-image-m"}, 1);
  const auto macro = candidates(*d2.find_operator("calibrate-take-image-m"), d1);
  const auto soil = candidates(*d2.find_operator("sample-soil-m"), d1);
  const auto plain = harness::run_case(
      {"Rover", d1, harness::AddMacro{{"calibrate", "take-image"}, "calibrate-take-image-m"}}, harness::BenchConfig{});
  CheckConfig cfg;
  cfg.time_limit_seconds = kRoverLimit;
  const Verdict renamed = check(d1, d2, cfg);
  Outcome o;
  const bool macro_ok = has_sequence(macro, {"calibrate", "take-image"});
  const bool soil_ok =
      soil.candidates.size() >= 2 && has_sequence(soil, {"sample-soil"}) && has_sequence(soil, {"sample-rock"});
  o.pass = macro_ok && soil_ok && plain.verdict == Status::kEquivalent && renamed.status == Status::kEquivalent &&
           plain.wall_seconds < kRoverLimit && renamed.metrics.total_seconds < kRoverLimit;
  o.detail = std::string("calibrate-take-image-m <calibrate, take-image> ") + (macro_ok ? "found" : "missing") +
             ", sample-soil-m " + std::to_string(soil.candidates.size()) + " candidates" +
             (soil_ok ? " incl. sample-soil and sample-rock" : " (missing expected)") + ", add-macro " +
             to_string(plain.verdict) + " (" + fmt(plain.wall_seconds) + "s), suffixed add-macro " +
             to_string(renamed.status) + " (" + fmt(renamed.metrics.total_seconds) + "s)";
  return o;
}

std::vector<std::string> bundled_domains() {
  return {"gripper.pddl",   "blocksworld.pddl",   "elevator.pddl", "childsnack.pddl",
          "rover.pddl",     "micro/lamps.pddl",   "micro/corridor.pddl"};
}

Outcome self_equivalence() {
  Outcome o{true, ""};
  for (const auto& f : bundled_domains()) {
    const auto d = test::fixture(f);
    const Verdict v = check(d, d, CheckConfig{});
    bool identity = v.mapping.has_value();
    if (identity) {
      for (const auto& [a, b] : v.mapping->f) identity = identity && a == b;
      identity = identity && mapping::verify_mapping(d, d, *v.mapping).ok;
    }
    if (v.status != Status::kEquivalent || !identity) {
      o.pass = false;
      o.detail += f + " ";
    }
  }
  o.detail = o.pass ? std::to_string(bundled_domains().size()) + " domains, identity mapping verified"
                    : "failed: " + o.detail;
  return o;
}

Outcome rename_soundness() {
  Outcome o{true, ""};
  std::size_t runs = 0;
  for (const auto& f : bundled_domains()) {
    const auto d = test::fixture(f);
    for (std::uint64_t seed = 1; seed <= kRenameSeeds; ++seed) {
      const auto map = harness::rename_map(d, seed);
      const auto r = harness::apply_rename(d, map);
      const Verdict v = check(d, r, CheckConfig{});
      const auto sets = test::candidate_sets(d, r);
      const auto forced = mapping::solve({d, r, sets.second_by_first, sets.first_by_second}, map.predicates);
      const auto* m = std::get_if<mapping::PredicateMapping>(&forced);
      const bool accepted = m && m->f == map.predicates && mapping::verify_mapping(d, r, *m).ok;
      ++runs;
      if (v.status != Status::kEquivalent || !accepted) {
        o.pass = false;
        o.detail += f + "#" + std::to_string(seed) + " ";
      }
    }
  }
  o.detail = o.pass ? std::to_string(runs) + " renamings equivalent, generating bijection verified"
                    : "failed: " + o.detail;
  return o;
}

struct MicroCase {
  std::string label;
  pddl::DomainModel d1, d2;
  ground::ObjectSet objs;
};

std::vector<MicroCase> micro_cases() {
  using namespace harness;
  struct Source {
    std::string file, objects;
    std::vector<MutationKind> muts;
  };
  const std::vector<Source> sources{
      {"gripper.pddl", "gripper", {AddMacro{{"pick", "drop"}, {}}, AddMacro{{"pick", "move"}, {}}, DeletePredicate{"free"}}},
      {"blocksworld.pddl", "blocksworld", {AddMacro{{"unstack", "put-down"}, {}}, DeletePredicate{"handempty"}}},
      {"elevator.pddl", "elevator", {AddMacro{{"board", "up"}, {}}}},
      {"childsnack.pddl", "childsnack", {AddMacro{{"make-sandwich", "put-on-tray"}, {}}, DeleteOperator{"move-tray"}}},
      {"micro/lamps.pddl", "lamps", {AddMacro{{"switch-on", "switch-off"}, {}}}},
      {"micro/corridor.pddl", "corridor", {}},
  };
  std::vector<MicroCase> out;
  for (const auto& s : sources) {
    const auto d = test::fixture(s.file);
    const auto objs = test::micro_objects(s.objects);
    out.push_back({s.file + " self", d, d, objs});
    out.push_back({s.file + " rename", d, mutate(d, RenameAll{}, 1), objs});
    for (const auto& m : s.muts) out.push_back({s.file + " " + describe(m), d, mutate(d, m, 1), objs});
    for (const auto& o : d.operators) {
      out.push_back({s.file + " without " + o.name, d, mutate(d, DeleteOperator{o.name}, 1), objs});
    }
  }
  return out;
}

Outcome oracle_agreement() {
  Outcome o{true, ""};
  std::size_t eq = 0, neq = 0, swept = 0, skipped = 0;
  for (const auto& c : micro_cases()) {
    const Verdict v = check(c.d1, c.d2, CheckConfig{});
    bool ok = true;
    if (v.status == Status::kEquivalent) {
      ++eq;
      ok = oracle::equivalent_under(c.d1, c.d2, *v.mapping, c.objs);
    } else if (v.status == Status::kNotEquivalent) {
      ++neq;
      if (c.d1.predicates.size() <= kSweepPredicateLimit) {
        ++swept;
        ok = oracle::search_mappings(c.d1, c.d2, c.objs).empty();
      } else {
        ++skipped;
      }
    } else {
      ok = false;
    }
    if (!ok) {
      o.pass = false;
      o.detail += "[" + c.label + ": " + to_string(v.status) + "] ";
    }
  }
  const std::string counts = std::to_string(eq) + " equivalent confirmed, " + std::to_string(neq) +
                             " not-equivalent (" + std::to_string(swept) + " swept, " + std::to_string(skipped) +
                             " above " + std::to_string(kSweepPredicateLimit) + " predicates)";
  o.detail = o.pass ? counts : "disagreement " + o.detail + "; " + counts;
  return o;
}

// Independent set-algebra composition used as the reference for append().
struct Ref {
  std::set<macro::AtomId> pre, add, del;
};

std::optional<Ref> ref_append(const Ref& m, const macro::IndexedAction& a) {
  for (auto p : a.pre)
    if (m.del.count(p)) return std::nullopt;
  Ref r = m;
  for (auto p : a.pre)
    if (!m.add.count(p)) r.pre.insert(p);
  for (auto p : a.add) {
    if (!r.pre.count(p)) r.add.insert(p);
    r.del.erase(p);
  }
  for (auto p : a.del) {
    r.add.erase(p);
    r.del.insert(p);
  }
  return r;
}

Outcome update_rules() {
  Outcome o{true, ""};
  std::mt19937_64 rng(2024);
  std::size_t sequences = 0, appends = 0, violations = 0, single = 0;
  const auto names = test::all_fixtures();
  for (const auto& f : names) {
    const auto d = test::fixture(f);
    const ground::TypeClosure tc(d);
    for (std::uint32_t i = 0; i < d.operators.size(); ++i) {
      const ground::Grounding g(d, ground::meta_objects_for(d.operators[i], d, tc), tc);
      for (const auto& a : g.actions()) {
        if (a.op != i) continue;
        if (std::set<std::uint32_t>(a.binding.begin(), a.binding.end()).size() != a.binding.size()) continue;
        auto m = macro::append(macro::MacroState{}, a);
        ++single;
        if (!m || !(m->sig == macro::signature_of(d.operators[i]))) ++violations;
        break;
      }
    }
  }
  std::vector<std::unique_ptr<ground::Grounding>> groundings;
  for (const auto& f : names) {
    const auto d = test::fixture(f);
    const ground::TypeClosure tc(d);
    groundings.push_back(std::make_unique<ground::Grounding>(d, ground::meta_objects_for(d.operators.front(), d, tc), tc));
  }
  for (; sequences < kAppendSequences; ++sequences) {
    const auto& acts = groundings[sequences % groundings.size()]->actions();
    macro::MacroState m;
    Ref r;
    for (std::size_t step = 0; step < kAppendSteps; ++step) {
      const auto& a = acts[rng() % acts.size()];
      auto next = macro::append(m, a);
      auto ref = ref_append(r, a);
      if (next.has_value() != ref.has_value()) {
        ++violations;
        break;
      }
      if (!next) continue;
      m = std::move(*next);
      r = std::move(*ref);
      ++appends;
      std::size_t dp = 0;
      for (auto x : r.del) dp += r.pre.count(x);
      bool disjoint = true;
      for (auto x : m.add) disjoint = disjoint && !std::binary_search(m.pre.begin(), m.pre.end(), x) &&
                                      !std::binary_search(m.del.begin(), m.del.end(), x);
      const bool same_sets = std::set<macro::AtomId>(m.pre.begin(), m.pre.end()) == r.pre &&
                             std::set<macro::AtomId>(m.add.begin(), m.add.end()) == r.add &&
                             std::set<macro::AtomId>(m.del.begin(), m.del.end()) == r.del;
      const bool counts = m.sig.prem == m.pre.size() && m.sig.addm == m.add.size() && m.sig.delm_prem == dp &&
                          m.sig.delm_prem + m.sig.delm_not_prem == m.del.size();
      if (!disjoint || !same_sets || !counts || !macro::consistent(m)) ++violations;
    }
  }
  o.pass = violations == 0 && sequences >= kAppendSequences;
  o.detail = std::to_string(sequences) + " sequences, " + std::to_string(appends) + " appends, " +
             std::to_string(single) + " single-step signatures, " + std::to_string(violations) + " violations";
  return o;
}

Outcome coverage_sanity() {
  const auto pairs = test::coverage_pairs();
  std::size_t agree = 0, positive = 0, negative = 0;
  std::string bad;
  for (const auto& p : pairs) {
    const auto sides = oracle::coverage_sides(p.d1, p.d2, p.objs, 8);
    if (sides.agree()) {
      ++agree;
      (sides.domain_subset ? positive : negative)++;
    } else {
      bad += "[" + p.label + "] ";
    }
  }
  Outcome o;
  o.pass = agree == pairs.size() && pairs.size() >= kMinCoveragePairs && positive > 0 && negative > 0;
  o.detail = std::to_string(agree) + "/" + std::to_string(pairs.size()) + " pairs agree (" + std::to_string(positive) +
             " covered, " + std::to_string(negative) + " not covered)" + (bad.empty() ? "" : "; disagree " + bad);
  return o;
}

Outcome determinism() {
  harness::BenchConfig cfg;
  cfg.seed = 11;
  const auto cases = harness::bundled_matrix(DVAL_FIXTURES);
  const auto a = report::strip_timing(report::bench_document(harness::run_benchmark(cases, cfg), cfg)).dump(2);
  const auto b = report::strip_timing(report::bench_document(harness::run_benchmark(cases, cfg), cfg)).dump(2);
  Outcome o;
  o.pass = a == b && !a.empty();
  o.detail = std::to_string(cases.size()) + " rows, " + std::to_string(a.size()) + " bytes, " +
             (o.pass ? "identical" : "differ");
  return o;
}

}  // namespace

int main() {
  using harness::AddMacro;
  using harness::DeleteOperator;
  using harness::DeletePredicate;
  struct Criterion {
    int id;
    std::string name;
    bool gating;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "Gripper verdicts", true,
       [] { return verdict_pair("gripper.pddl", AddMacro{{"pick", "drop"}, {}}, DeletePredicate{"free"}, kGripperLimit); }},
      {2, "Blocksworld verdicts", true,
       [] {
         return verdict_pair("blocksworld.pddl", AddMacro{{"unstack", "put-down"}, {}}, DeletePredicate{"handempty"},
                             kBlocksworldLimit);
       }},
      {3, "Elevator verdicts", true,
       [] { return verdict_pair("elevator.pddl", AddMacro{{"board", "up"}, {}}, DeleteOperator{"down"}, kElevatorLimit); }},
      {4, "ChildSnack verdicts", true,
       [] {
         return verdict_pair("childsnack.pddl", AddMacro{{"make-sandwich", "put-on-tray"}, {}},
                             DeleteOperator{"move-tray"}, kChildSnackLimit);
       }},
      {5, "Rover candidates (non-gating)", false, rover},
      {6, "Self-equivalence", true, self_equivalence},
      {7, "Rename soundness", true, rename_soundness},
      {8, "Oracle agreement", true, oracle_agreement},
      {9, "Update-rule invariants", true, update_rules},
      {10, "Coverage biconditional", true, coverage_sanity},
      {11, "Determinism", true, determinism},
  };
  bool ok = true;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("AC%d %s %s: %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    ok = ok && (o.pass || !c.gating);
  }
  return ok ? 0 : 1;
}
