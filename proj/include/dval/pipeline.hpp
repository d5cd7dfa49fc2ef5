#pragma once

#include <atomic>
#include <chrono>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "dval/ground.hpp"
#include "dval/mapping.hpp"
#include "dval/oracle.hpp"
#include "dval/pddl/canonical.hpp"
#include "dval/search.hpp"

namespace dval {

enum class Status { kEquivalent, kNotEquivalent, kUnknown };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::kEquivalent: return "equivalent";
    case Status::kNotEquivalent: return "not-equivalent";
    case Status::kUnknown: return "unknown";
  }
  return "?";
}

// Process exit code for a verdict: 0 equivalent, 1 not equivalent, 2 unknown.
inline int exit_code(Status s) {
  switch (s) {
    case Status::kEquivalent: return 0;
    case Status::kNotEquivalent: return 1;
    case Status::kUnknown: return 2;
  }
  return 2;
}

enum class CheckMode { kAgile, kNormal, kAgileThenNormal };

inline const char* to_string(CheckMode m) {
  switch (m) {
    case CheckMode::kAgile: return "agile";
    case CheckMode::kNormal: return "normal";
    case CheckMode::kAgileThenNormal: return "agile-then-normal";
  }
  return "?";
}

struct CheckConfig {
  CheckMode mode = CheckMode::kAgileThenNormal;
  double agile_slot_seconds = 180.0;
  std::size_t state_cap = 5'000'000;
  double time_limit_seconds = 1800.0;
  unsigned jobs = 1;
  std::optional<ground::ObjectSet> oracle_objects;
  oracle::OracleConfig oracle;
};

struct OperatorSearch {
  mapping::Direction direction = mapping::Direction::kSecondByFirst;
  std::string op;
  search::CandidateSet result;
  bool budget_hit = false;
  bool ran = false;  // false when skipped after an earlier decisive failure
  double seconds = 0.0;
};

struct Metrics {
  double search_seconds = 0.0;
  double solve_seconds = 0.0;
  double oracle_seconds = 0.0;
  double total_seconds = 0.0;
  std::size_t states_explored = 0;
  std::size_t gmo = 0;
  bool normal_restart = false;
};

struct OracleCheck {
  bool agrees = false;
  std::size_t objects = 0;
  std::string error;
};

struct Verdict {
  Status status = Status::kUnknown;
  std::optional<mapping::PredicateMapping> mapping;
  std::optional<mapping::UnsatReason> reason;
  std::vector<OperatorSearch> searches;
  Metrics metrics;
  std::optional<OracleCheck> oracle;
};

namespace detail {

template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  const unsigned count = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
  for (unsigned w = 0; w < count; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : workers) t.join();
}

}  // namespace detail

// Decides functional equivalence of two domains: arity check, candidate
// search for every operator in both directions, predicate-mapping solve,
// verification, and an optional oracle spot check.
inline Verdict check(const pddl::DomainModel& d1_in, const pddl::DomainModel& d2_in, const CheckConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  using mapping::Direction;
  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  const pddl::DomainModel d1 = pddl::canonicalize(d1_in);
  const pddl::DomainModel d2 = pddl::canonicalize(d2_in);
  Verdict v;

  if (auto bad = mapping::arity_partition_check(d1, d2)) {
    v.status = Status::kNotEquivalent;
    v.reason = *bad;
    v.metrics.total_seconds = elapsed();
    return v;
  }

  struct Task {
    Direction dir;
    const pddl::Operator* op;
    const pddl::DomainModel* source;
  };
  std::vector<Task> tasks;
  for (const auto& op : d2.operators) tasks.push_back({Direction::kSecondByFirst, &op, &d1});
  for (const auto& op : d1.operators) tasks.push_back({Direction::kFirstBySecond, &op, &d2});
  v.searches.resize(tasks.size());

  // Runs (or reruns) the searches selected by `want` in the given mode. A
  // search that proves an operator has no candidates stops later tasks.
  auto run = [&](search::SearchMode mode, auto want) {
    const auto t0 = Clock::now();
    std::atomic<std::size_t> first_dead{tasks.size()};
    std::vector<char> ran_now(tasks.size(), 0);
    detail::parallel_for(tasks.size(), cfg.jobs, [&](std::size_t i) {
      if (!want(i) || i > first_dead.load()) return;
      const Task& t = tasks[i];
      OperatorSearch& s = v.searches[i];
      s = OperatorSearch{t.dir, t.op->name, {}, false, true, 0.0};
      ran_now[i] = 1;
      search::SearchBudget budget;
      budget.mode = mode;
      budget.agile_slot = search::Seconds(cfg.agile_slot_seconds);
      budget.state_cap = cfg.state_cap;
      budget.deadline = search::Seconds(std::max(0.0, cfg.time_limit_seconds - elapsed()));
      const auto ts = Clock::now();
      const ground::ObjectSet objs =
          ground::meta_objects_for(*t.op, *t.source, ground::TypeClosure(*t.source));
      try {
        s.result = search::find_candidates(*t.op, *t.source, objs, budget);
      } catch (const search::BudgetExceeded& e) {
        s.result.target = t.op->name;
        s.result.mode = mode;
        s.result.exhausted = false;
        s.result.states_explored = e.states_explored();
        s.budget_hit = true;
      }
      s.seconds = std::chrono::duration<double>(Clock::now() - ts).count();
      if (s.result.candidates.empty() && s.result.exhausted) {
        std::size_t cur = first_dead.load();
        while (i < cur && !first_dead.compare_exchange_weak(cur, i)) {
        }
      }
    });
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (!ran_now[i]) continue;
      v.metrics.states_explored += v.searches[i].result.states_explored;
      v.metrics.gmo += v.searches[i].result.gmo;
    }
    v.metrics.search_seconds += std::chrono::duration<double>(Clock::now() - t0).count();
  };

  auto solve = [&]() -> mapping::SolveResult {
    const auto t0 = Clock::now();
    std::map<std::string, search::CandidateSet> by1, by2;
    for (const auto& s : v.searches) {
      if (!s.ran) continue;
      (s.direction == Direction::kSecondByFirst ? by1 : by2)[s.op] = s.result;
    }
    // A skipped task only exists after a decisive failure; report that one.
    for (const auto& s : v.searches) {
      if (s.ran && s.result.candidates.empty() && s.result.exhausted) {
        v.metrics.solve_seconds += std::chrono::duration<double>(Clock::now() - t0).count();
        return mapping::UnsatReason{mapping::UnsatKind::kOperatorWithoutCandidates, s.op, s.direction,
                                    "no potentially equivalent macro for '" + s.op + "'"};
      }
    }
    auto r = mapping::solve({d1, d2, by1, by2});
    v.metrics.solve_seconds += std::chrono::duration<double>(Clock::now() - t0).count();
    return r;
  };

  const search::SearchMode first_mode =
      cfg.mode == CheckMode::kNormal ? search::SearchMode::normal : search::SearchMode::agile;
  run(first_mode, [](std::size_t) { return true; });
  mapping::SolveResult result = solve();

  auto is_unknown = [](const mapping::SolveResult& r) {
    const auto* u = std::get_if<mapping::UnsatReason>(&r);
    return u && u->kind == mapping::UnsatKind::kUnknown;
  };
  if (cfg.mode == CheckMode::kAgileThenNormal && is_unknown(result) && elapsed() < cfg.time_limit_seconds) {
    v.metrics.normal_restart = true;
    run(search::SearchMode::normal, [&](std::size_t i) { return !v.searches[i].ran || !v.searches[i].result.exhausted; });
    result = solve();
  }

  if (auto* m = std::get_if<mapping::PredicateMapping>(&result)) {
    const auto check = mapping::verify_mapping(d1, d2, *m);
    if (check.ok) {
      v.status = Status::kEquivalent;
      v.mapping = *m;
    } else {
      v.status = Status::kUnknown;
      v.reason = mapping::UnsatReason{mapping::UnsatKind::kUnknown, {}, std::nullopt,
                                      "solver mapping failed verification: " + check.evidence.front()};
    }
  } else {
    const auto& r = std::get<mapping::UnsatReason>(result);
    v.status = r.kind == mapping::UnsatKind::kUnknown ? Status::kUnknown : Status::kNotEquivalent;
    v.reason = r;
    const auto hits = std::count_if(v.searches.begin(), v.searches.end(), [](const auto& s) { return s.budget_hit; });
    if (v.status == Status::kUnknown && hits > 0) {
      v.reason->detail = "Budget: " + std::to_string(hits) + " search(es) stopped by the state cap or time limit; " +
                         v.reason->detail;
    }
  }

  if (cfg.oracle_objects && v.mapping) {
    const auto t0 = Clock::now();
    OracleCheck oc;
    oc.objects = cfg.oracle_objects->size();
    try {
      oc.agrees = oracle::equivalent_under(d1, d2, *v.mapping, *cfg.oracle_objects, cfg.oracle);
    } catch (const Error& e) {
      oc.error = e.what();
    }
    v.oracle = oc;
    v.metrics.oracle_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  }
  v.metrics.total_seconds = elapsed();
  return v;
}

}  // namespace dval
