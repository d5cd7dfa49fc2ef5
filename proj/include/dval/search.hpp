#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dval/error.hpp"
#include "dval/ground.hpp"
#include "dval/macro.hpp"

namespace dval::search {

using macro::LiftedMacro;
using macro::MacroSignature;
using macro::MacroState;
using Seconds = std::chrono::duration<double>;

enum class SearchMode { agile, normal };

inline const char* to_string(SearchMode m) { return m == SearchMode::agile ? "agile" : "normal"; }

struct SearchBudget {
  SearchMode mode = SearchMode::agile;
  Seconds agile_slot{180.0};
  std::size_t state_cap = 5'000'000;
  std::optional<Seconds> deadline;  // measured from the start of the search
};

struct CandidateSet {
  std::string target;
  std::vector<LiftedMacro> candidates;
  bool exhausted = false;
  std::size_t states_explored = 0;
  std::size_t gmo = 0;  // ground actions available to the search
  SearchMode mode = SearchMode::agile;
};

// Thrown when a budget runs out before any candidate was found and before
// the state space was closed: the answer is unknown, not "none".
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& target, std::size_t states)
      : Error("search budget exceeded for '" + target + "' after " + std::to_string(states) +
              " states"),
        states_(states) {}
  std::size_t states_explored() const { return states_; }

 private:
  std::size_t states_;
};

namespace detail {

struct KeyHash {
  std::size_t operator()(const std::vector<std::uint32_t>& v) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (auto x : v) {
      h ^= x;
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

inline std::vector<std::uint32_t> key_of(const MacroState& m) {
  std::vector<std::uint32_t> k;
  k.reserve(m.pre.size() + m.add.size() + m.del.size() + 2);
  constexpr std::uint32_t kSep = 0xffffffffu;
  k.insert(k.end(), m.pre.begin(), m.pre.end());
  k.push_back(kSep);
  k.insert(k.end(), m.add.begin(), m.add.end());
  k.push_back(kSep);
  k.insert(k.end(), m.del.begin(), m.del.end());
  return k;
}

}  // namespace detail

// Breadth-first search over macro states of `source` reachable from the empty
// macro. States are identified up to type-preserving object permutations.
// A state is pruned as soon as its precondition count, touched-atom count or
// number of used objects exceeds the target's: all three only grow.
inline CandidateSet find_candidates(const pddl::Operator& target, const pddl::DomainModel& source,
                                    const ground::ObjectSet& objs, const SearchBudget& budget) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();

  const ground::TypeClosure tc(source);
  const ground::Grounding g(source, objs, tc);
  const MacroSignature goal = macro::signature_of(target);
  const std::size_t goal_params = macro::effective_params(target).size();

  CandidateSet out;
  out.target = target.name;
  out.gmo = g.actions().size();
  out.mode = budget.mode;

  struct Node {
    std::int64_t parent;
    std::uint32_t op;
  };
  std::vector<Node> nodes{{-1, 0}};
  std::unordered_map<std::vector<std::uint32_t>, std::uint32_t, detail::KeyHash> visited;
  std::deque<std::pair<MacroState, std::uint32_t>> frontier;
  frontier.emplace_back(MacroState{}, 0);

  auto provenance = [&](std::uint32_t node) {
    std::vector<std::string> ops;
    for (std::int64_t n = node; n > 0; n = nodes[n].parent) {
      ops.push_back(source.operators[nodes[n].op].name);
    }
    return std::vector<std::string>(ops.rbegin(), ops.rend());
  };

  auto last_candidate = start;
  std::size_t ticks = 0;
  bool stopped = false;

  while (!frontier.empty() && !stopped) {
    auto [state, node] = std::move(frontier.front());
    frontier.pop_front();

    for (const auto& action : g.actions()) {
      if ((++ticks & 0xff) == 0) {
        const auto now = Clock::now();
        const bool over_deadline = budget.deadline && Seconds(now - start) > *budget.deadline;
        const bool agile_timeout = budget.mode == SearchMode::agile && !out.candidates.empty() &&
                                   Seconds(now - last_candidate) > budget.agile_slot;
        if (over_deadline || agile_timeout) {
          stopped = true;
          break;
        }
      }
      std::optional<MacroState> next = macro::detail::apply(state, action.pre, action.add, action.del);
      if (!next) continue;
      if (next->sig.prem > goal.prem || next->sig.touched() > goal.touched()) continue;
      if (macro::used_objects(*next, g).size() > goal_params) continue;

      MacroState canon = macro::canonical_relabel(*next, g);
      auto [it, inserted] = visited.try_emplace(detail::key_of(canon), 0u);
      if (!inserted) continue;
      it->second = static_cast<std::uint32_t>(nodes.size());
      nodes.push_back({static_cast<std::int64_t>(node), action.op});

      if (canon.sig == goal && macro::used_objects(canon, g).size() == goal_params) {
        LiftedMacro lifted = macro::lift(canon, g);
        lifted.source_ops = provenance(it->second);
        out.candidates.push_back(std::move(lifted));
        last_candidate = Clock::now();
      }
      if (visited.size() >= budget.state_cap) {
        stopped = true;
        break;
      }
      frontier.emplace_back(std::move(canon), it->second);
    }
  }

  out.states_explored = visited.size();
  // Only a normal-mode closure proves the candidate set complete.
  out.exhausted = !stopped && budget.mode == SearchMode::normal;
  if (stopped && out.candidates.empty()) throw BudgetExceeded(target.name, out.states_explored);
  return out;
}

}  // namespace dval::search
