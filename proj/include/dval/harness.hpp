#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "dval/error.hpp"
#include "dval/macro.hpp"
#include "dval/pddl/canonical.hpp"
#include "dval/pddl/parser.hpp"
#include "dval/pipeline.hpp"

namespace dval::harness {

using pddl::Atom;
using pddl::DomainModel;
using pddl::Operator;

struct AddMacro {
  std::vector<std::string> ops;
  std::string name;               // empty: operator names joined by '-'
  bool randomize_binding = false;  // draw parameter identifications from the seed
};
struct DeletePredicate {
  std::string name;
};
struct DeleteOperator {
  std::string name;
};
struct RenameAll {
  std::optional<std::string> suffix;  // empty: seed-derived fresh names
};

using MutationKind = std::variant<AddMacro, DeletePredicate, DeleteOperator, RenameAll>;

class InvalidMutation : public Error {
 public:
  explicit InvalidMutation(const std::string& what) : Error("invalid mutation: " + what) {}
};

inline std::string version_label(const MutationKind& k) {
  struct {
    std::string operator()(const AddMacro&) const { return "Add macro"; }
    std::string operator()(const DeletePredicate&) const { return "Del Pred."; }
    std::string operator()(const DeleteOperator&) const { return "Del Op"; }
    std::string operator()(const RenameAll&) const { return "rename"; }
  } v;
  return std::visit(v, k);
}

inline std::string describe(const MutationKind& k) {
  struct {
    std::string operator()(const AddMacro& m) const {
      std::string s = "add-macro(";
      for (std::size_t i = 0; i < m.ops.size(); ++i) s += (i ? "," : "") + m.ops[i];
      return s + ")";
    }
    std::string operator()(const DeletePredicate& m) const { return "del-pred(" + m.name + ")"; }
    std::string operator()(const DeleteOperator& m) const { return "del-op(" + m.name + ")"; }
    std::string operator()(const RenameAll& m) const {
      return m.suffix ? "rename(suffix " + *m.suffix + ")" : "rename";
    }
  } v;
  return std::visit(v, k);
}

namespace detail {

// Portable Fisher-Yates: the standard shuffle is not specified bit-for-bit.
template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
}

inline Atom bind_atom(const Atom& a, const std::map<std::string, std::string>& sub) {
  Atom out = a;
  for (auto& t : out.args) {
    auto it = sub.find(t);
    if (it != sub.end()) t = it->second;
  }
  return out;
}

// Composes operators at the lifted level. Each operator's parameters are
// identified with earlier macro parameters of the same type, first unused
// one first (or in seeded order); leftovers become new parameters.
inline Operator fuse(const DomainModel& d, const AddMacro& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Operator out;
  out.name = spec.name;
  if (out.name.empty()) {
    for (std::size_t i = 0; i < spec.ops.size(); ++i) out.name += (i ? "-" : "") + spec.ops[i];
  }
  out.name = pddl::fold_case(out.name);

  std::vector<Atom> table;
  auto id_of = [&](const Atom& a) {
    auto it = std::find(table.begin(), table.end(), a);
    if (it != table.end()) return static_cast<macro::AtomId>(it - table.begin());
    table.push_back(a);
    return static_cast<macro::AtomId>(table.size() - 1);
  };
  auto ids = [&](const std::vector<Atom>& atoms, const std::map<std::string, std::string>& sub) {
    std::vector<macro::AtomId> v;
    for (const auto& a : atoms) v.push_back(id_of(bind_atom(a, sub)));
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };

  macro::MacroState m;
  for (const auto& name : spec.ops) {
    const Operator* op = d.find_operator(pddl::fold_case(name));
    if (!op) throw InvalidMutation("unknown operator '" + name + "'");
    const Operator o = pddl::canonicalize(*op);

    std::map<std::string, std::string> sub;
    std::set<std::string> taken;
    for (const auto& p : o.params) {
      std::vector<std::string> options;
      for (const auto& q : out.params) {
        if (q.type == p.type && !taken.count(q.name)) options.push_back(q.name);
      }
      if (spec.randomize_binding && !options.empty()) {
        // Keeping a fresh parameter is one more option.
        options.push_back({});
        shuffle(options, rng);
      }
      std::string target = options.empty() ? std::string() : options.front();
      if (target.empty()) {
        target = p.name;
        for (int k = 2; out.find_param(target); ++k) target = p.name + std::to_string(k);
        out.params.push_back({target, p.type});
      }
      taken.insert(target);
      sub[p.name] = target;
    }
    auto next = macro::detail::apply(m, ids(o.pre, sub), ids(o.add, sub), ids(o.del, sub));
    if (!next) throw InvalidMutation("'" + o.name + "' needs an atom deleted earlier in the macro");
    m = std::move(*next);
  }
  if (spec.ops.empty()) throw InvalidMutation("add-macro needs at least one operator");

  for (auto id : m.pre) out.pre.push_back(table[id]);
  for (auto id : m.add) out.add.push_back(table[id]);
  for (auto id : m.del) out.del.push_back(table[id]);
  return pddl::canonicalize(out);
}

}  // namespace detail

struct RenameMap {
  std::map<std::string, std::string> predicates;
  std::map<std::string, std::string> operators;
  std::map<std::string, std::string> types;  // never contains the root
  std::string domain_from;
  std::string domain_to;
};

// Seed-derived bijective renaming to fresh names, or a uniform suffix.
inline RenameMap rename_map(const DomainModel& d, std::uint64_t seed,
                            const std::optional<std::string>& suffix = std::nullopt) {
  std::mt19937_64 rng(seed);
  RenameMap r;
  r.domain_from = d.name;
  r.domain_to = d.name + (suffix ? *suffix : "-renamed");
  auto assign = [&](const std::vector<std::string>& names, const std::string& prefix,
                    std::map<std::string, std::string>& out) {
    std::vector<std::size_t> perm(names.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    detail::shuffle(perm, rng);
    for (std::size_t i = 0; i < names.size(); ++i) {
      out[names[i]] = suffix ? names[i] + *suffix : prefix + std::to_string(perm[i]);
    }
  };
  std::vector<std::string> preds, ops, types;
  for (const auto& p : d.predicates) preds.push_back(p.name);
  for (const auto& o : d.operators) ops.push_back(o.name);
  for (const auto& t : d.types) types.push_back(t.name);
  assign(preds, "pred", r.predicates);
  assign(ops, "op", r.operators);
  assign(types, "type", r.types);
  return r;
}

inline RenameMap invert(const RenameMap& m) {
  RenameMap r;
  for (const auto& [a, b] : m.predicates) r.predicates[b] = a;
  for (const auto& [a, b] : m.operators) r.operators[b] = a;
  for (const auto& [a, b] : m.types) r.types[b] = a;
  r.domain_from = m.domain_to;
  r.domain_to = m.domain_from;
  return r;
}

inline DomainModel apply_rename(DomainModel d, const RenameMap& m) {
  auto ren = [](const std::map<std::string, std::string>& table, std::string& s) {
    auto it = table.find(s);
    if (it != table.end()) s = it->second;
  };
  if (d.name == m.domain_from) d.name = m.domain_to;
  for (auto& t : d.types) {
    ren(m.types, t.name);
    ren(m.types, t.parent);
  }
  for (auto& p : d.predicates) {
    ren(m.predicates, p.name);
    for (auto& q : p.params) ren(m.types, q.type);
  }
  for (auto& o : d.operators) {
    ren(m.operators, o.name);
    for (auto& q : o.params) ren(m.types, q.type);
    for (auto* set : {&o.pre, &o.add, &o.del}) {
      for (auto& a : *set) ren(m.predicates, a.pred);
    }
  }
  return pddl::canonicalize(std::move(d));
}

// Applies a mutation; the result is in canonical form.
inline DomainModel mutate(const DomainModel& d_in, const MutationKind& kind, std::uint64_t seed) {
  DomainModel d = pddl::canonicalize(d_in);
  if (const auto* k = std::get_if<AddMacro>(&kind)) {
    Operator fused = detail::fuse(d, *k, seed);
    if (d.find_operator(fused.name)) throw InvalidMutation("operator '" + fused.name + "' already exists");
    d.operators.push_back(std::move(fused));
  } else if (const auto* k = std::get_if<DeletePredicate>(&kind)) {
    const std::string name = pddl::fold_case(k->name);
    if (!d.find_predicate(name)) throw InvalidMutation("unknown predicate '" + k->name + "'");
    std::erase_if(d.predicates, [&](const pddl::PredicateSchema& p) { return p.name == name; });
    for (auto& o : d.operators) {
      for (auto* set : {&o.pre, &o.add, &o.del}) {
        std::erase_if(*set, [&](const Atom& a) { return a.pred == name; });
      }
    }
  } else if (const auto* k = std::get_if<DeleteOperator>(&kind)) {
    const std::string name = pddl::fold_case(k->name);
    if (!d.find_operator(name)) throw InvalidMutation("unknown operator '" + k->name + "'");
    std::erase_if(d.operators, [&](const Operator& o) { return o.name == name; });
  } else {
    const auto& k2 = std::get<RenameAll>(kind);
    return apply_rename(d, rename_map(d, seed, k2.suffix));
  }
  return pddl::canonicalize(std::move(d));
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline DomainModel load_domain(const std::filesystem::path& p) {
  return pddl::parse_domain(read_file(p));
}

// FNV-1a over a textual rendering of the mapping; empty when absent.
inline std::string mapping_digest(const std::optional<mapping::PredicateMapping>& m) {
  if (!m) return {};
  std::string text;
  for (const auto& [a, b] : m->f) text += a + "=" + b + ";";
  text += "|";
  for (const auto& [a, b] : m->type_corr) text += a + "=" + b + ";";
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

struct BenchCase {
  std::string domain;
  DomainModel model;
  MutationKind mutation;
};

struct BenchConfig {
  std::uint64_t seed = 1;
  CheckConfig check;  // time_limit_seconds is the per-row budget
  unsigned jobs = 1;  // rows in flight
};

struct BenchRow {
  std::string domain;
  std::string version;
  std::string mutation;
  Status verdict = Status::kUnknown;
  std::string reason;
  double wall_seconds = 0.0;
  std::size_t states = 0;
  std::size_t gmo = 0;
  std::size_t preds = 0;  // of the mutated domain
  std::size_t ops = 0;
  std::string mapping_digest;
};

// "Yes"/"No" for decided rows, "-" for unknown.
inline const char* eq_label(Status s) {
  return s == Status::kEquivalent ? "Yes" : s == Status::kNotEquivalent ? "No" : "-";
}

inline BenchRow run_case(const BenchCase& c, const BenchConfig& cfg) {
  BenchRow row;
  row.domain = c.domain;
  row.version = version_label(c.mutation);
  row.mutation = describe(c.mutation);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const DomainModel d2 = mutate(c.model, c.mutation, cfg.seed);
    row.preds = d2.predicates.size();
    row.ops = d2.operators.size();
    CheckConfig cc = cfg.check;
    cc.jobs = 1;
    const Verdict v = check(c.model, d2, cc);
    row.verdict = v.status;
    if (v.reason) row.reason = std::string(to_string(v.reason->kind)) + ": " + v.reason->detail;
    row.states = v.metrics.states_explored;
    row.gmo = v.metrics.gmo;
    row.mapping_digest = mapping_digest(v.mapping);
  } catch (const std::exception& e) {
    row.verdict = Status::kUnknown;
    row.reason = e.what();
  }
  row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

inline std::vector<BenchRow> run_benchmark(const std::vector<BenchCase>& cases, const BenchConfig& cfg) {
  std::vector<BenchRow> rows(cases.size());
  dval::detail::parallel_for(cases.size(), cfg.jobs, [&](std::size_t i) { rows[i] = run_case(cases[i], cfg); });
  return rows;
}

// The four-domain matrix; `extended` adds the Rover macro row.
inline std::vector<BenchCase> bundled_matrix(const std::filesystem::path& fixtures, bool extended = false) {
  std::vector<BenchCase> out;
  auto add = [&](const std::string& label, const std::string& file, std::vector<MutationKind> muts) {
    const DomainModel d = load_domain(fixtures / file);
    for (auto& m : muts) out.push_back({label, d, std::move(m)});
  };
  add("Gripper", "gripper.pddl", {AddMacro{{"pick", "drop"}, {}}, DeletePredicate{"free"}, RenameAll{}});
  add("Blocksworld", "blocksworld.pddl",
      {AddMacro{{"unstack", "put-down"}, {}}, DeletePredicate{"handempty"}, RenameAll{}});
  add("Elevator", "elevator.pddl", {AddMacro{{"board", "up"}, {}}, DeleteOperator{"down"}, RenameAll{}});
  add("ChildSnack", "childsnack.pddl",
      {AddMacro{{"make-sandwich", "put-on-tray"}, {}}, DeleteOperator{"move-tray"}, RenameAll{}});
  if (extended) {
    add("Rover", "rover.pddl", {AddMacro{{"calibrate", "take-image"}, "calibrate-take-image-m"}});
  }
  return out;
}

}  // namespace dval::harness
