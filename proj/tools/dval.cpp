#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "dval/dval.hpp"

namespace fs = std::filesystem;
using namespace dval;

namespace {

// sysexits(3)
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitNoInput = 66;
constexpr int kExitCantCreate = 73;
constexpr int kExitOracleTooLarge = 3;

struct CliError {
  int code;
  std::string message;
};

std::string read_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError{kExitNoInput, path + ": cannot open file"};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError{kExitCantCreate, path + ": cannot write file"};
  out << text;
}

pddl::DomainModel load(const std::string& path) {
  const std::string text = read_input(path);
  try {
    return pddl::parse_domain(text);
  } catch (const Error& e) {
    throw CliError{kExitData, path + ": " + e.what()};
  }
}

ground::ObjectSet load_objects(const std::string& path) {
  const std::string text = read_input(path);
  try {
    return ground::parse_objects(text);
  } catch (const Error& e) {
    throw CliError{kExitData, path + ": " + e.what()};
  }
}

// Lines "p1 p2" pair predicates, lines "type t1 t2" pair types; '#' starts
// a comment. Types not listed are induced from the predicate schemas.
mapping::PredicateMapping load_mapping(const std::string& path, const pddl::DomainModel& d1,
                                       const pddl::DomainModel& d2) {
  mapping::PredicateMapping m;
  std::istringstream in(read_input(path));
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    if (auto c = line.find('#'); c != std::string::npos) line.resize(c);
    std::istringstream ls(line);
    std::vector<std::string> w;
    for (std::string t; ls >> t;) w.push_back(pddl::fold_case(t));
    if (w.empty()) continue;
    if (w.size() == 3 && w[0] == "type") {
      m.type_corr[w[1]] = w[2];
    } else if (w.size() == 2) {
      m.f[w[0]] = w[1];
    } else {
      throw CliError{kExitData, path + ":" + std::to_string(n) + ": expected 'p1 p2' or 'type t1 t2'"};
    }
  }
  m.type_corr[std::string(pddl::kRootType)] = std::string(pddl::kRootType);
  for (const auto& [a, b] : m.f) {
    const auto* p1 = d1.find_predicate(a);
    const auto* p2 = d2.find_predicate(b);
    if (!p1 || !p2 || p1->arity() != p2->arity()) continue;
    for (std::size_t i = 0; i < p1->arity(); ++i) m.type_corr.emplace(p1->params[i].type, p2->params[i].type);
  }
  for (const auto& t : d1.types) m.type_corr.emplace(t.name, t.name);
  return m;
}

void print_mapping(std::ostream& os, const mapping::PredicateMapping& m) {
  os << "mapping:\n";
  for (const auto& [a, b] : m.f) os << "  " << a << " -> " << b << "\n";
  os << "types:\n";
  for (const auto& [a, b] : m.type_corr) os << "  " << a << " -> " << b << "\n";
}

void print_verdict(std::ostream& os, const Verdict& v) {
  os << "verdict: " << to_string(v.status) << "\n";
  if (v.mapping) {
    print_mapping(os, *v.mapping);
    os << "covering macros:\n";
    for (const auto& c : v.mapping->chosen) {
      os << "  " << c.op << " (" << mapping::to_string(c.direction) << "): <";
      for (std::size_t i = 0; i < c.macro.source_ops.size(); ++i) os << (i ? ", " : "") << c.macro.source_ops[i];
      os << ">\n";
    }
  }
  if (v.reason) {
    os << "reason: " << mapping::to_string(v.reason->kind);
    if (!v.reason->op.empty()) os << " [" << v.reason->op << "]";
    os << ": " << v.reason->detail << "\n";
  }
  if (v.oracle) {
    os << "oracle (" << v.oracle->objects << " objects): ";
    if (!v.oracle->error.empty()) {
      os << "not run, " << v.oracle->error << "\n";
    } else {
      os << (v.oracle->agrees ? "agrees" : "DISAGREES") << "\n";
    }
  }
  os << "states explored: " << v.metrics.states_explored << ", gmo: " << v.metrics.gmo
     << ", seconds: " << v.metrics.total_seconds << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Functional equivalence checker for typed STRIPS planning domains"};
  app.require_subcommand(1);

  CheckConfig cfg;
  std::string mode = "agile-then-normal";
  std::string d1_path, d2_path, report_path, oracle_objects;
  auto add_budget_flags = [&](CLI::App* sub) {
    sub->add_option("--agile-slot", cfg.agile_slot_seconds, "Seconds without a new candidate before agile search stops")
        ->capture_default_str();
    sub->add_option("--state-cap", cfg.state_cap, "Macro states per search")->capture_default_str();
    sub->add_option("--time-limit", cfg.time_limit_seconds, "Overall seconds per check")->capture_default_str();
    sub->add_option("--jobs", cfg.jobs, "Concurrent searches")->capture_default_str();
  };

  auto* check_cmd = app.add_subcommand("check", "Decide whether two domains are functionally equivalent");
  check_cmd->add_option("domain1", d1_path)->required();
  check_cmd->add_option("domain2", d2_path)->required();
  check_cmd->add_option("--mode", mode)
      ->check(CLI::IsMember({"agile", "normal", "agile-then-normal"}))
      ->capture_default_str();
  add_budget_flags(check_cmd);
  check_cmd->add_option("--oracle-objects", oracle_objects, "Object file for an oracle spot check");
  check_cmd->add_option("--report", report_path, "Write a JSON report here");

  std::string mapping_path, objects_path;
  bool search_all = false;
  auto* oracle_cmd = app.add_subcommand("oracle", "Compare reach sets on one small object set");
  oracle_cmd->add_option("domain1", d1_path)->required();
  oracle_cmd->add_option("domain2", d2_path)->required();
  oracle_cmd->add_option("--objects", objects_path)->required();
  auto* mopt = oracle_cmd->add_option("--mapping", mapping_path, "Lines 'p1 p2' and 'type t1 t2'");
  auto* sopt = oracle_cmd->add_flag("--search-mappings", search_all, "Try every arity-respecting bijection");
  mopt->excludes(sopt);
  oracle_cmd->add_option("--atom-cap", cfg.oracle.atom_cap)->capture_default_str();

  std::string add_macro, macro_name, del_pred, del_op, suffix, out_path;
  bool rename = false;
  std::uint64_t seed = 1;
  auto* mutate_cmd = app.add_subcommand("mutate", "Write a mutated copy of a domain");
  mutate_cmd->add_option("domain", d1_path)->required();
  auto* o_add = mutate_cmd->add_option("--add-macro", add_macro, "Comma-separated operators to fuse");
  mutate_cmd->add_option("--name", macro_name, "Name of the fused operator")->needs(o_add);
  auto* o_dp = mutate_cmd->add_option("--del-pred", del_pred);
  auto* o_do = mutate_cmd->add_option("--del-op", del_op);
  auto* o_rn = mutate_cmd->add_flag("--rename", rename);
  mutate_cmd->add_option("--suffix", suffix, "Rename by suffixing instead of fresh names")->needs(o_rn);
  mutate_cmd->add_option("--seed", seed)->capture_default_str();
  mutate_cmd->add_option("-o,--output", out_path);
  for (auto* a : {o_add, o_dp, o_do, o_rn}) {
    for (auto* b : {o_add, o_dp, o_do, o_rn}) {
      if (a != b) a->excludes(b);
    }
  }

  std::string fixtures_dir = DVAL_DEFAULT_FIXTURES, csv_path, jsonl_path;
  bool extended = false;
  unsigned bench_jobs = 1;
  auto* bench_cmd = app.add_subcommand("bench", "Run the mutation benchmark matrix");
  bench_cmd->add_option("--fixtures", fixtures_dir)->capture_default_str();
  bench_cmd->add_option("--seed", seed)->capture_default_str();
  bench_cmd->add_option("--report", report_path, "Write a JSON report here");
  bench_cmd->add_option("--csv", csv_path, "Write the summary table here");
  bench_cmd->add_option("--jsonl", jsonl_path, "Write one JSON record per row here");
  bench_cmd->add_option("--agile-slot", cfg.agile_slot_seconds)->capture_default_str();
  bench_cmd->add_option("--state-cap", cfg.state_cap)->capture_default_str();
  bench_cmd->add_option("--time-limit", cfg.time_limit_seconds, "Seconds per row")->capture_default_str();
  bench_cmd->add_option("--jobs", bench_jobs, "Rows in flight")->capture_default_str();
  bench_cmd->add_flag("--extended", extended, "Include the Rover row");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*check_cmd) {
      cfg.mode = mode == "agile" ? CheckMode::kAgile : mode == "normal" ? CheckMode::kNormal : CheckMode::kAgileThenNormal;
      const auto d1 = load(d1_path);
      const auto d2 = load(d2_path);
      if (!oracle_objects.empty()) cfg.oracle_objects = load_objects(oracle_objects);
      const Verdict v = check(d1, d2, cfg);
      print_verdict(std::cout, v);
      if (!report_path.empty()) write_output(report_path, report::to_json(v, cfg).dump(2) + "\n");
      return exit_code(v.status);
    }

    if (*oracle_cmd) {
      const auto d1 = pddl::canonicalize(load(d1_path));
      const auto d2 = pddl::canonicalize(load(d2_path));
      const auto objs = load_objects(objects_path);
      try {
        if (search_all) {
          const auto found = oracle::search_mappings(d1, d2, objs, cfg.oracle);
          std::cout << "bijections with equal reach sets: " << found.size() << "\n";
          for (const auto& m : found) print_mapping(std::cout, m);
          return found.empty() ? 1 : 0;
        }
        if (mapping_path.empty()) throw CliError{kExitUsage, "oracle needs --mapping or --search-mappings"};
        const auto m = load_mapping(mapping_path, d1, d2);
        const bool ok = oracle::equivalent_under(d1, d2, m, objs, cfg.oracle);
        std::cout << "equivalent under mapping: " << (ok ? "true" : "false") << "\n";
        return ok ? 0 : 1;
      } catch (const oracle::OracleTooLarge& e) {
        std::cerr << "dval: " << e.what() << "\n";
        return kExitOracleTooLarge;
      }
    }

    if (*mutate_cmd) {
      const auto d = load(d1_path);
      harness::MutationKind kind;
      if (!add_macro.empty()) {
        harness::AddMacro m;
        std::stringstream ss(add_macro);
        for (std::string op; std::getline(ss, op, ',');) m.ops.push_back(op);
        m.name = macro_name;
        kind = m;
      } else if (!del_pred.empty()) {
        kind = harness::DeletePredicate{del_pred};
      } else if (!del_op.empty()) {
        kind = harness::DeleteOperator{del_op};
      } else if (rename) {
        kind = harness::RenameAll{suffix.empty() ? std::nullopt : std::optional<std::string>(suffix)};
      } else {
        throw CliError{kExitUsage, "mutate needs one of --add-macro, --del-pred, --del-op, --rename"};
      }
      const std::string text = pddl::serialize(harness::mutate(d, kind, seed));
      if (out_path.empty()) {
        std::cout << text;
      } else {
        write_output(out_path, text);
      }
      return 0;
    }

    if (*bench_cmd) {
      if (!fs::is_directory(fixtures_dir)) throw CliError{kExitNoInput, fixtures_dir + ": not a directory"};
      harness::BenchConfig bc;
      bc.seed = seed;
      bc.check = cfg;
      bc.jobs = bench_jobs;
      std::vector<harness::BenchCase> cases;
      try {
        cases = harness::bundled_matrix(fixtures_dir, extended);
      } catch (const Error& e) {
        throw CliError{kExitData, e.what()};
      }
      const auto rows = harness::run_benchmark(cases, bc);
      const std::string csv = report::bench_csv(rows);
      std::cout << csv;
      if (!csv_path.empty()) write_output(csv_path, csv);
      if (!jsonl_path.empty()) write_output(jsonl_path, report::bench_jsonl(rows));
      if (!report_path.empty()) write_output(report_path, report::bench_document(rows, bc).dump(2) + "\n");
      return 0;
    }
  } catch (const CliError& e) {
    std::cerr << "dval: " << e.message << "\n";
    return e.code;
  } catch (const harness::InvalidMutation& e) {
    std::cerr << "dval: " << e.what() << "\n";
    return kExitData;
  } catch (const Error& e) {
    std::cerr << "dval: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
