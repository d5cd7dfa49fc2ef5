#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dval/harness.hpp"
#include "dval/pipeline.hpp"

namespace dval::report {

using nlohmann::json;

inline constexpr const char* kToolName = "dval";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

inline json to_json(const pddl::Atom& a) { return pddl::to_string(a); }

inline json to_json(const macro::LiftedMacro& m) {
  json j;
  json params = json::array();
  for (const auto& p : m.params) params.push_back(p.name + " - " + p.type);
  j["params"] = params;
  for (auto [key, set] : {std::pair{"pre", &m.pre}, std::pair{"add", &m.add}, std::pair{"del", &m.del}}) {
    json arr = json::array();
    for (const auto& a : *set) arr.push_back(pddl::to_string(a));
    j[key] = arr;
  }
  j["source_ops"] = m.source_ops;
  return j;
}

inline json to_json(const CheckConfig& c) {
  json j;
  j["mode"] = to_string(c.mode);
  j["agile_slot_seconds"] = c.agile_slot_seconds;
  j["state_cap"] = c.state_cap;
  j["time_limit_seconds"] = c.time_limit_seconds;
  j["oracle_objects"] = c.oracle_objects ? json(c.oracle_objects->size()) : json(nullptr);
  return j;
}

inline json fingerprint(const CheckConfig& c) {
  return {{"tool", kToolName}, {"version", kToolVersion}, {"schema", kSchemaVersion}, {"config", to_json(c)}};
}

// Single-document report of a check. All wall-clock values live under
// "timing" keys so they can be dropped before comparing reports.
inline json to_json(const Verdict& v, const CheckConfig& cfg) {
  json j;
  j["fingerprint"] = fingerprint(cfg);
  j["verdict"] = to_string(v.status);
  if (v.mapping) {
    json pairs = json::array();
    for (const auto& [a, b] : v.mapping->f) pairs.push_back({a, b});
    json types = json::array();
    for (const auto& [a, b] : v.mapping->type_corr) types.push_back({a, b});
    j["mapping"] = {{"predicates", pairs}, {"types", types}};
  } else {
    j["mapping"] = nullptr;
  }
  if (v.reason) {
    json r{{"kind", to_string(v.reason->kind)}, {"detail", v.reason->detail}};
    if (!v.reason->op.empty()) r["operator"] = v.reason->op;
    if (v.reason->direction) r["direction"] = mapping::to_string(*v.reason->direction);
    j["reason"] = r;
  } else {
    j["reason"] = nullptr;
  }

  json ops = json::array();
  for (const auto& s : v.searches) {
    json o;
    o["operator"] = s.op;
    o["direction"] = mapping::to_string(s.direction);
    o["ran"] = s.ran;
    o["mode"] = search::to_string(s.result.mode);
    o["exhausted"] = s.result.exhausted;
    o["budget_hit"] = s.budget_hit;
    o["states_explored"] = s.result.states_explored;
    o["gmo"] = s.result.gmo;
    json cands = json::array();
    for (const auto& c : s.result.candidates) {
      cands.push_back({{"source_ops", c.source_ops}, {"params", c.params.size()}});
    }
    o["candidates"] = cands;
    if (v.mapping) {
      for (const auto& c : v.mapping->chosen) {
        if (c.op == s.op && c.direction == s.direction) o["chosen"] = to_json(c.macro);
      }
    }
    o["timing"] = {{"seconds", s.seconds}};
    ops.push_back(o);
  }
  j["operators"] = ops;

  j["metrics"] = {{"states_explored", v.metrics.states_explored},
                  {"gmo", v.metrics.gmo},
                  {"normal_restart", v.metrics.normal_restart},
                  {"timing",
                   {{"search_seconds", v.metrics.search_seconds},
                    {"solve_seconds", v.metrics.solve_seconds},
                    {"oracle_seconds", v.metrics.oracle_seconds},
                    {"total_seconds", v.metrics.total_seconds}}}};
  if (v.oracle) {
    j["oracle"] = {{"agrees", v.oracle->agrees},
                   {"objects", v.oracle->objects},
                   {"error", v.oracle->error},
                   {"note", "evidence on one object set, not a proof"}};
  } else {
    j["oracle"] = nullptr;
  }
  return j;
}

inline json to_json(const harness::BenchRow& r) {
  return {{"domain", r.domain},
          {"version", r.version},
          {"mutation", r.mutation},
          {"verdict", to_string(r.verdict)},
          {"eq", harness::eq_label(r.verdict)},
          {"reason", r.reason},
          {"states", r.states},
          {"gmo", r.gmo},
          {"preds", r.preds},
          {"ops", r.ops},
          {"mapping_digest", r.mapping_digest},
          {"timing", {{"wall_seconds", r.wall_seconds}}}};
}

inline json bench_document(const std::vector<harness::BenchRow>& rows, const harness::BenchConfig& cfg) {
  json j;
  j["fingerprint"] = fingerprint(cfg.check);
  j["fingerprint"]["seed"] = cfg.seed;
  json arr = json::array();
  for (const auto& r : rows) arr.push_back(to_json(r));
  j["rows"] = arr;
  return j;
}

// One JSON record per line.
inline std::string bench_jsonl(const std::vector<harness::BenchRow>& rows) {
  std::string out;
  for (const auto& r : rows) out += to_json(r).dump() + "\n";
  return out;
}

inline std::string bench_csv(const std::vector<harness::BenchRow>& rows) {
  std::ostringstream os;
  os << "domain,version,eq,cpu_seconds,states,preds,ops,gmo\n";
  os.setf(std::ios::fixed);
  os.precision(2);
  for (const auto& r : rows) {
    os << r.domain << ',' << r.version << ',' << harness::eq_label(r.verdict) << ',' << r.wall_seconds << ','
       << r.states << ',' << r.preds << ',' << r.ops << ',' << r.gmo << '\n';
  }
  return os.str();
}

// Removes every "timing" member, recursively.
inline json strip_timing(json j) {
  if (j.is_object()) {
    j.erase("timing");
    for (auto& [_, v] : j.items()) v = strip_timing(v);
  } else if (j.is_array()) {
    for (auto& v : j) v = strip_timing(v);
  }
  return j;
}

}  // namespace dval::report
