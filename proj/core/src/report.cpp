#include "warpsim/report.hpp"

#include <sstream>

#include "json.hpp"
#include "warpsim/scop.hpp"

namespace warpsim {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& m) { throw ParseError(m); }

template <typename T>
T field(const json& j, const char* key, T fallback, bool required) {
  auto it = j.find(key);
  if (it == j.end()) {
    if (required) fail(std::string("cache level is missing '") + key + "'");
    return fallback;
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    fail(std::string("cache level field '") + key + "' has the wrong type");
  }
}

json vec_json(const IterVec& v) { return v.values(); }

}  // namespace

HierarchyConfig parse_cache_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) fail("cache config must be an object");
  for (const auto& [k, v] : j.items())
    if (k != "levels" && k != "inclusion") fail("unknown key '" + k + "' in cache config");
  auto levels = j.find("levels");
  if (levels == j.end() || !levels->is_array()) fail("cache config needs a 'levels' list");
  HierarchyConfig cfg;
  for (const auto& l : *levels) {
    if (!l.is_object()) fail("cache level must be an object");
    for (const auto& [k, v] : l.items())
      if (k != "sets" && k != "assoc" && k != "line" && k != "policy" && k != "write_allocate")
        fail("unknown key '" + k + "' in cache level");
    CacheConfig c;
    c.num_sets = field<std::int64_t>(l, "sets", 1, true);
    c.assoc = field<std::int64_t>(l, "assoc", 1, true);
    c.line_size = field<std::int64_t>(l, "line", 64, true);
    c.policy = parse_policy(field<std::string>(l, "policy", "LRU", false));
    c.write_allocate = field<bool>(l, "write_allocate", true, false);
    cfg.levels.push_back(c);
  }
  if (j.contains("inclusion") && j["inclusion"] != "NINE") fail("only the NINE inclusion policy is supported");
  cfg.validate();
  return cfg;
}

std::string print_cache_config(const HierarchyConfig& cfg) {
  json levels = json::array();
  for (const auto& c : cfg.levels)
    levels.push_back({{"sets", c.num_sets}, {"assoc", c.assoc}, {"line", c.line_size}, {"policy", to_string(c.policy)},
                      {"write_allocate", c.write_allocate}});
  return json{{"levels", levels}, {"inclusion", "NINE"}}.dump();
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "engine",           "level",           "accesses",          "hits",  "misses", "writebacks",
      "explicit_accesses", "warped_accesses", "explicit_iterations", "warps"};
  return cols;
}

std::string state_json(const HierarchyState& s) {
  json levels = json::array();
  for (const auto& c : s.levels) {
    json sets = json::array();
    for (const auto& set : c.sets) {
      json lines = json::array();
      for (BlockId b : set.lines) lines.push_back(b == kEmpty ? json(nullptr) : json(b));
      sets.push_back({{"lines", lines}, {"meta", set.meta}, {"dirty", set.dirty}});
    }
    levels.push_back(sets);
  }
  return levels.dump();
}

std::string report_json(const Report& r) {
  json results = json::object();
  for (const auto& e : r.engines) {
    json levels = json::array();
    for (const auto& l : e.stats.levels)
      levels.push_back({{"accesses", l.accesses}, {"hits", l.hits}, {"misses", l.misses}, {"writebacks", l.writebacks}});
    json o = {{"levels", levels},
              {"explicit_accesses", e.stats.explicit_accesses},
              {"warped_accesses", e.stats.warped_accesses},
              {"explicit_iterations", e.stats.explicit_iterations},
              {"warps", e.stats.warps},
              {"warps_declined", e.warps_declined},
              {"self_check", {{"checks", e.self_checks}, {"failures", e.self_check_failures}}}};
    if (!e.stats.node_misses.empty()) o["node_misses"] = e.stats.node_misses;
    results[e.engine] = o;
  }
  json j = {{"mode", r.mode}, {"program", r.program}, {"cache", json::parse(print_cache_config(r.cache))},
            {"results", results}};
  if (r.compared) j["compare"] = {{"counts_equal", r.counts_equal}, {"states_equal", r.states_equal}};
  if (r.final_state) j["final_state"] = json::parse(state_json(*r.final_state));
  json wall = json::object();
  for (const auto& e : r.engines) wall[e.engine] = e.wall_ms;
  j["metadata"] = {{"version", "0.1.0"}, {"wall_ms", wall}};
  return j.dump(2);
}

std::string report_csv(const Report& r) {
  std::ostringstream os;
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& e : r.engines) {
    for (std::size_t l = 0; l < e.stats.levels.size(); ++l) {
      const auto& s = e.stats.levels[l];
      os << e.engine << ',' << "L" << (l + 1) << ',' << s.accesses << ',' << s.hits << ',' << s.misses << ','
         << s.writebacks << ',' << e.stats.explicit_accesses << ',' << e.stats.warped_accesses << ','
         << e.stats.explicit_iterations << ',' << e.stats.warps << '\n';
    }
  }
  return os.str();
}

std::string warp_event_json(const WarpEvent& e) {
  json j = {{"loop", e.loop_id}, {"i0", vec_json(e.i0)}, {"i1", vec_json(e.i1)}, {"delta", e.delta},
            {"n", e.n},          {"rotation", e.rotation}};
  if (e.reason.empty()) {
    j["fired"] = true;
    j["misses"] = e.misses;
  } else {
    j["fired"] = false;
    j["reason"] = e.reason;
  }
  return j.dump();
}

}  // namespace warpsim
