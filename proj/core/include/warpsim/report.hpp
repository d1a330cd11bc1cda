#pragma once

// Cache configuration input and report output formats.

#include <string>
#include <string_view>
#include <vector>

#include "warpsim/cache.hpp"
#include "warpsim/simulate.hpp"
#include "warpsim/warp.hpp"

namespace warpsim {

/// {"levels":[{"sets","assoc","line","policy","write_allocate"}...],
///  "inclusion":"NINE"}. Throws ParseError on malformed input and ConfigError
/// on an invalid geometry.
HierarchyConfig parse_cache_config(std::string_view text);
std::string print_cache_config(const HierarchyConfig& cfg);

/// Fixed CSV column order.
const std::vector<std::string>& csv_columns();

/// One engine's results, as they appear in reports.
struct EngineReport {
  std::string engine;  // "warp" or "nowarp"
  SimStats stats;
  double wall_ms = 0;
  Counter warps_declined = 0;
  Counter self_checks = 0;
  Counter self_check_failures = 0;
};

struct Report {
  std::string mode;
  std::string program;
  HierarchyConfig cache;
  std::vector<EngineReport> engines;
  bool compared = false;
  bool counts_equal = true;
  bool states_equal = true;
  const HierarchyState* final_state = nullptr;  // dumped when set
};

std::string report_json(const Report& r);
std::string report_csv(const Report& r);
std::string warp_event_json(const WarpEvent& e);
std::string state_json(const HierarchyState& s);

}  // namespace warpsim
