#pragma once

// Warping simulation: symbolic simulation of the program tree that detects
// symbolically equivalent cache states within one loop invocation and skips
// whole periods of iterations at once.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "warpsim/cache.hpp"
#include "warpsim/scop.hpp"
#include "warpsim/simulate.hpp"
#include "warpsim/symcache.hpp"

namespace warpsim {

/// Position of a warp attempt: the loop, the values of its enclosing
/// iterators and the two matching values of its own iterator.
struct WarpSite {
  const LoopNode* loop = nullptr;
  IterVec prefix;
  Value v0 = 0;  // iterator value at the earlier state
  Value v1 = 0;  // iterator value at the current state
  Value last = 0;  // final iterator value of this loop invocation

  Value delta() const { return v1 - v0; }
  Value end() const { return last + loop->stride; }  // one stride past the final point
  IterVec point(Value v) const;
};

/// First iteration value in [v1, end) whose domain membership for some
/// descendant access differs from the corresponding iteration of the match
/// interval; end() if there is none.
Value furthest_by_domains(const Program& p, const WarpSite& site);

/// First iteration value by which two descendant accesses with different
/// coefficients on the warped iterator have touched a common block, both at
/// iterations in [v0, end); end() if there is none.
Value furthest_by_overlap(const Program& p, const WarpSite& site, Value line_size);

/// Block map relating each access in iterations [v0, v0 + span) to the
/// access one period later. Every piece is a translation by `shift` blocks
/// on the blocks the node touches.
struct AccessMapping {
  struct Piece {
    const AccessNode* node = nullptr;
    Value shift = 0;
    Value min_block = 0, max_block = -1;  // block range touched in the window
  };
  std::vector<Piece> pieces;
  Value span = 0;          // window length on the warped iterator
  bool uniform = true;     // every active node shifts by a whole number of blocks
  bool functional = true;
  bool injective = true;
  std::string problem;     // first reason the mapping is unusable

  bool usable() const { return uniform && functional && injective; }
};

struct MappingOptions {
  /// Skip the pairwise functional/injective queries between pieces with
  /// different shifts; valid when the window lies below furthest_by_overlap.
  bool trust_overlap = false;
};

AccessMapping construct_access_mapping(const Program& p, const WarpSite& site, Value span, Value line_size,
                                       const MappingOptions& opts = {});

/// Whether some iteration of `node` in the window [v0, v0 + span) touches
/// block `b`.
bool touches_block(const WarpSite& site, const AccessNode& node, Value span, Value line_size, BlockId b);

/// Checks the matched states against the mapping: every line holding b0 at
/// v0 and b1 at v1 must agree with the mapping where it is defined, and each
/// piece must move sets by the level's rotation.
bool cache_agrees(const SymHierarchy& sym, const std::vector<std::int64_t>& rotation, const WarpSite& site,
                  const AccessMapping& mapping, Value line_size, std::string* why = nullptr);

struct WarpDecision {
  Counter n = 0;
  Value bound = 0;  // min of the two furthest bounds
  std::string reason;  // empty when n > 0
};

WarpDecision iterations_to_warp(const Program& p, const SymHierarchy& sym,
                                const std::vector<std::int64_t>& rotation, const WarpSite& site,
                                Value line_size);

struct WarpEvent {
  std::size_t loop_id = 0;
  IterVec i0, i1;
  Value delta = 0;
  Counter n = 0;
  std::vector<std::int64_t> rotation;  // per level
  std::string reason;  // empty if the warp fired
  std::vector<Counter> misses;  // per level, added by the warp
};

struct WarpOptions {
  bool enable = true;           // false gives a symbolic simulation without warping
  bool self_check = false;      // replay every warp concretely
  bool per_node = false;
  std::size_t history = 1024;   // states remembered per loop invocation
  std::size_t history_bytes = std::size_t{32} << 20;  // cap on stored state keys per loop invocation
  std::size_t max_attempts = 16;  // verified matches tried per iteration boundary
  std::function<void(const WarpEvent&)> on_event;
  /// Called after each fired warp with the symbolic state before and after.
  std::function<void(const WarpEvent&, const SymHierarchy&, const SymHierarchy&)> on_warp;
};

struct WarpResult {
  HierarchyState state;
  SimStats stats;
  Counter self_checks = 0;
  Counter self_check_failures = 0;
  std::vector<std::string> self_check_messages;
};

WarpResult simulate_warping(const Program& p, const HierarchyConfig& cfg, const HierarchyState* init = nullptr,
                            const WarpOptions& opts = {});

}  // namespace warpsim
