#pragma once

// Concrete set-associative caches: per-set replacement policies, the
// set-indexed composition and a non-inclusive non-exclusive two-level
// hierarchy.

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "warpsim/intset.hpp"

namespace warpsim {

using BlockId = std::int64_t;
inline constexpr BlockId kEmpty = -1;

enum class Policy { LRU, FIFO, PLRU, QLRU };
enum class AccessKind { Read, Write };

std::string to_string(Policy p);
Policy parse_policy(const std::string& s);

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct CacheConfig {
  std::int64_t num_sets = 1;
  std::int64_t assoc = 1;
  std::int64_t line_size = 64;
  Policy policy = Policy::LRU;
  bool write_allocate = true;

  /// Throws ConfigError on non-power-of-two sizes or PLRU with a
  /// non-power-of-two associativity.
  void validate() const;
  std::int64_t index(BlockId b) const { return floor_mod(b, num_sets); }
  friend bool operator==(const CacheConfig&, const CacheConfig&) = default;
};

/// One cache set. For LRU the lines are ordered MRU first, for FIFO last-in
/// first. `meta` holds the PLRU tree bits (assoc-1 entries, heap order) or the
/// QLRU ages (one per line); it is empty for LRU and FIFO. `dirty` is one flag
/// per line.
struct SetState {
  std::vector<BlockId> lines;
  std::vector<std::uint8_t> meta;
  std::vector<std::uint8_t> dirty;

  friend bool operator==(const SetState&, const SetState&) = default;
};

SetState empty_set(const CacheConfig& cfg);

/// Line holding `b`, if any.
std::optional<std::size_t> find_line(const SetState& s, BlockId b);
bool cl_set(const SetState& s, BlockId b);

/// Result of one set update. `evicted` is kEmpty when nothing left the set.
struct SetAccess {
  bool hit = false;
  bool bypassed = false;
  BlockId evicted = kEmpty;
  bool evicted_dirty = false;
  std::size_t line = 0;  // line now holding the block (when not bypassed)
};

/// Updates `s` in place.
SetAccess up_set(const CacheConfig& cfg, SetState& s, BlockId b, AccessKind kind = AccessKind::Read);

struct CacheState {
  std::vector<SetState> sets;
  friend bool operator==(const CacheState&, const CacheState&) = default;
};

CacheState empty_cache(const CacheConfig& cfg);
bool cl_cache(const CacheConfig& cfg, const CacheState& c, BlockId b);
SetAccess up_cache(const CacheConfig& cfg, CacheState& c, BlockId b, AccessKind kind = AccessKind::Read);

/// Throws Error if a block occupies two lines or sits in the wrong set.
void check_invariants(const CacheConfig& cfg, const CacheState& c);

enum class Inclusion { NINE };

struct HierarchyConfig {
  std::vector<CacheConfig> levels;  // one or two
  Inclusion inclusion = Inclusion::NINE;

  void validate() const;
  friend bool operator==(const HierarchyConfig&, const HierarchyConfig&) = default;
};

struct HierarchyState {
  std::vector<CacheState> levels;
  friend bool operator==(const HierarchyState&, const HierarchyState&) = default;
};

HierarchyState empty_hierarchy(const HierarchyConfig& cfg);

struct HierarchyAccess {
  // hit[l] is meaningful only for levels that were consulted.
  std::vector<bool> consulted;
  std::vector<bool> hit;
  std::vector<bool> writeback;
};

/// L1 is always updated; L2 is consulted and updated only on an L1 miss.
HierarchyAccess up_hierarchy(const HierarchyConfig& cfg, HierarchyState& h, BlockId b,
                             AccessKind kind = AccessKind::Read);

/// Finite injective block map with its inverse. `set_map` is the induced
/// permutation of set indices for one cache geometry.
class BlockBijection {
 public:
  BlockBijection() = default;

  /// Adds b -> c. Throws Error if it breaks injectivity or functionality.
  void add(BlockId b, BlockId c);
  std::optional<BlockId> forward(BlockId b) const;
  std::optional<BlockId> inverse(BlockId c) const;
  std::size_t size() const { return fwd_.size(); }

  /// Induced set permutation for `num_sets`; throws Error if the map does not
  /// preserve the partition of blocks into sets or is not a permutation on
  /// the touched sets. Sets never touched map to themselves only if that keeps
  /// the result a permutation.
  std::vector<std::int64_t> set_permutation(std::int64_t num_sets) const;

 private:
  std::unordered_map<BlockId, BlockId> fwd_;
  std::unordered_map<BlockId, BlockId> inv_;
};

/// pi(c) = lambda s. pi(c(pi_set^-1(s))). Policy state moves with its set.
CacheState apply_bijection(const CacheConfig& cfg, const BlockBijection& pi, const CacheState& c);

}  // namespace warpsim
