#pragma once

// Symbolic cache states: lines hold affine byte-address expressions over the
// live loop iterators instead of concrete blocks.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "warpsim/cache.hpp"
#include "warpsim/scop.hpp"

namespace warpsim {

/// floor((coeffs . i + constant) / line_size); `valid == false` is the empty
/// line.
struct SymBlock {
  std::array<Value, kMaxDepth> coeffs{};
  Value constant = 0;
  bool valid = false;

  static SymBlock of(const ByteExpr& e) { return SymBlock{e.coeffs, e.constant, true}; }
  Value address(std::span<const Value> iters) const;
  friend bool operator==(const SymBlock&, const SymBlock&) = default;
};

struct SymSetState {
  std::vector<SymBlock> lines;
  std::vector<std::uint8_t> meta;
  std::vector<std::uint8_t> dirty;
  friend bool operator==(const SymSetState&, const SymSetState&) = default;
};

/// One symbolic cache level. Iterator increments are applied lazily: stored
/// expressions are relative to `iters - pending`, and every observer folds the
/// pending offsets in on the fly.
class SymCache {
 public:
  SymCache() = default;
  explicit SymCache(const CacheConfig& cfg);

  const CacheConfig& config() const { return cfg_; }
  std::size_t mru_set() const { return mru_; }
  const std::vector<SymSetState>& sets() const { return sets_; }

  /// Expression of a line with pending offsets folded in.
  SymBlock effective(const SymBlock& stored) const;
  BlockId concretize(const SymBlock& stored, std::span<const Value> iters) const;

  CacheState gamma(std::span<const Value> iters) const;
  bool contains(const SymBlock& sb, std::span<const Value> iters) const;

  /// Classifies and updates for an access to `sb` (an expression over the
  /// current iterators). Throws Error if two lines of the touched set
  /// concretize to the same block.
  SetAccess access(const SymBlock& sb, std::span<const Value> iters, AccessKind kind);

  /// Iterator `d` advances by `delta`; concretizations are unchanged.
  void shift(std::size_t d, Value delta);
  /// Iterator `d` goes out of scope with final value `value`.
  void kill(std::size_t d, Value value);
  /// Moves set s to (s + k) mod S.
  void rotate(std::int64_t k);

  /// Serialization starting at the most recently used set; equal keys mean
  /// the states are equal up to a rotation by the mru difference.
  std::vector<Value> canonical_key() const;
  void append_canonical_key(std::vector<Value>& out) const;
  std::uint64_t hash() const;

  std::string dump(const std::vector<std::string>& iter_names, std::span<const Value> iters) const;

  /// Replaces the whole state with the concrete state `c`, using constant
  /// expressions.
  static SymCache from_concrete(const CacheConfig& cfg, const CacheState& c, std::size_t mru = 0);

 private:
  SymBlock stored_form(const SymBlock& sb) const;

  CacheConfig cfg_;
  std::vector<SymSetState> sets_;
  std::size_t mru_ = 0;
  std::array<Value, kMaxDepth> pending_{};
};

/// Symbolic counterpart of the concrete hierarchy.
struct SymHierarchy {
  std::vector<SymCache> levels;

  explicit SymHierarchy(const HierarchyConfig& cfg);
  SymHierarchy(const HierarchyConfig& cfg, const HierarchyState& init);

  HierarchyAccess access(const SymBlock& sb, std::span<const Value> iters, AccessKind kind);
  HierarchyState gamma(std::span<const Value> iters) const;
  void shift(std::size_t d, Value delta);
  void kill(std::size_t d, Value value);
};

std::uint64_t hash_values(std::span<const Value> v);

}  // namespace warpsim
