#pragma once

#include <algorithm>
#include <cassert>
#include <numeric>
#include <optional>
#include <vector>

#include "numasim/topology.hpp"

namespace numasim {

struct CacheLineState {
  bool valid = false;
  Addr tag = 0;
  NodeId home = 0;  // stored at fill time; equals the home bits of the tag
  bool dirty = false;
};

/// One cache set: lines, an explicit recency order (front = LRU, back = MRU),
/// and the remote-skip counter that meters how many times a remote line in
/// LRU position has been spared.
struct CacheSetState {
  std::vector<CacheLineState> lines;
  std::vector<std::uint32_t> recency;
  std::uint32_t remote_skip_counter = 0;

  explicit CacheSetState(std::uint32_t ways)
      : lines(ways), recency(ways) {
    std::iota(recency.begin(), recency.end(), 0u);
  }

  std::uint32_t lru_way() const { return recency.front(); }
};

/// Replacement policy for one cache level. `threshold` is the per-set skip
/// budget: once the counter exceeds it, the remote line in LRU position is
/// evicted and the counter resets. Default budget is half the associativity.
struct PolicyMode {
  bool biased = false;          // false: plain LRU
  std::uint32_t threshold = 0;  // meaningful only when biased

  static PolicyMode plain_lru() { return {}; }
  static PolicyMode remote_biased(std::uint32_t threshold) {
    return {true, threshold};
  }
};

/// Which branch of the victim selection fired, and the counter value the
/// caller must store back. skipped_remote and evicted_remote_due_to_threshold
/// are mutually exclusive.
struct VictimDecision {
  std::uint32_t way = 0;
  bool evicted_remote_due_to_threshold = false;
  bool skipped_remote = false;
  std::uint32_t counter_after = 0;
};

/// Tag probe. Valid lines only; recency is untouched (see touch_mru).
inline std::optional<std::uint32_t> lookup(const CacheSetState& set, Addr tag) {
  for (std::uint32_t w = 0; w < set.lines.size(); ++w)
    if (set.lines[w].valid && set.lines[w].tag == tag) return w;
  return std::nullopt;
}

inline void touch_mru(CacheSetState& set, std::uint32_t way) {
  assert(way < set.lines.size());
  auto it = std::find(set.recency.begin(), set.recency.end(), way);
  assert(it != set.recency.end());
  set.recency.erase(it);
  set.recency.push_back(way);
}

inline std::optional<std::uint32_t> find_invalid_way(const CacheSetState& set) {
  for (std::uint32_t w = 0; w < set.lines.size(); ++w)
    if (!set.lines[w].valid) return w;
  return std::nullopt;
}

/// Pick a victim in a full set. Branches, in order:
///   1. plain LRU, or bias currently disabled: the LRU way.
///   2. LRU way is homed locally: no deviation, the LRU way.
///   3. every line in the set is remote: the LRU way (counter untouched).
///   4. counter > threshold: evict the remote LRU way, counter resets to 0.
///   5. otherwise: spare the remote LRU way, bump the counter, and evict the
///      least-recently-used *local* line instead.
/// Pure: the caller stores counter_after back into the set.
inline VictimDecision select_victim(const CacheSetState& set, NodeId local_node,
                                    PolicyMode mode, bool bias_enabled) {
  assert(!set.lines.empty());
  assert(!find_invalid_way(set).has_value());  // caller fills invalid ways directly

  const std::uint32_t lru = set.lru_way();
  VictimDecision d{lru, false, false, set.remote_skip_counter};

  if (!mode.biased || !bias_enabled) return d;
  if (set.lines[lru].home == local_node) return d;

  bool any_local = false;
  for (const auto& line : set.lines)
    if (line.valid && line.home == local_node) any_local = true;
  if (!any_local) return d;  // all-remote set: fall back to the remote LRU way

  if (set.remote_skip_counter > mode.threshold) {
    d.evicted_remote_due_to_threshold = true;
    d.counter_after = 0;
    return d;
  }

  d.skipped_remote = true;
  d.counter_after = set.remote_skip_counter + 1;
  for (std::uint32_t w : set.recency) {
    if (set.lines[w].valid && set.lines[w].home == local_node) {
      d.way = w;
      break;
    }
  }
  return d;
}

/// Install a line: way becomes valid with the given contents and moves to MRU.
inline void apply_fill(CacheSetState& set, std::uint32_t way, Addr tag,
                       NodeId home, bool dirty) {
  assert(way < set.lines.size());
  set.lines[way] = CacheLineState{true, tag, home, dirty};
  touch_mru(set, way);
}

/// A full set-associative cache: geometry plus one CacheSetState per set.
class Cache {
 public:
  explicit Cache(const CacheGeometry& geom)
      : geom_(geom),
        sets_(geom.num_sets, CacheSetState(geom.associativity)) {}

  const CacheGeometry& geometry() const { return geom_; }
  CacheSetState& set(std::uint32_t index) { return sets_[index]; }
  const CacheSetState& set(std::uint32_t index) const { return sets_[index]; }
  std::uint32_t num_sets() const { return geom_.num_sets; }

 private:
  CacheGeometry geom_;
  std::vector<CacheSetState> sets_;
};

}  // namespace numasim
