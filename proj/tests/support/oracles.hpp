// Brute-force reference models used by the test suites. These are written
// deliberately naively (timestamp scans, no recency lists, no shared helpers
// from the library) so they form an independent check on the simulator.
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace oracle {

using u32 = std::uint32_t;
using u64 = std::uint64_t;

struct Line {
  bool valid = false;
  u64 tag = 0;
  u32 home = 0;
  bool dirty = false;
  u64 stamp = 0;  // higher = more recently used
};

struct Set {
  std::vector<Line> ways;
  u32 counter = 0;  // remote-skip counter
};

struct VictimInfo {
  int way = -1;
  bool skipped = false;
  bool threshold = false;
};

// Scan for the least recently used way (all ways valid by contract).
inline int scan_lru(const Set& s) {
  int best = 0;
  for (int w = 1; w < static_cast<int>(s.ways.size()); ++w)
    if (s.ways[w].stamp < s.ways[best].stamp) best = w;
  return best;
}

inline int scan_lru_local(const Set& s, u32 local) {
  int best = -1;
  for (int w = 0; w < static_cast<int>(s.ways.size()); ++w) {
    if (!s.ways[w].valid || s.ways[w].home != local) continue;
    if (best < 0 || s.ways[w].stamp < s.ways[best].stamp) best = w;
  }
  return best;
}

// Direct transcription of the biased victim-selection rule:
//   take the LRU way; if it is local, evict it. If every line is remote,
//   evict the remote LRU. Otherwise consult the counter: above the threshold
//   evict the remote line and zero the counter, else bump the counter and
//   evict the LRU local line instead.
inline VictimInfo naive_select(Set& s, u32 local, bool biased, bool bias_on,
                               u32 threshold) {
  VictimInfo r;
  r.way = scan_lru(s);
  if (!biased || !bias_on) return r;
  if (s.ways[r.way].home == local) return r;
  bool all_remote = true;
  for (const auto& l : s.ways)
    if (l.valid && l.home == local) all_remote = false;
  if (all_remote) return r;
  if (s.counter > threshold) {
    s.counter = 0;
    r.threshold = true;
    return r;
  }
  s.counter += 1;
  r.skipped = true;
  r.way = scan_lru_local(s, local);
  return r;
}

struct NaiveOutcome {
  int level = 0;  // 0 = L1 hit, 1 = LLC hit, 2 = local DRAM, 3 = remote DRAM
  u64 latency = 0;
  int l1_fill_way = -1;
  int llc_fill_way = -1;
  VictimInfo l1_victim;
  VictimInfo llc_victim;
  std::vector<std::pair<u32, int>> writebacks;  // (home, level 0=L1 / 1=LLC)
};

struct NaiveParams {
  u32 sockets = 2;
  u32 cores_per_socket = 2;
  u32 address_bits = 32;
  u32 line = 64;
  u32 l1_sets = 16, l1_ways = 4;
  u32 llc_sets = 64, llc_ways = 8;
  u64 lat_l1 = 4, lat_llc = 30, lat_local = 100, lat_remote = 250;
  bool biased = false;  // false = plain LRU everywhere
  u32 h_l1 = 0, h_llc = 0;
};

// Two-level inclusive writeback hierarchy, rebuilt from scratch with
// timestamp LRU. Bias, when enabled, is unconditionally on (the adaptive
// controller is out of scope for the oracle).
class NaiveHierarchy {
 public:
  explicit NaiveHierarchy(const NaiveParams& p) : p_(p) {
    l1_.resize(p.sockets * p.cores_per_socket);
    for (auto& c : l1_) c.assign(p.l1_sets, make_set(p.l1_ways));
    llc_.resize(p.sockets);
    for (auto& c : llc_) c.assign(p.llc_sets, make_set(p.llc_ways));
  }

  NaiveOutcome access(u32 core, bool write, u64 addr) {
    NaiveOutcome out;
    const u32 node = core / p_.cores_per_socket;
    const u64 l1_tag = addr / p_.line / p_.l1_sets;
    const u32 l1_idx = static_cast<u32>(addr / p_.line % p_.l1_sets);
    Set& l1_set = l1_[core][l1_idx];

    for (u32 w = 0; w < p_.l1_ways; ++w) {
      if (l1_set.ways[w].valid && l1_set.ways[w].tag == l1_tag) {
        l1_set.ways[w].stamp = ++clock_;
        if (write) l1_set.ways[w].dirty = true;
        out.level = 0;
        out.latency = p_.lat_l1;
        return out;
      }
    }

    const u64 llc_tag = addr / p_.line / p_.llc_sets;
    const u32 llc_idx = static_cast<u32>(addr / p_.line % p_.llc_sets);
    Set& llc_set = llc_[node][llc_idx];
    bool llc_hit = false;
    for (u32 w = 0; w < p_.llc_ways; ++w) {
      if (llc_set.ways[w].valid && llc_set.ways[w].tag == llc_tag) {
        llc_set.ways[w].stamp = ++clock_;
        llc_hit = true;
        break;
      }
    }

    const u32 home = home_of(addr);
    if (llc_hit) {
      out.level = 1;
      out.latency = p_.lat_l1 + p_.lat_llc;
    } else {
      out.level = home == node ? 2 : 3;
      out.latency = p_.lat_l1 + p_.lat_llc +
                    (home == node ? p_.lat_local : p_.lat_remote);
      fill_llc(node, llc_idx, llc_tag, home, out);
    }
    fill_l1(core, node, l1_idx, l1_tag, home, write, out);
    return out;
  }

  u32 l1_counter(u32 core, u32 set) const { return l1_[core][set].counter; }
  u32 llc_counter(u32 node, u32 set) const { return llc_[node][set].counter; }

 private:
  static Set make_set(u32 ways) {
    Set s;
    s.ways.assign(ways, Line{});
    return s;
  }

  u32 home_of(u64 addr) const {
    u32 bits = 0;
    for (u32 v = p_.sockets; v > 1; v /= 2) ++bits;
    if (bits == 0) return 0;
    return static_cast<u32>(addr >> (p_.address_bits - bits));
  }

  int pick_way(Set& s, u32 node, u32 threshold, VictimInfo& victim, bool& evicted) {
    for (int w = 0; w < static_cast<int>(s.ways.size()); ++w) {
      if (!s.ways[w].valid) {
        evicted = false;
        return w;
      }
    }
    victim = naive_select(s, node, p_.biased, true, threshold);
    evicted = true;
    return victim.way;
  }

  void fill_l1(u32 core, u32 node, u32 idx, u64 tag, u32 home, bool dirty,
               NaiveOutcome& out) {
    Set& s = l1_[core][idx];
    bool evicted = false;
    int way = pick_way(s, node, p_.h_l1, out.l1_victim, evicted);
    if (evicted && s.ways[way].dirty) {
      // Merge the dirty bit into the LLC copy (present by inclusion).
      const u64 vaddr = (s.ways[way].tag * p_.l1_sets + idx) * p_.line;
      const u64 vtag = vaddr / p_.line / p_.llc_sets;
      const u32 vidx = static_cast<u32>(vaddr / p_.line % p_.llc_sets);
      for (u32 w = 0; w < p_.llc_ways; ++w) {
        Line& line = llc_[node][vidx].ways[w];
        if (line.valid && line.tag == vtag) line.dirty = true;
      }
      out.writebacks.emplace_back(s.ways[way].home, 0);
    }
    s.ways[way] = Line{true, tag, home, dirty, ++clock_};
    out.l1_fill_way = way;
  }

  void fill_llc(u32 node, u32 idx, u64 tag, u32 home, NaiveOutcome& out) {
    Set& s = llc_[node][idx];
    bool evicted = false;
    int way = pick_way(s, node, p_.h_llc, out.llc_victim, evicted);
    if (evicted) {
      const Line victim = s.ways[way];
      const u64 vaddr = (victim.tag * p_.llc_sets + idx) * p_.line;
      const u64 vtag = vaddr / p_.line / p_.l1_sets;
      const u32 vidx = static_cast<u32>(vaddr / p_.line % p_.l1_sets);
      bool dirty = victim.dirty;
      for (u32 core = node * p_.cores_per_socket;
           core < (node + 1) * p_.cores_per_socket; ++core) {
        for (u32 w = 0; w < p_.l1_ways; ++w) {
          Line& line = l1_[core][vidx].ways[w];
          if (line.valid && line.tag == vtag) {
            if (line.dirty) {
              dirty = true;
              out.writebacks.emplace_back(victim.home, 0);
            }
            line.valid = false;
          }
        }
      }
      if (dirty) out.writebacks.emplace_back(victim.home, 1);
    }
    s.ways[way] = Line{true, tag, home, false, ++clock_};
    out.llc_fill_way = way;
  }

  NaiveParams p_;
  std::vector<std::vector<Set>> l1_;   // [core][set]
  std::vector<std::vector<Set>> llc_;  // [socket][set]
  u64 clock_ = 0;
};

// Small LCG, distinct from the library's generator.
struct TestRng {
  u64 state = 0x2545F4914F6CDD1Dull;
  explicit TestRng(u64 seed) : state(seed * 2862933555777941757ull + 3037000493ull) {}
  u64 next() {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    return state >> 16;
  }
  u64 next_below(u64 n) { return next() % n; }
};

}  // namespace oracle
