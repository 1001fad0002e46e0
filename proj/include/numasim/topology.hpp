#pragma once

#include <string>
#include <vector>

#include "numasim/common.hpp"

namespace numasim {

/// Machine shape: sockets ("nodes"), cores per socket, physical address width,
/// cache-line size. A line's home node is given by the top log2(num_sockets)
/// bits of its physical address.
struct SystemTopology {
  std::uint32_t num_sockets = 1;      // power of two
  std::uint32_t cores_per_socket = 1;
  std::uint32_t address_bits = 32;
  std::uint32_t line_size = 64;       // bytes, power of two

  std::uint32_t socket_bits() const { return ilog2(num_sockets); }
  std::uint32_t num_cores() const { return num_sockets * cores_per_socket; }
  Addr address_limit() const { return Addr(1) << address_bits; }

  std::vector<std::string> validate() const {
    std::vector<std::string> errs;
    if (num_sockets < 1 || !is_pow2(num_sockets))
      errs.push_back("topology.num_sockets must be a power of two >= 1, got " +
                     std::to_string(num_sockets));
    if (cores_per_socket < 1)
      errs.push_back("topology.cores_per_socket must be >= 1, got " +
                     std::to_string(cores_per_socket));
    if (line_size < 8 || !is_pow2(line_size))
      errs.push_back("topology.line_size must be a power of two >= 8, got " +
                     std::to_string(line_size));
    if (address_bits > 63)
      errs.push_back("topology.address_bits must be <= 63, got " +
                     std::to_string(address_bits));
    else if (is_pow2(num_sockets) && is_pow2(line_size) &&
             address_bits < ilog2(num_sockets) + ilog2(line_size) + 1)
      errs.push_back("topology.address_bits too small: need at least socket bits + "
                     "line-offset bits + 1, got " + std::to_string(address_bits));
    return errs;
  }
};

/// Home node of a physical address: its top log2(num_sockets) bits.
inline NodeId home_node_of(Addr addr, const SystemTopology& topo) {
  if (addr >= topo.address_limit())
    throw Error("address 0x" + hex16(addr) + " exceeds " +
                std::to_string(topo.address_bits) + " address bits");
  const std::uint32_t sb = topo.socket_bits();
  if (sb == 0) return 0;
  return static_cast<NodeId>(addr >> (topo.address_bits - sb));
}

/// Cores are packed into sockets contiguously: core / cores_per_socket.
inline NodeId node_of_core(CoreId core, const SystemTopology& topo) {
  if (core >= topo.num_cores())
    throw Error("core " + std::to_string(core) + " out of range (have " +
                std::to_string(topo.num_cores()) + " cores)");
  return core / topo.cores_per_socket;
}

/// Shape of one set-associative cache level.
struct CacheGeometry {
  std::uint32_t num_sets = 1;       // power of two
  std::uint32_t associativity = 1;  // ways per set
  std::uint32_t line_size = 64;     // must equal the topology's line size

  std::uint32_t offset_bits() const { return ilog2(line_size); }
  std::uint32_t index_bits() const { return ilog2(num_sets); }
  std::uint64_t capacity_lines() const {
    return std::uint64_t(num_sets) * associativity;
  }
};

/// An address split against one cache geometry. The tag keeps the upper
/// address bits, so the home node stays recoverable from a stored tag.
struct DecomposedAddress {
  Addr tag = 0;
  std::uint32_t set_index = 0;
  std::uint32_t offset = 0;
  NodeId home = 0;
};

inline DecomposedAddress decompose(Addr addr, const SystemTopology& topo,
                                   const CacheGeometry& geom) {
  DecomposedAddress d;
  d.home = home_node_of(addr, topo);  // also range-checks addr
  d.offset = static_cast<std::uint32_t>(addr & (geom.line_size - 1));
  d.set_index = static_cast<std::uint32_t>((addr >> geom.offset_bits()) &
                                           (geom.num_sets - 1));
  d.tag = addr >> (geom.offset_bits() + geom.index_bits());
  return d;
}

inline Addr recompose(Addr tag, std::uint32_t set_index, std::uint32_t offset,
                      const CacheGeometry& geom) {
  return (((tag << geom.index_bits()) | set_index) << geom.offset_bits()) | offset;
}

/// Home node recovered from a stored tag's upper bits. Matches home_node_of
/// of the recomposed address whenever the tag is wide enough to hold the
/// socket bits (enforced by configuration validation).
inline NodeId home_from_tag(Addr tag, const SystemTopology& topo,
                            const CacheGeometry& geom) {
  const std::uint32_t sb = topo.socket_bits();
  if (sb == 0) return 0;
  const std::uint32_t tag_bits =
      topo.address_bits - geom.offset_bits() - geom.index_bits();
  return static_cast<NodeId>(tag >> (tag_bits - sb));
}

}  // namespace numasim
