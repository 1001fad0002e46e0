#include <doctest.h>

#include "numasim/topology.hpp"
#include "support/oracles.hpp"

using namespace numasim;

namespace {

SystemTopology topo_4s() {
  return SystemTopology{.num_sockets = 4, .cores_per_socket = 2,
                        .address_bits = 32, .line_size = 64};
}

}  // namespace

TEST_CASE("home_node_of extracts the upper address bits") {
  const SystemTopology topo = topo_4s();
  CHECK(home_node_of(0xC0000040ull, topo) == 3);  // top two bits 11
  CHECK(home_node_of(0x00000040ull, topo) == 0);
  CHECK(home_node_of(0x80000000ull, topo) == 2);  // top bits 10

  const SystemTopology two{.num_sockets = 2, .cores_per_socket = 1,
                           .address_bits = 32, .line_size = 64};
  CHECK(home_node_of(0x00000040ull, two) == 0);
  CHECK(home_node_of(0xFFFFFFFFull, two) == 1);
}

TEST_CASE("home_node_of rejects addresses beyond the configured width") {
  CHECK_THROWS_AS(home_node_of(0x100000000ull, topo_4s()), Error);
}

TEST_CASE("single socket: every address is homed at node 0") {
  const SystemTopology one{.num_sockets = 1, .cores_per_socket = 4,
                           .address_bits = 32, .line_size = 64};
  oracle::TestRng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const Addr addr = rng.next() & 0xFFFFFFFFull;
    CHECK(home_node_of(addr, one) == 0);
    // No (core, address) pair is ever remote.
    for (CoreId core = 0; core < one.num_cores(); ++core)
      CHECK(home_node_of(addr, one) == node_of_core(core, one));
  }
}

TEST_CASE("node_of_core groups cores contiguously") {
  const SystemTopology topo{.num_sockets = 2, .cores_per_socket = 4,
                            .address_bits = 32, .line_size = 64};
  CHECK(node_of_core(0, topo) == 0);
  CHECK(node_of_core(5, topo) == 1);
  CHECK(node_of_core(7, topo) == 1);
  CHECK_THROWS_AS(node_of_core(8, topo), Error);
}

TEST_CASE("decompose splits offset / set / tag and keeps the home bits") {
  const SystemTopology topo{.num_sockets = 4, .cores_per_socket = 1,
                            .address_bits = 32, .line_size = 64};
  const CacheGeometry geom{.num_sets = 16, .associativity = 4, .line_size = 64};

  const DecomposedAddress d = decompose(0x1A40, topo, geom);
  CHECK(d.offset == 0x00);
  CHECK(d.set_index == 0x9);
  CHECK(recompose(d.tag, d.set_index, d.offset, geom) == 0x1A40);

  // Two addresses differing only in offset bits share tag and set.
  const DecomposedAddress a = decompose(0x1A40 + 0x13, topo, geom);
  CHECK(a.tag == d.tag);
  CHECK(a.set_index == d.set_index);
  CHECK(a.offset == 0x13);

  // Top bits 10 select home 2 regardless of geometry.
  for (std::uint32_t sets : {1u, 16u, 1024u}) {
    const CacheGeometry g{.num_sets = sets, .associativity = 2, .line_size = 64};
    CHECK(decompose(0x80000040ull, topo, g).home == 2);
  }
}

TEST_CASE("decompose round-trips exhaustively over a 16-bit subspace") {
  const SystemTopology topo{.num_sockets = 2, .cores_per_socket = 2,
                            .address_bits = 16, .line_size = 8};
  const CacheGeometry geom{.num_sets = 32, .associativity = 4, .line_size = 8};
  for (Addr addr = 0; addr < (Addr(1) << 16); ++addr) {
    const DecomposedAddress d = decompose(addr, topo, geom);
    CHECK(recompose(d.tag, d.set_index, d.offset, geom) == addr);
    CHECK(d.home == home_node_of(addr, topo));
  }
}

TEST_CASE("decompose round-trips on random full-width addresses") {
  const SystemTopology topo{.num_sockets = 8, .cores_per_socket = 2,
                            .address_bits = 48, .line_size = 64};
  const CacheGeometry geom{.num_sets = 2048, .associativity = 16, .line_size = 64};
  oracle::TestRng rng(42);
  for (int i = 0; i < 20000; ++i) {
    const Addr addr = rng.next() & ((Addr(1) << 48) - 1);
    const DecomposedAddress d = decompose(addr, topo, geom);
    CHECK(recompose(d.tag, d.set_index, d.offset, geom) == addr);
    CHECK(d.home == home_node_of(addr, topo));
    CHECK(home_from_tag(d.tag, topo, geom) == d.home);
  }
}

TEST_CASE("topology validation catches bad shapes") {
  SystemTopology topo{.num_sockets = 3, .cores_per_socket = 1,
                      .address_bits = 32, .line_size = 64};
  CHECK(!topo.validate().empty());

  topo = SystemTopology{.num_sockets = 2, .cores_per_socket = 0,
                        .address_bits = 32, .line_size = 64};
  CHECK(!topo.validate().empty());

  topo = SystemTopology{.num_sockets = 2, .cores_per_socket = 1,
                        .address_bits = 32, .line_size = 48};
  CHECK(!topo.validate().empty());

  // address_bits must cover socket bits + offset bits + 1.
  topo = SystemTopology{.num_sockets = 4, .cores_per_socket = 1,
                        .address_bits = 7, .line_size = 64};
  CHECK(!topo.validate().empty());

  topo = SystemTopology{.num_sockets = 4, .cores_per_socket = 2,
                        .address_bits = 32, .line_size = 64};
  CHECK(topo.validate().empty());
}
