#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "oscres/rng.hpp"
#include "oscres/sparse.hpp"

namespace oscres {

// One ring oscillator's slice of the global neuron ordering.
struct RingSpec {
    int size = 0;   // neurons in this ring, >= 3
    int start = 0;  // index of the ring's first neuron
};

// Undirected ring-to-ring connection; normalized so ring_a < ring_b.
struct SmallWorldEdge {
    int ring_a = 0;
    int ring_b = 0;

    bool operator==(const SmallWorldEdge&) const = default;
};

struct TopologyParams {
    int n_rings = 100;
    int ring_size_lower = 3;
    int ring_size_upper = 10;
    int k = 4;              // Watts-Strogatz base degree, even, < n_rings
    double p = 0.4;         // rewiring probability, shared with the W_in Bernoulli draw
    double epsilon = 0.2;   // inter-ring and input coupling weight
    int n_in = 16;          // input channels
    double input_ring_fraction = 1.0;  // < 1 restricts W_in rows to a ring subset
    std::uint64_t seed = 0;

    void validate() const;
};

// The reservoir wiring: ring partition, recurrent matrix W and input matrix
// W_in, plus the provenance parameters needed to rebuild both bit-exactly.
// W[i,m] is the weight of neuron m's output into neuron i's drive.
struct ReservoirTopology {
    TopologyParams params;
    std::vector<RingSpec> rings;
    std::vector<SmallWorldEdge> edges;
    CsrMatrix W;      // N x N
    CsrMatrix W_in;   // N x n_in, entries in {0, epsilon}

    int n_neurons() const { return W.rows(); }
    int n_rings() const { return static_cast<int>(rings.size()); }
    // Ring that owns global neuron index i.
    int ring_of(int neuron) const;
};

// n_rings sizes, each uniform over {lower, ..., upper} inclusive. Rings with
// fewer than three neurons may not circulate their pulses indefinitely, so
// lower < 3 is rejected.
std::vector<int> sample_ring_sizes(int n_rings, int lower, int upper, Rng& rng);

// Standard Watts-Strogatz graph over ring indices: k-nearest ring lattice,
// then each lattice edge's far endpoint is rewired with probability p to a
// uniform node, avoiding self-loops and duplicates. Edge count is preserved.
std::vector<SmallWorldEdge> build_small_world(int n_rings, int k, double p, Rng& rng);

// Rings from a size list: starts are the prefix sums.
std::vector<RingSpec> make_rings(const std::vector<int>& sizes);

// Intra-ring entries: each neuron receives weight 1 from its ring
// predecessor. Inter-ring entries: for each edge {a,b}, ring a's sender
// (local index 0) feeds ring b's receiver (local index 1) with weight
// epsilon, and symmetrically. Entries are stored structurally even when
// epsilon == 0, so nnz(W) == N + 2*|edges| always.
CsrMatrix assemble_coupling(const std::vector<RingSpec>& rings,
                            const std::vector<SmallWorldEdge>& edges, double epsilon);

// Each entry independently epsilon with probability p, else absent. Entries
// are drawn row-major. When enabled_rows is non-empty, rows outside it are
// skipped without consuming randomness.
CsrMatrix build_input_matrix(int n_neurons, int n_in, double p, double epsilon, Rng& rng,
                             const std::vector<std::uint8_t>& enabled_rows = {});

// Full construction from params: one generator seeded by params.seed drives
// sizes -> edges -> W_in in that order, so identical params reproduce the
// topology bit-exactly.
ReservoirTopology build_topology(const TopologyParams& params);

// JSON layout (ring sizes, edge list, seed, parameters) so experiments can be
// replayed without storing matrices. Loading rebuilds from the stored params
// and verifies the realized sizes/edges against the file.
std::string topology_to_json(const ReservoirTopology& topo);
ReservoirTopology topology_from_json(const std::string& text);
void save_topology(const std::filesystem::path& path, const ReservoirTopology& topo);
ReservoirTopology load_topology(const std::filesystem::path& path);

}  // namespace oscres
