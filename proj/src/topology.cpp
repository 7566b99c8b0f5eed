#include "oscres/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "oscres/errors.hpp"

namespace oscres {

void TopologyParams::validate() const {
    if (n_rings < 1) throw TopologyError("n_rings must be >= 1");
    if (ring_size_lower < 3)
        throw TopologyError("invalid ring size: rings need at least 3 neurons");
    if (ring_size_lower > ring_size_upper)
        throw TopologyError("ring size range is empty");
    if (k < 2 || k % 2 != 0) throw TopologyError("Watts-Strogatz degree k must be even and >= 2");
    if (k >= n_rings) throw TopologyError("Watts-Strogatz degree k must be < n_rings");
    if (!(p >= 0.0 && p <= 1.0)) throw TopologyError("p must lie in [0,1]");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw TopologyError("epsilon must lie in [0,1]");
    if (n_in < 1) throw TopologyError("n_in must be >= 1");
    if (!(input_ring_fraction > 0.0 && input_ring_fraction <= 1.0))
        throw TopologyError("input_ring_fraction must lie in (0,1]");
}

int ReservoirTopology::ring_of(int neuron) const {
    for (std::size_t j = 0; j < rings.size(); ++j) {
        if (neuron >= rings[j].start && neuron < rings[j].start + rings[j].size)
            return static_cast<int>(j);
    }
    throw DimensionError("neuron index outside every ring");
}

std::vector<int> sample_ring_sizes(int n_rings, int lower, int upper, Rng& rng) {
    if (n_rings < 1) throw TopologyError("n_rings must be >= 1");
    if (lower < 3) throw TopologyError("invalid ring size: rings need at least 3 neurons");
    if (lower > upper) throw TopologyError("ring size range is empty");
    std::vector<int> sizes(static_cast<std::size_t>(n_rings));
    for (auto& s : sizes) s = static_cast<int>(rng.uniform_int(lower, upper));
    return sizes;
}

std::vector<RingSpec> make_rings(const std::vector<int>& sizes) {
    std::vector<RingSpec> rings;
    rings.reserve(sizes.size());
    int start = 0;
    for (int s : sizes) {
        if (s < 3) throw TopologyError("invalid ring size: rings need at least 3 neurons");
        rings.push_back(RingSpec{s, start});
        start += s;
    }
    return rings;
}

namespace {

std::uint64_t edge_key(int a, int b, int n) {
    if (a > b) std::swap(a, b);
    return static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(n) +
           static_cast<std::uint64_t>(b);
}

}  // namespace

std::vector<SmallWorldEdge> build_small_world(int n_rings, int k, double p, Rng& rng) {
    if (k < 2 || k % 2 != 0) throw TopologyError("Watts-Strogatz degree k must be even and >= 2");
    if (k >= n_rings) throw TopologyError("Watts-Strogatz degree k must be < n_rings");
    if (!(p >= 0.0 && p <= 1.0)) throw TopologyError("p must lie in [0,1]");

    // Ring lattice, one pass per neighbor distance.
    std::vector<std::pair<int, int>> lattice;
    std::set<std::uint64_t> present;
    std::vector<int> degree(static_cast<std::size_t>(n_rings), 0);
    for (int j = 1; j <= k / 2; ++j) {
        for (int u = 0; u < n_rings; ++u) {
            const int v = (u + j) % n_rings;
            lattice.emplace_back(u, v);
            present.insert(edge_key(u, v, n_rings));
            ++degree[static_cast<std::size_t>(u)];
            ++degree[static_cast<std::size_t>(v)];
        }
    }

    // Rewire each lattice edge's far endpoint with probability p.
    for (auto& [u, v] : lattice) {
        if (!rng.bernoulli(p)) continue;
        if (degree[static_cast<std::size_t>(u)] >= n_rings - 1) continue;  // already saturated
        int w;
        do {
            w = static_cast<int>(rng.uniform_int(0, n_rings - 1));
        } while (w == u || present.count(edge_key(u, w, n_rings)) != 0);
        present.erase(edge_key(u, v, n_rings));
        present.insert(edge_key(u, w, n_rings));
        --degree[static_cast<std::size_t>(v)];
        ++degree[static_cast<std::size_t>(w)];
        v = w;
    }

    std::vector<SmallWorldEdge> edges;
    edges.reserve(lattice.size());
    for (const auto& [u, v] : lattice)
        edges.push_back(SmallWorldEdge{std::min(u, v), std::max(u, v)});
    std::sort(edges.begin(), edges.end(), [](const SmallWorldEdge& a, const SmallWorldEdge& b) {
        return a.ring_a != b.ring_a ? a.ring_a < b.ring_a : a.ring_b < b.ring_b;
    });
    return edges;
}

CsrMatrix assemble_coupling(const std::vector<RingSpec>& rings,
                            const std::vector<SmallWorldEdge>& edges, double epsilon) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw TopologyError("epsilon must lie in [0,1]");
    int n = 0;
    for (const auto& r : rings) {
        if (r.start != n) throw TopologyError("rings do not partition the neuron range");
        if (r.size < 3) throw TopologyError("invalid ring size: rings need at least 3 neurons");
        n += r.size;
    }

    std::vector<CsrMatrix::Triplet> trips;
    trips.reserve(static_cast<std::size_t>(n) + 2 * edges.size());
    for (const auto& r : rings) {
        for (int i = 0; i < r.size; ++i) {
            const int pred = (i - 1 + r.size) % r.size;
            trips.push_back({r.start + i, r.start + pred, 1.0});
        }
    }
    const int n_rings = static_cast<int>(rings.size());
    for (const auto& e : edges) {
        if (e.ring_a == e.ring_b || e.ring_a < 0 || e.ring_b >= n_rings)
            throw TopologyError("edge endpoints out of range or self-loop");
        // Sender is each ring's first neuron (local 0), receiver its second
        // (local 1); every ring has >= 3 neurons so both exist.
        trips.push_back({rings[static_cast<std::size_t>(e.ring_b)].start + 1,
                         rings[static_cast<std::size_t>(e.ring_a)].start + 0, epsilon});
        trips.push_back({rings[static_cast<std::size_t>(e.ring_a)].start + 1,
                         rings[static_cast<std::size_t>(e.ring_b)].start + 0, epsilon});
    }
    return CsrMatrix::from_triplets(n, n, std::move(trips));
}

CsrMatrix build_input_matrix(int n_neurons, int n_in, double p, double epsilon, Rng& rng,
                             const std::vector<std::uint8_t>& enabled_rows) {
    if (n_in < 1) throw TopologyError("n_in must be >= 1");
    if (!enabled_rows.empty() && enabled_rows.size() != static_cast<std::size_t>(n_neurons))
        throw DimensionError("enabled_rows length mismatch");
    std::vector<CsrMatrix::Triplet> trips;
    for (int i = 0; i < n_neurons; ++i) {
        if (!enabled_rows.empty() && !enabled_rows[static_cast<std::size_t>(i)]) continue;
        for (int c = 0; c < n_in; ++c) {
            if (rng.bernoulli(p)) trips.push_back({i, c, epsilon});
        }
    }
    return CsrMatrix::from_triplets(n_neurons, n_in, std::move(trips));
}

ReservoirTopology build_topology(const TopologyParams& params) {
    params.validate();
    Rng rng(params.seed);

    ReservoirTopology topo;
    topo.params = params;
    topo.rings = make_rings(
        sample_ring_sizes(params.n_rings, params.ring_size_lower, params.ring_size_upper, rng));
    topo.edges = build_small_world(params.n_rings, params.k, params.p, rng);
    topo.W = assemble_coupling(topo.rings, topo.edges, params.epsilon);

    std::vector<std::uint8_t> enabled;
    if (params.input_ring_fraction < 1.0) {
        // Choose ceil(fraction * R) input rings by a partial Fisher-Yates
        // draw, then enable their neuron rows.
        const int r = params.n_rings;
        const int chosen = std::min(
            r, static_cast<int>(std::ceil(params.input_ring_fraction * static_cast<double>(r))));
        std::vector<int> order(static_cast<std::size_t>(r));
        std::iota(order.begin(), order.end(), 0);
        for (int i = 0; i < chosen; ++i) {
            const int j = static_cast<int>(rng.uniform_int(i, r - 1));
            std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
        }
        enabled.assign(static_cast<std::size_t>(topo.W.rows()), 0);
        for (int i = 0; i < chosen; ++i) {
            const RingSpec& ring = topo.rings[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
            for (int s = 0; s < ring.size; ++s)
                enabled[static_cast<std::size_t>(ring.start + s)] = 1;
        }
    }
    topo.W_in =
        build_input_matrix(topo.W.rows(), params.n_in, params.p, params.epsilon, rng, enabled);
    return topo;
}

std::string topology_to_json(const ReservoirTopology& topo) {
    nlohmann::json j;
    j["format"] = "oscres-topology-v1";
    j["params"] = {{"n_rings", topo.params.n_rings},
                   {"ring_size_lower", topo.params.ring_size_lower},
                   {"ring_size_upper", topo.params.ring_size_upper},
                   {"k", topo.params.k},
                   {"p", topo.params.p},
                   {"epsilon", topo.params.epsilon},
                   {"n_in", topo.params.n_in},
                   {"input_ring_fraction", topo.params.input_ring_fraction},
                   {"seed", topo.params.seed}};
    auto& sizes = j["ring_sizes"] = nlohmann::json::array();
    for (const auto& r : topo.rings) sizes.push_back(r.size);
    auto& edges = j["edges"] = nlohmann::json::array();
    for (const auto& e : topo.edges) edges.push_back({e.ring_a, e.ring_b});
    return j.dump(2);
}

ReservoirTopology topology_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("topology JSON parse failure: ") + e.what());
    }
    if (j.value("format", "") != "oscres-topology-v1")
        throw DataError("unrecognized topology format tag");

    TopologyParams params;
    try {
        const auto& p = j.at("params");
        params.n_rings = p.at("n_rings").get<int>();
        params.ring_size_lower = p.at("ring_size_lower").get<int>();
        params.ring_size_upper = p.at("ring_size_upper").get<int>();
        params.k = p.at("k").get<int>();
        params.p = p.at("p").get<double>();
        params.epsilon = p.at("epsilon").get<double>();
        params.n_in = p.at("n_in").get<int>();
        params.input_ring_fraction = p.at("input_ring_fraction").get<double>();
        params.seed = p.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("topology JSON missing field: ") + e.what());
    }

    ReservoirTopology topo = build_topology(params);

    // The stored realization must match the rebuild; a mismatch means the
    // file was edited or produced by an incompatible build.
    const auto& sizes = j.at("ring_sizes");
    if (sizes.size() != topo.rings.size())
        throw DataError("topology replay mismatch: ring count differs");
    for (std::size_t i = 0; i < topo.rings.size(); ++i)
        if (sizes[i].get<int>() != topo.rings[i].size)
            throw DataError("topology replay mismatch: ring sizes differ");
    const auto& edges = j.at("edges");
    if (edges.size() != topo.edges.size())
        throw DataError("topology replay mismatch: edge count differs");
    for (std::size_t i = 0; i < topo.edges.size(); ++i) {
        if (edges[i][0].get<int>() != topo.edges[i].ring_a ||
            edges[i][1].get<int>() != topo.edges[i].ring_b)
            throw DataError("topology replay mismatch: edges differ");
    }
    return topo;
}

void save_topology(const std::filesystem::path& path, const ReservoirTopology& topo) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open topology file for writing: " + path.string());
    out << topology_to_json(topo) << '\n';
    if (!out) throw DataError("write failure on topology file: " + path.string());
}

ReservoirTopology load_topology(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open topology file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return topology_from_json(ss.str());
}

}  // namespace oscres
