#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

namespace anderson {

// Half-edges are the elements of [n] x [d], flattened as vertex*d + slot.
struct HalfEdge {
    int vertex = 0;
    int slot = 0;
};

inline int half_edge_id(const HalfEdge& h, int d) { return h.vertex * d + h.slot; }

// A perfect matching of the n*d half-edges; the configuration-model state.
struct Pairing {
    int n = 0;
    int d = 0;
    std::vector<std::pair<int, int>> matches;  // m = n*d/2 pairs of half-edge ids

    int half_edges() const { return n * d; }
};

// Projection of a pairing: per-vertex multiplicities to distinct neighbors
// plus a loop count. Row sum invariant: sum(mult) + 2*loops == d.
struct MultiGraph {
    int n = 0;
    int d = 0;
    std::vector<std::vector<std::pair<int, int>>> adjacency;  // (neighbor, multiplicity), sorted, no self
    std::vector<int> loop_count;
};

// Simple d-regular graph: sorted distinct neighbor lists of size d.
struct RegularGraph {
    int n = 0;
    int d = 0;
    std::vector<std::vector<int>> neighbors;
};

Pairing sample_pairing(int n, int d, uint64_t seed);
MultiGraph pairing_to_multigraph(const Pairing& p);
bool is_simple(const MultiGraph& g);

// Rejection sampling over pairings; uniform over simple d-regular graphs.
// Throws std::runtime_error when max_attempts pairings were all non-simple.
// attempts_out, when non-null, receives the number of pairings drawn.
RegularGraph sample_simple_regular(int n, int d, uint64_t seed, int max_attempts = 1000,
                                   int* attempts_out = nullptr);

enum class SwitchMode { cross, parallel };

// Replace pairs {a,b},{c,d} by {a,c},{b,d} (cross) or {a,d},{b,c} (parallel).
Pairing switch_pairs(const Pairing& p, int pair_i, int pair_j, SwitchMode mode);

// BFS ball of radius r: vertices in discovery order (root first, neighbor
// lists scanned ascending), per-vertex depth, induced adjacency re-indexed
// to ball positions, and a cycle flag for the induced subgraph.
struct Ball {
    std::vector<int> vertices;
    std::vector<int> depth;
    std::vector<std::vector<int>> induced;
    bool has_cycle = false;
};

Ball ball(const RegularGraph& g, int root, int r);
bool has_cycle_in_ball(const RegularGraph& g, int root, int r);

// Upper bound on ball size in any graph of max degree d.
long tree_ball_size(int d, int r);

// Plain-text edge list: header "n d", then one "u v" line per edge, u < v.
void write_edge_list(std::ostream& out, const RegularGraph& g);
RegularGraph read_edge_list(std::istream& in);

}  // namespace anderson
