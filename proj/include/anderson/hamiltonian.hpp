#pragma once

#include <Eigen/Sparse>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "anderson/graph.hpp"

namespace anderson {

// z = E + i*eta with eta > 0 strictly.
struct SpectralParameter {
    double E = 0.0;
    double eta = 0.0;

    SpectralParameter(double energy, double eta_);
    std::complex<double> z() const { return {E, eta}; }
};

// i.i.d. standard normal potential, reproducible from its seed.
struct DisorderField {
    uint64_t seed = 0;
    std::vector<double> values;
};

DisorderField sample_disorder(int n, uint64_t seed);

// Sparse symmetric -t*A + diag(V). Off-diagonal entries are -t (simple edge)
// or -2t (double edge); the diagonal is V_i - 2t*loop_count_i. The disorder
// field travels with the operator so surgeries reuse the same samples.
struct Hamiltonian {
    int n = 0;
    int d = 0;  // degree bound of the host graph
    double t = 0.0;
    Eigen::SparseMatrix<double> matrix;  // both triangles stored
    DisorderField disorder;
    std::string host;

    // neighbor lists read off the off-diagonal sparsity pattern
    std::vector<std::vector<int>> adjacency() const;
};

Hamiltonian assemble(const RegularGraph& g, const DisorderField& v, double t);
Hamiltonian assemble(const MultiGraph& g, const DisorderField& v, double t);

// Zero all matrix entries between B_r(root) and its complement.
Hamiltonian decouple(const Hamiltonian& h, int root, int r);

// Operator on the ball vertex set only, re-indexed in BFS order.
Hamiltonian restrict_ball(const Hamiltonian& h, int root, int r);

// Vertices of B_r(root) in BFS order over the sparsity pattern.
std::vector<int> ball_vertices(const Hamiltonian& h, int root, int r);

// Depth-r truncation of the d-regular rooted tree in BFS order: the root has
// d children, every other internal vertex has d-1.
struct TreeBall {
    int d = 0;
    int r = 0;
    int n = 0;
    std::vector<int> parent;  // parent[0] = -1
    std::vector<int> depth;
    DisorderField disorder;
};

TreeBall make_tree_ball(int d, int r, uint64_t disorder_seed, long size_cap = 10'000'000);
Hamiltonian assemble(const TreeBall& tb, double t);
Hamiltonian build_tree_ball(int d, int r, uint64_t disorder_seed, double t,
                            long size_cap = 10'000'000);

// Matched operators on a graph ball and a tree ball. When the graph ball is
// a tree, both restricted Hamiltonians are equal as matrices under the BFS
// isomorphism (potentials copied from the tree field). Otherwise coupled is
// false and the graph side keeps independent disorder from fallback_seed.
struct CouplingResult {
    bool coupled = false;
    Hamiltonian graph_ball;
    Hamiltonian tree_ball;
};

CouplingResult couple_potentials(const RegularGraph& g, int root, const TreeBall& tree, double t,
                                 uint64_t fallback_seed);

// Whole-graph disorder matching the tree field inside B_r(root) when the
// ball is a tree; vertices outside the ball always draw from outside_seed.
DisorderField couple_graph_disorder(const RegularGraph& g, int root, const TreeBall& tree,
                                    uint64_t outside_seed, bool* coupled_out = nullptr);

// Truncation radius r_N = floor(log log N), floored at 1.
int coupling_radius(int n);

// Coordinate-format dump "i j value" plus a JSON sidecar string with
// {n, d, t, seed, host}.
void write_hamiltonian(std::ostream& out, const Hamiltonian& h);
std::string hamiltonian_sidecar(const Hamiltonian& h);

}  // namespace anderson
