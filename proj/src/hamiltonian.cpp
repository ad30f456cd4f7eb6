#include "anderson/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "anderson/rng.hpp"

namespace anderson {

SpectralParameter::SpectralParameter(double energy, double eta_) : E(energy), eta(eta_) {
    if (!(eta > 0.0)) throw std::invalid_argument("SpectralParameter: eta must be positive");
}

DisorderField sample_disorder(int n, uint64_t seed) {
    DisorderField f;
    f.seed = seed;
    f.values.resize(n);
    Rng rng(derive_seed(seed, STREAM_DISORDER, 0));
    for (double& v : f.values) v = rng.normal();
    return f;
}

namespace {

Hamiltonian from_triplets(int n, int d, double t, std::vector<Eigen::Triplet<double>> trips,
                          DisorderField disorder, std::string host) {
    Hamiltonian h;
    h.n = n;
    h.d = d;
    h.t = t;
    h.disorder = std::move(disorder);
    h.host = std::move(host);
    h.matrix.resize(n, n);
    h.matrix.setFromTriplets(trips.begin(), trips.end());
    h.matrix.makeCompressed();
    return h;
}

}  // namespace

Hamiltonian assemble(const RegularGraph& g, const DisorderField& v, double t) {
    if (static_cast<int>(v.values.size()) != g.n)
        throw std::invalid_argument("assemble: disorder length does not match vertex count");
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(g.n) * (g.d + 1));
    for (int u = 0; u < g.n; ++u) {
        trips.emplace_back(u, u, v.values[u]);
        for (int w : g.neighbors[u]) trips.emplace_back(u, w, -t);
    }
    return from_triplets(g.n, g.d, t, std::move(trips), v, "regular");
}

Hamiltonian assemble(const MultiGraph& g, const DisorderField& v, double t) {
    if (static_cast<int>(v.values.size()) != g.n)
        throw std::invalid_argument("assemble: disorder length does not match vertex count");
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(g.n) * (g.d + 1));
    for (int u = 0; u < g.n; ++u) {
        // a loop contributes 2 to the adjacency diagonal, hence -2t per loop
        trips.emplace_back(u, u, v.values[u] - 2.0 * t * g.loop_count[u]);
        for (const auto& [w, mult] : g.adjacency[u]) trips.emplace_back(u, w, -t * mult);
    }
    return from_triplets(g.n, g.d, t, std::move(trips), v, "multigraph");
}

std::vector<std::vector<int>> Hamiltonian::adjacency() const {
    std::vector<std::vector<int>> adj(n);
    for (int k = 0; k < matrix.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(matrix, k); it; ++it)
            if (it.row() != it.col() && it.value() != 0.0)
                adj[it.col()].push_back(static_cast<int>(it.row()));
    return adj;
}

std::vector<int> ball_vertices(const Hamiltonian& h, int root, int r) {
    if (root < 0 || root >= h.n) throw std::out_of_range("ball_vertices: root out of range");
    const auto adj = h.adjacency();
    std::vector<int> order, dist(h.n, -1);
    order.push_back(root);
    dist[root] = 0;
    for (size_t head = 0; head < order.size(); ++head) {
        const int u = order[head];
        if (dist[u] == r) continue;
        for (int w : adj[u]) {
            if (dist[w] == -1) {
                dist[w] = dist[u] + 1;
                order.push_back(w);
            }
        }
    }
    return order;
}

Hamiltonian decouple(const Hamiltonian& h, int root, int r) {
    const auto in_order = ball_vertices(h, root, r);
    std::vector<char> inside(h.n, 0);
    for (int v : in_order) inside[v] = 1;

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(h.matrix.nonZeros());
    for (int k = 0; k < h.matrix.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(h.matrix, k); it; ++it) {
            const int i = static_cast<int>(it.row());
            const int j = static_cast<int>(it.col());
            if (i != j && inside[i] != inside[j]) continue;  // cut edge
            trips.emplace_back(i, j, it.value());
        }
    return from_triplets(h.n, h.d, h.t, std::move(trips), h.disorder, h.host + " decoupled");
}

Hamiltonian restrict_ball(const Hamiltonian& h, int root, int r) {
    const auto order = ball_vertices(h, root, r);
    std::vector<int> pos(h.n, -1);
    for (size_t k = 0; k < order.size(); ++k) pos[order[k]] = static_cast<int>(k);

    std::vector<Eigen::Triplet<double>> trips;
    for (int k = 0; k < h.matrix.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(h.matrix, k); it; ++it) {
            const int i = pos[it.row()];
            const int j = pos[it.col()];
            if (i == -1 || j == -1) continue;
            trips.emplace_back(i, j, it.value());
        }
    DisorderField sub;
    sub.seed = h.disorder.seed;
    sub.values.reserve(order.size());
    for (int v : order) sub.values.push_back(h.disorder.values[v]);
    return from_triplets(static_cast<int>(order.size()), h.d, h.t, std::move(trips),
                         std::move(sub), h.host + " ball");
}

TreeBall make_tree_ball(int d, int r, uint64_t disorder_seed, long size_cap) {
    if (d < 3) throw std::invalid_argument("make_tree_ball: d must be at least 3");
    if (r < 0) throw std::invalid_argument("make_tree_ball: r must be nonnegative");
    const long size = tree_ball_size(d, r);
    if (size > size_cap) throw std::length_error("make_tree_ball: vertex count exceeds cap");

    TreeBall tb;
    tb.d = d;
    tb.r = r;
    tb.n = static_cast<int>(size);
    tb.parent.assign(tb.n, -1);
    tb.depth.assign(tb.n, 0);
    int next = 1;
    for (int u = 0; u < tb.n && next < tb.n; ++u) {
        const int children = (u == 0) ? d : d - 1;
        if (tb.depth[u] == r) continue;
        for (int c = 0; c < children; ++c) {
            tb.parent[next] = u;
            tb.depth[next] = tb.depth[u] + 1;
            ++next;
        }
    }
    tb.disorder = sample_disorder(tb.n, disorder_seed);
    return tb;
}

Hamiltonian assemble(const TreeBall& tb, double t) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(tb.n) * 3);
    for (int u = 0; u < tb.n; ++u) {
        trips.emplace_back(u, u, tb.disorder.values[u]);
        if (tb.parent[u] >= 0) {
            trips.emplace_back(u, tb.parent[u], -t);
            trips.emplace_back(tb.parent[u], u, -t);
        }
    }
    return from_triplets(tb.n, tb.d, t, std::move(trips), tb.disorder, "tree");
}

Hamiltonian build_tree_ball(int d, int r, uint64_t disorder_seed, double t, long size_cap) {
    return assemble(make_tree_ball(d, r, disorder_seed, size_cap), t);
}

DisorderField couple_graph_disorder(const RegularGraph& g, int root, const TreeBall& tree,
                                    uint64_t outside_seed, bool* coupled_out) {
    const Ball b = ball(g, root, tree.r);
    DisorderField f = sample_disorder(g.n, outside_seed);
    const bool coupled = !b.has_cycle;
    if (coupled) {
        if (static_cast<int>(b.vertices.size()) != tree.n)
            throw std::invalid_argument("couple_graph_disorder: tree-like ball has wrong size");
        // BFS position k on the graph ball corresponds to tree vertex k
        for (size_t k = 0; k < b.vertices.size(); ++k)
            f.values[b.vertices[k]] = tree.disorder.values[k];
    }
    if (coupled_out) *coupled_out = coupled;
    return f;
}

CouplingResult couple_potentials(const RegularGraph& g, int root, const TreeBall& tree, double t,
                                 uint64_t fallback_seed) {
    if (g.d != tree.d) throw std::invalid_argument("couple_potentials: degree mismatch");
    CouplingResult res;
    DisorderField f = couple_graph_disorder(g, root, tree, fallback_seed, &res.coupled);
    res.graph_ball = restrict_ball(assemble(g, f, t), root, tree.r);
    res.tree_ball = assemble(tree, t);
    return res;
}

int coupling_radius(int n) {
    if (n < 3) return 1;
    const double ll = std::log(std::log(static_cast<double>(n)));
    return std::max(1, static_cast<int>(std::floor(ll)));
}

void write_hamiltonian(std::ostream& out, const Hamiltonian& h) {
    out.precision(17);
    for (int k = 0; k < h.matrix.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(h.matrix, k); it; ++it)
            out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

std::string hamiltonian_sidecar(const Hamiltonian& h) {
    nlohmann::json j;
    j["n"] = h.n;
    j["d"] = h.d;
    j["t"] = h.t;
    j["seed"] = h.disorder.seed;
    j["host"] = h.host;
    return j.dump(2);
}

}  // namespace anderson
