#include "anderson/graph.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "anderson/rng.hpp"

namespace anderson {

Pairing sample_pairing(int n, int d, uint64_t seed) {
    if (d < 3) throw std::invalid_argument("sample_pairing: d must be at least 3");
    if (n < d + 1) throw std::invalid_argument("sample_pairing: need n >= d+1");
    if ((static_cast<long>(n) * d) % 2 != 0)
        throw std::invalid_argument("sample_pairing: n*d must be even");

    const int total = n * d;
    std::vector<int> ids(total);
    std::iota(ids.begin(), ids.end(), 0);

    // Fisher-Yates shuffle, then pair consecutive entries. A uniform
    // permutation projects to a uniform perfect matching (each matching is
    // hit by the same number of permutations).
    Rng rng(seed);
    for (int i = total - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.below(static_cast<uint64_t>(i) + 1));
        std::swap(ids[i], ids[j]);
    }

    Pairing p;
    p.n = n;
    p.d = d;
    p.matches.reserve(total / 2);
    for (int k = 0; k < total; k += 2) {
        int a = ids[k], b = ids[k + 1];
        if (a > b) std::swap(a, b);
        p.matches.emplace_back(a, b);
    }
    return p;
}

MultiGraph pairing_to_multigraph(const Pairing& p) {
    MultiGraph g;
    g.n = p.n;
    g.d = p.d;
    g.loop_count.assign(p.n, 0);

    std::vector<std::map<int, int>> mult(p.n);
    for (const auto& [a, b] : p.matches) {
        const int u = a / p.d;
        const int v = b / p.d;
        if (u == v) {
            ++g.loop_count[u];
        } else {
            ++mult[u][v];
            ++mult[v][u];
        }
    }
    g.adjacency.resize(p.n);
    for (int u = 0; u < p.n; ++u)
        g.adjacency[u].assign(mult[u].begin(), mult[u].end());
    return g;
}

bool is_simple(const MultiGraph& g) {
    for (int u = 0; u < g.n; ++u) {
        if (g.loop_count[u] > 0) return false;
        for (const auto& [v, m] : g.adjacency[u])
            if (m != 1) return false;
    }
    return true;
}

RegularGraph sample_simple_regular(int n, int d, uint64_t seed, int max_attempts,
                                   int* attempts_out) {
    if (max_attempts < 1) throw std::invalid_argument("sample_simple_regular: max_attempts >= 1");
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        const Pairing p = sample_pairing(n, d, derive_seed(seed, STREAM_PAIRING, attempt));
        const MultiGraph mg = pairing_to_multigraph(p);
        if (!is_simple(mg)) continue;
        if (attempts_out) *attempts_out = attempt + 1;
        RegularGraph g;
        g.n = n;
        g.d = d;
        g.neighbors.resize(n);
        for (int u = 0; u < n; ++u) {
            g.neighbors[u].reserve(d);
            for (const auto& [v, m] : mg.adjacency[u]) g.neighbors[u].push_back(v);
        }
        return g;
    }
    throw std::runtime_error("sample_simple_regular: no simple pairing within attempt budget");
}

Pairing switch_pairs(const Pairing& p, int pair_i, int pair_j, SwitchMode mode) {
    const int m = static_cast<int>(p.matches.size());
    if (pair_i < 0 || pair_i >= m || pair_j < 0 || pair_j >= m)
        throw std::out_of_range("switch_pairs: pair index out of range");
    if (pair_i == pair_j) throw std::invalid_argument("switch_pairs: indices must differ");

    // Both modes are position swaps, so repeating one undoes it. Pair order
    // is never normalized; only the multiset of pairs carries meaning.
    Pairing q = p;
    if (mode == SwitchMode::cross) {
        std::swap(q.matches[pair_i].second, q.matches[pair_j].first);
    } else {
        std::swap(q.matches[pair_i].second, q.matches[pair_j].second);
    }
    return q;
}

Ball ball(const RegularGraph& g, int root, int r) {
    if (root < 0 || root >= g.n) throw std::out_of_range("ball: root out of range");
    if (r < 0) throw std::invalid_argument("ball: radius must be nonnegative");

    Ball b;
    std::vector<int> pos(g.n, -1);   // ball position, -1 = outside
    std::vector<int> parent(g.n, -1);
    b.vertices.push_back(root);
    b.depth.push_back(0);
    pos[root] = 0;

    // plain queue over the vertices vector: indices already in BFS order
    for (size_t head = 0; head < b.vertices.size(); ++head) {
        const int u = b.vertices[head];
        if (b.depth[head] == r) continue;
        for (int v : g.neighbors[u]) {
            if (pos[v] == -1) {
                pos[v] = static_cast<int>(b.vertices.size());
                parent[v] = u;
                b.vertices.push_back(v);
                b.depth.push_back(b.depth[head] + 1);
            }
        }
    }

    // induced adjacency and cycle flag: an edge to an already-known vertex
    // that is not the tree parent closes a cycle inside the ball
    b.induced.resize(b.vertices.size());
    for (size_t k = 0; k < b.vertices.size(); ++k) {
        const int u = b.vertices[k];
        for (int v : g.neighbors[u]) {
            if (pos[v] == -1) continue;
            b.induced[k].push_back(pos[v]);
            if (v != parent[u] && u != parent[v]) b.has_cycle = true;
        }
    }
    return b;
}

bool has_cycle_in_ball(const RegularGraph& g, int root, int r) {
    return ball(g, root, r).has_cycle;
}

long tree_ball_size(int d, int r) {
    long total = 1;
    long shell = d;
    for (int k = 1; k <= r; ++k) {
        total += shell;
        shell *= (d - 1);
    }
    return total;
}

void write_edge_list(std::ostream& out, const RegularGraph& g) {
    out << g.n << ' ' << g.d << '\n';
    for (int u = 0; u < g.n; ++u)
        for (int v : g.neighbors[u])
            if (u < v) out << u << ' ' << v << '\n';
}

RegularGraph read_edge_list(std::istream& in) {
    RegularGraph g;
    if (!(in >> g.n >> g.d)) throw std::runtime_error("read_edge_list: bad header");
    g.neighbors.resize(g.n);
    int u, v;
    while (in >> u >> v) {
        if (u < 0 || u >= g.n || v < 0 || v >= g.n || u == v)
            throw std::runtime_error("read_edge_list: bad edge");
        g.neighbors[u].push_back(v);
        g.neighbors[v].push_back(u);
    }
    for (auto& nb : g.neighbors) {
        std::sort(nb.begin(), nb.end());
        if (static_cast<int>(nb.size()) != g.d ||
            std::adjacent_find(nb.begin(), nb.end()) != nb.end())
            throw std::runtime_error("read_edge_list: graph is not simple d-regular");
    }
    return g;
}

}  // namespace anderson
