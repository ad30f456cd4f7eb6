#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <sstream>

#include <json.hpp>

#include "anderson/hamiltonian.hpp"
#include "anderson/rng.hpp"

using namespace anderson;

namespace {

Eigen::MatrixXd dense(const Hamiltonian& h) { return Eigen::MatrixXd(h.matrix); }

double operator_norm(const Eigen::MatrixXd& m) {
    return m.selfadjointView<Eigen::Lower>().eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("disorder fields are reproducible standard normals") {
    const DisorderField a = sample_disorder(5000, 42);
    const DisorderField b = sample_disorder(5000, 42);
    CHECK(a.values == b.values);
    double mean = 0.0, var = 0.0;
    for (double v : a.values) mean += v;
    mean /= a.values.size();
    for (double v : a.values) var += (v - mean) * (v - mean);
    var /= a.values.size() - 1;
    CHECK(std::abs(mean) < 3.0 / std::sqrt(5000.0));
    CHECK(std::abs(var - 1.0) < 0.06);
}

TEST_CASE("assemble on a regular graph") {
    const RegularGraph g = sample_simple_regular(40, 3, 9);
    const DisorderField v = sample_disorder(40, 1);

    SUBCASE("t=0 gives the diagonal potential") {
        const Hamiltonian h = assemble(g, v, 0.0);
        const Eigen::MatrixXd m = dense(h);
        for (int i = 0; i < 40; ++i) CHECK(m(i, i) == v.values[i]);
        CHECK((m - Eigen::MatrixXd(m.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("exact symmetry and entry values") {
        const Hamiltonian h = assemble(g, v, 0.7);
        const Eigen::MatrixXd m = dense(h);
        CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);
        for (int u = 0; u < g.n; ++u)
            for (int w : g.neighbors[u]) CHECK(m(u, w) == -0.7);
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(assemble(g, sample_disorder(39, 1), 0.5), std::invalid_argument);
    }
}

TEST_CASE("assemble on a multigraph: loops add -2t to the diagonal") {
    Pairing p;
    p.n = 4;
    p.d = 3;
    p.matches = {{0, 1}, {2, 3}, {4, 5}, {6, 7}, {8, 9}, {10, 11}};  // loop at vertex 0
    const MultiGraph mg = pairing_to_multigraph(p);
    REQUIRE(mg.loop_count[0] == 1);
    DisorderField v;
    v.values = {1.0, 2.0, 3.0, 4.0};
    const Hamiltonian h = assemble(mg, v, 0.5);
    const Eigen::MatrixXd m = dense(h);
    CHECK(m(0, 0) == 1.0 - 2.0 * 0.5);
    CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("decouple") {
    const RegularGraph g = sample_simple_regular(60, 3, 5);
    const DisorderField v = sample_disorder(60, 2);
    const Hamiltonian h = assemble(g, v, 0.5);

    SUBCASE("r beyond the diameter changes nothing") {
        const Hamiltonian cut = decouple(h, 0, 60);
        CHECK((dense(cut) - dense(h)).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("r=0 isolates the root row and column") {
        const Hamiltonian cut = decouple(h, 7, 0);
        const Eigen::MatrixXd m = dense(cut);
        for (int j = 0; j < 60; ++j)
            if (j != 7) {
                CHECK(m(7, j) == 0.0);
                CHECK(m(j, 7) == 0.0);
            }
        CHECK(m(7, 7) == v.values[7]);
    }
    SUBCASE("cut norm is at most t*d") {
        for (uint64_t seed = 0; seed < 10; ++seed) {
            const RegularGraph gg = sample_simple_regular(50, 3, 100 + seed);
            const Hamiltonian hh = assemble(gg, sample_disorder(50, seed), 0.4);
            const Hamiltonian cut = decouple(hh, static_cast<int>(seed % 50), 2);
            CHECK(operator_norm(dense(hh) - dense(cut)) <= 0.4 * 3 + 1e-12);
        }
    }
    SUBCASE("idempotent at fixed root and radius") {
        const Hamiltonian once = decouple(h, 3, 2);
        const Hamiltonian twice = decouple(once, 3, 2);
        CHECK((dense(once) - dense(twice)).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("spectrum of the decoupling is the union of the block spectra") {
        const int root = 11, r = 2;
        const Hamiltonian cut = decouple(h, root, r);
        const auto inside = ball_vertices(h, root, r);
        std::vector<char> in_ball(h.n, 0);
        for (int u : inside) in_ball[u] = 1;
        std::vector<int> outside;
        for (int u = 0; u < h.n; ++u)
            if (!in_ball[u]) outside.push_back(u);

        const Hamiltonian ball_op = restrict_ball(h, root, r);
        const Eigen::MatrixXd full = dense(cut);
        Eigen::MatrixXd comp(outside.size(), outside.size());
        for (size_t a = 0; a < outside.size(); ++a)
            for (size_t b = 0; b < outside.size(); ++b) comp(a, b) = full(outside[a], outside[b]);

        Eigen::VectorXd all(h.n);
        all << Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(dense(ball_op)).eigenvalues(),
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(comp).eigenvalues();
        std::sort(all.data(), all.data() + all.size());
        const Eigen::VectorXd direct =
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(full).eigenvalues();
        CHECK((all - direct).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("restrict_ball") {
    const RegularGraph g = sample_simple_regular(80, 3, 6);
    const DisorderField v = sample_disorder(80, 3);
    const Hamiltonian h = assemble(g, v, 0.3);

    SUBCASE("r=0 is the 1x1 potential") {
        const Hamiltonian sub = restrict_ball(h, 5, 0);
        CHECK(sub.n == 1);
        CHECK(dense(sub)(0, 0) == v.values[5]);
    }
    SUBCASE("diagonal entries carry over") {
        const Hamiltonian sub = restrict_ball(h, 5, 2);
        const auto order = ball_vertices(h, 5, 2);
        REQUIRE(sub.n == static_cast<int>(order.size()));
        for (int k = 0; k < sub.n; ++k) CHECK(dense(sub)(k, k) == v.values[order[k]]);
    }
    SUBCASE("root resolvent of the restriction equals that of the decoupling") {
        const SpectralParameter z(0.2, 0.4);
        const Hamiltonian sub = restrict_ball(h, 5, 2);
        const Hamiltonian cut = decouple(h, 5, 2);
        Eigen::MatrixXcd a = dense(sub).cast<std::complex<double>>();
        a.diagonal().array() -= z.z();
        Eigen::MatrixXcd b = dense(cut).cast<std::complex<double>>();
        b.diagonal().array() -= z.z();
        const std::complex<double> g_sub = a.partialPivLu().inverse()(0, 0);
        const std::complex<double> g_cut = b.partialPivLu().inverse()(5, 5);
        CHECK(std::abs(g_sub - g_cut) < 1e-12);
    }
}

TEST_CASE("tree balls") {
    SUBCASE("r=0 is the bare root potential") {
        const Hamiltonian h = build_tree_ball(3, 0, 1, 0.5);
        CHECK(h.n == 1);
        CHECK(dense(h)(0, 0) == h.disorder.values[0]);
    }
    SUBCASE("r=1 d=3 couples the root to three leaves") {
        const Hamiltonian h = build_tree_ball(3, 1, 1, 0.5);
        REQUIRE(h.n == 4);
        const Eigen::MatrixXd m = dense(h);
        for (int leaf = 1; leaf < 4; ++leaf) {
            CHECK(m(0, leaf) == -0.5);
            CHECK(m(leaf, 0) == -0.5);
        }
        CHECK(m.block(1, 1, 3, 3).cwiseAbs().sum() ==
              std::abs(m(1, 1)) + std::abs(m(2, 2)) + std::abs(m(3, 3)));
    }
    SUBCASE("vertex counts follow 1 + d*sum (d-1)^k") {
        CHECK(make_tree_ball(3, 3, 0).n == 22);
        CHECK(make_tree_ball(3, 2, 0).n == 10);
        CHECK(make_tree_ball(20, 2, 0).n == 1 + 20 + 20 * 19);
    }
    SUBCASE("depth structure: root has d children, inner vertices d-1") {
        const TreeBall tb = make_tree_ball(4, 3, 7);
        std::vector<int> child_count(tb.n, 0);
        for (int u = 1; u < tb.n; ++u) ++child_count[tb.parent[u]];
        CHECK(child_count[0] == 4);
        for (int u = 1; u < tb.n; ++u) {
            if (tb.depth[u] < tb.r)
                CHECK(child_count[u] == 3);
            else
                CHECK(child_count[u] == 0);
        }
    }
    SUBCASE("size cap") {
        CHECK_THROWS_AS(make_tree_ball(20, 8, 0), std::length_error);
    }
}

TEST_CASE("potential coupling on tree-like balls") {
    // large sparse host so the radius-2 ball around vertex 0 is usually a tree
    const RegularGraph g = sample_simple_regular(4000, 3, 17);
    const TreeBall tree = make_tree_ball(3, 2, 99);
    REQUIRE_FALSE(has_cycle_in_ball(g, 0, 2));  // seed chosen to give a tree ball

    SUBCASE("coupled operators are equal as matrices") {
        const CouplingResult res = couple_potentials(g, 0, tree, 0.6, 1234);
        REQUIRE(res.coupled);
        REQUIRE(res.graph_ball.n == res.tree_ball.n);
        CHECK((dense(res.graph_ball) - dense(res.tree_ball)).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("root resolvents agree to machine precision") {
        const CouplingResult res = couple_potentials(g, 0, tree, 0.6, 1234);
        const SpectralParameter z(0.1, 0.3);
        auto root_entry = [&](const Hamiltonian& h) {
            Eigen::MatrixXcd a = dense(h).cast<std::complex<double>>();
            a.diagonal().array() -= z.z();
            return a.partialPivLu().inverse()(0, 0);
        };
        CHECK(std::abs(root_entry(res.graph_ball) - root_entry(res.tree_ball)) < 1e-14);
    }
    SUBCASE("whole-graph disorder matches the tree inside the ball only") {
        bool coupled = false;
        const DisorderField f = couple_graph_disorder(g, 0, tree, 555, &coupled);
        REQUIRE(coupled);
        const Ball b = ball(g, 0, 2);
        for (size_t k = 0; k < b.vertices.size(); ++k)
            CHECK(f.values[b.vertices[k]] == tree.disorder.values[k]);
        // outside values come from the fallback stream
        const DisorderField plain = sample_disorder(g.n, 555);
        std::vector<char> inside(g.n, 0);
        for (int u : b.vertices) inside[u] = 1;
        for (int u = 0; u < g.n; ++u)
            if (!inside[u]) CHECK(f.values[u] == plain.values[u]);
    }
    SUBCASE("a cyclic ball reports not-coupled and keeps independent disorder") {
        const RegularGraph k4 = sample_simple_regular(4, 3, 11);
        const TreeBall small = make_tree_ball(3, 1, 99);
        const CouplingResult res = couple_potentials(k4, 0, small, 0.6, 777);
        CHECK_FALSE(res.coupled);
        const DisorderField plain = sample_disorder(4, 777);
        const Ball b = ball(k4, 0, 1);
        for (int k = 0; k < 4; ++k)
            CHECK(res.graph_ball.disorder.values[k] == plain.values[b.vertices[k]]);
    }
    SUBCASE("degree mismatch is a shape error") {
        const TreeBall wrong = make_tree_ball(4, 2, 1);
        CHECK_THROWS_AS(couple_potentials(g, 0, wrong, 0.5, 1), std::invalid_argument);
    }
}

TEST_CASE("coupling radius r_N = floor(log log N) with floor 1") {
    CHECK(coupling_radius(4000) == 2);
    CHECK(coupling_radius(10) == 1);
    CHECK(coupling_radius(2) == 1);
    CHECK(coupling_radius(100000000) == 2);  // log log 1e8 = 2.91
}

TEST_CASE("hamiltonian dump and sidecar") {
    const RegularGraph g = sample_simple_regular(10, 3, 4);
    const Hamiltonian h = assemble(g, sample_disorder(10, 8), 0.25);
    std::ostringstream dump;
    write_hamiltonian(dump, h);
    CHECK(dump.str().find("-0.25") != std::string::npos);

    const auto meta = nlohmann::json::parse(hamiltonian_sidecar(h));
    CHECK(meta["n"] == 10);
    CHECK(meta["d"] == 3);
    CHECK(meta["t"] == 0.25);
    CHECK(meta["seed"] == 8);
    CHECK(meta["host"] == "regular");
}
