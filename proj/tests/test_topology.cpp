#include <doctest.h>

#include <queue>

#include "support.hpp"

using namespace pushpull;
using namespace testing_support;

namespace {

// Brute-force oracle: BFS from every node must reach every node.
bool bfs_strongly_connected(const Digraph& g) {
    const std::size_t n = g.size();
    for (std::size_t s = 0; s < n; ++s) {
        std::vector<bool> seen(n, false);
        std::queue<std::size_t> q;
        q.push(s);
        seen[s] = true;
        while (!q.empty()) {
            const std::size_t u = q.front();
            q.pop();
            for (std::size_t v = 0; v < n; ++v) {
                if (!seen[v] && g.has_edge(u, v)) {
                    seen[v] = true;
                    q.push(v);
                }
            }
        }
        if (std::find(seen.begin(), seen.end(), false) != seen.end()) return false;
    }
    return true;
}

using E = Digraph::Edge;

}  // namespace

TEST_CASE("ring n=4") {
    const Digraph g = build_topology({TopologyKind::Ring, 4, {}, 0});
    const Digraph expect(4, {E{0, 1}, E{1, 2}, E{2, 3}, E{3, 0}});
    CHECK(g == expect);
    CHECK(g.edges().size() == 8);
}

TEST_CASE("exponential n=8, node 0") {
    const Digraph g = build_topology({TopologyKind::Exponential, 8, {}, 0});
    std::vector<std::size_t> expect;
    for (std::size_t j = 0; j < 3; ++j) expect.push_back((0 + (std::size_t{1} << j)) % 8);
    expect.push_back(0);
    std::sort(expect.begin(), expect.end());
    CHECK(g.out_neighbors(0) == expect);
    CHECK(g.out_degree(0) == 4);
}

TEST_CASE("random n=2, p=1 is complete") {
    TopologyParams p;
    p.edge_prob = 1.0;
    const Digraph g = build_topology({TopologyKind::Random, 2, p, 17});
    CHECK(g.edges().size() == 4);
    CHECK(g.is_symmetric());
}

TEST_CASE("grid layout") {
    TopologyParams p;
    p.grid_rows = 2;
    p.grid_cols = 3;
    const Digraph g = build_topology({TopologyKind::Grid, 6, p, 0});
    CHECK(g.has_edge(0, 3));
    CHECK(g.has_edge(2, 5));
    CHECK_FALSE(g.has_edge(3, 0));
    CHECK(g.has_edge(5, 0));
    p.grid_rows = 4;
    CHECK_THROWS_AS(build_topology({TopologyKind::Grid, 6, p, 0}), std::invalid_argument);
}

TEST_CASE("strong connectivity examples") {
    CHECK(is_strongly_connected(Digraph(3, {E{0, 1}, E{1, 0}, E{0, 2}, E{2, 0}, E{1, 2}, E{2, 1}})));
    CHECK_FALSE(is_strongly_connected(Digraph(2, {})));
    const Digraph ring5 = build_topology({TopologyKind::Ring, 5, {}, 0});
    CHECK(bfs_strongly_connected(ring5));
    CHECK(is_strongly_connected(ring5));
}

TEST_CASE("connectivity check agrees with BFS oracle on random digraphs") {
    Rng rng(1234);
    std::bernoulli_distribution coin(0.2);
    for (int rep = 0; rep < 300; ++rep) {
        const std::size_t n = 1 + rep % 9;
        std::vector<E> edges;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j && coin(rng)) edges.push_back({i, j});
        const Digraph g(n, edges);
        CHECK(is_strongly_connected(g) == bfs_strongly_connected(g));
    }
}

TEST_CASE("generated topologies satisfy the digraph invariants") {
    for (auto kind : kAllTopologies) {
        for (std::size_t n = 1; n <= 20; ++n) {
            for (std::uint64_t seed = 0; seed < 3; ++seed) {
                const Digraph g = build_topology({kind, n, {}, seed});
                CAPTURE(to_string(kind));
                CAPTURE(n);
                CHECK(g.size() == n);
                for (std::size_t i = 0; i < n; ++i) CHECK(g.has_edge(i, i));
                for (const auto& e : g.edges()) CHECK((e.from < n && e.to < n));
                CHECK(std::adjacent_find(g.edges().begin(), g.edges().end()) == g.edges().end());
                CHECK(bfs_strongly_connected(g));
                if (is_undirected(kind)) CHECK(g.is_symmetric());
            }
        }
    }
}

TEST_CASE("seeded generators are deterministic") {
    for (auto kind : {TopologyKind::Random, TopologyKind::Geometric, TopologyKind::NearestNeighbor}) {
        CHECK(build_topology({kind, 12, {}, 99}) == build_topology({kind, 12, {}, 99}));
    }
}

TEST_CASE("parameter validation") {
    TopologyParams p;
    p.edge_prob = 1.5;
    CHECK_THROWS_AS(build_topology({TopologyKind::Random, 4, p, 0}), std::invalid_argument);
    p = {};
    p.neighbors = 4;
    CHECK_THROWS_AS(build_topology({TopologyKind::NearestNeighbor, 4, p, 0}), std::invalid_argument);
    CHECK_THROWS_AS(build_topology({TopologyKind::Ring, 0, {}, 0}), std::invalid_argument);
    CHECK_THROWS_AS(Digraph(2, {E{0, 2}}), std::invalid_argument);
    CHECK_THROWS_AS(parse_topology_kind("torus"), std::invalid_argument);
    CHECK(parse_topology_kind("nn") == TopologyKind::NearestNeighbor);
}

TEST_CASE("random graph with tiny edge probability exhausts the retry budget") {
    TopologyParams p;
    p.edge_prob = 1e-9;
    CHECK_THROWS_AS(build_topology({TopologyKind::Random, 10, p, 0}), std::runtime_error);
}
