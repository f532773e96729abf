#include "pushpull/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "pushpull/rng.hpp"

namespace pushpull {

Digraph::Digraph(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
    if (n_ == 0) throw std::invalid_argument("Digraph: need at least one node");
    for (const auto& e : edges_) {
        if (e.from >= n_ || e.to >= n_) throw std::invalid_argument("Digraph: edge endpoint out of range");
    }
    for (std::size_t i = 0; i < n_; ++i) edges_.push_back({i, i});
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
}

bool Digraph::has_edge(std::size_t from, std::size_t to) const {
    return std::binary_search(edges_.begin(), edges_.end(), Edge{from, to});
}

std::vector<std::size_t> Digraph::out_neighbors(std::size_t node) const {
    std::vector<std::size_t> out;
    auto lo = std::lower_bound(edges_.begin(), edges_.end(), Edge{node, 0});
    for (auto it = lo; it != edges_.end() && it->from == node; ++it) out.push_back(it->to);
    return out;
}

bool Digraph::is_symmetric() const {
    return std::all_of(edges_.begin(), edges_.end(), [&](const Edge& e) { return has_edge(e.to, e.from); });
}

std::string_view to_string(TopologyKind kind) {
    switch (kind) {
        case TopologyKind::Exponential: return "exponential";
        case TopologyKind::Ring: return "ring";
        case TopologyKind::Grid: return "grid";
        case TopologyKind::Random: return "random";
        case TopologyKind::Geometric: return "geometric";
        case TopologyKind::NearestNeighbor: return "nearest_neighbor";
    }
    return "unknown";
}

TopologyKind parse_topology_kind(std::string_view name) {
    for (auto k : {TopologyKind::Exponential, TopologyKind::Ring, TopologyKind::Grid, TopologyKind::Random,
                   TopologyKind::Geometric, TopologyKind::NearestNeighbor}) {
        if (name == to_string(k)) return k;
    }
    if (name == "nn" || name == "nearest-neighbor") return TopologyKind::NearestNeighbor;
    throw std::invalid_argument("unknown topology kind: " + std::string(name));
}

bool is_undirected(TopologyKind kind) {
    return kind == TopologyKind::Random || kind == TopologyKind::Geometric ||
           kind == TopologyKind::NearestNeighbor;
}

TopologySpec resolve_defaults(TopologySpec spec) {
    const std::size_t n = spec.n;
    if (n == 0) throw std::invalid_argument("topology: n must be >= 1");
    const double dn = static_cast<double>(n);
    auto& p = spec.params;
    switch (spec.kind) {
        case TopologyKind::Grid:
            if (p.grid_rows == 0 && p.grid_cols == 0) {
                std::size_t rows = 1;
                for (std::size_t r = 1; r * r <= n; ++r)
                    if (n % r == 0) rows = r;
                p.grid_rows = rows;
                p.grid_cols = n / rows;
            } else if (p.grid_rows == 0 && n % p.grid_cols == 0) {
                p.grid_rows = n / p.grid_cols;
            } else if (p.grid_cols == 0 && n % p.grid_rows == 0) {
                p.grid_cols = n / p.grid_rows;
            }
            if (p.grid_rows * p.grid_cols != n) {
                throw std::invalid_argument("grid: rows*cols must equal n");
            }
            break;
        case TopologyKind::Random:
            if (p.edge_prob == 0.0) p.edge_prob = n == 1 ? 1.0 : std::min(1.0, 2.0 * std::log(dn) / dn);
            if (!(p.edge_prob > 0.0 && p.edge_prob <= 1.0)) {
                throw std::invalid_argument("random: edge probability must lie in (0, 1]");
            }
            break;
        case TopologyKind::Geometric:
            if (p.radius == 0.0) p.radius = n == 1 ? 1.0 : std::sqrt(2.0 * std::log(dn) / dn);
            if (!(p.radius > 0.0)) throw std::invalid_argument("geometric: radius must be > 0");
            break;
        case TopologyKind::NearestNeighbor:
            if (n == 1) break;
            if (p.neighbors == 0) {
                const auto k = static_cast<std::size_t>(std::ceil(std::log2(dn))) + 1;
                p.neighbors = std::min(k, n - 1);
            }
            if (p.neighbors >= n) throw std::invalid_argument("nearest_neighbor: k must be < n");
            break;
        case TopologyKind::Exponential:
        case TopologyKind::Ring:
            break;
    }
    return spec;
}

namespace {

using Edges = std::vector<Digraph::Edge>;

Edges exponential_edges(std::size_t n) {
    Edges e;
    if (n == 1) return e;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t hop = 1; hop <= n - 1; hop *= 2) e.push_back({i, (i + hop) % n});
    return e;
}

Edges ring_edges(std::size_t n) {
    Edges e;
    for (std::size_t i = 0; i < n; ++i) e.push_back({i, (i + 1) % n});
    return e;
}

// Right/down lattice edges; the right edge of the last column continues to
// the first column of the next row and the last node closes onto node 0,
// so the row-major chain makes the lattice strongly connected.
Edges grid_edges(std::size_t rows, std::size_t cols) {
    const std::size_t n = rows * cols;
    Edges e;
    for (std::size_t i = 0; i < n; ++i) {
        e.push_back({i, (i + 1) % n});
        if (i / cols + 1 < rows) e.push_back({i, i + cols});
    }
    return e;
}

void add_undirected(Edges& e, std::size_t a, std::size_t b) {
    e.push_back({a, b});
    e.push_back({b, a});
}

Edges random_edges(std::size_t n, double p, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Edges e;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (u(rng) < p) add_undirected(e, i, j);
    return e;
}

std::vector<std::pair<double, double>> unit_square_points(std::size_t n, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::pair<double, double>> pts(n);
    for (auto& [x, y] : pts) {
        x = u(rng);
        y = u(rng);
    }
    return pts;
}

double dist(const std::pair<double, double>& a, const std::pair<double, double>& b) {
    return std::hypot(a.first - b.first, a.second - b.second);
}

Edges geometric_edges(std::size_t n, double r, Rng& rng) {
    const auto pts = unit_square_points(n, rng);
    Edges e;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (dist(pts[i], pts[j]) <= r) add_undirected(e, i, j);
    return e;
}

Edges nearest_neighbor_edges(std::size_t n, std::size_t k, Rng& rng) {
    const auto pts = unit_square_points(n, rng);
    Edges e;
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return dist(pts[i], pts[a]) < dist(pts[i], pts[b]);
        });
        std::size_t taken = 0;
        for (std::size_t j : order) {
            if (taken == k) break;
            if (j == i) continue;
            add_undirected(e, i, j);
            ++taken;
        }
    }
    return e;
}

} // namespace

Digraph build_topology(const TopologySpec& raw) {
    const TopologySpec spec = resolve_defaults(raw);
    const std::size_t n = spec.n;
    switch (spec.kind) {
        case TopologyKind::Exponential: return Digraph(n, exponential_edges(n));
        case TopologyKind::Ring: return Digraph(n, ring_edges(n));
        case TopologyKind::Grid: return Digraph(n, grid_edges(spec.params.grid_rows, spec.params.grid_cols));
        case TopologyKind::Random:
        case TopologyKind::Geometric:
        case TopologyKind::NearestNeighbor: break;
    }
    if (n == 1) return Digraph(1, {});
    for (int attempt = 0; attempt <= kConnectivityRetries; ++attempt) {
        Rng rng(spec.seed + static_cast<std::uint64_t>(attempt));
        Edges e;
        if (spec.kind == TopologyKind::Random) e = random_edges(n, spec.params.edge_prob, rng);
        else if (spec.kind == TopologyKind::Geometric) e = geometric_edges(n, spec.params.radius, rng);
        else e = nearest_neighbor_edges(n, spec.params.neighbors, rng);
        Digraph g(n, std::move(e));
        if (is_strongly_connected(g)) return g;
    }
    throw std::runtime_error("build_topology: " + std::string(to_string(spec.kind)) +
                             " graph not strongly connected after retry budget");
}

namespace {

std::size_t reach_count(std::size_t n, const std::vector<std::vector<std::size_t>>& adj) {
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        for (std::size_t v : adj[u]) {
            if (!seen[v]) {
                seen[v] = true;
                ++count;
                stack.push_back(v);
            }
        }
    }
    return count;
}

} // namespace

bool is_strongly_connected(const Digraph& g) {
    const std::size_t n = g.size();
    std::vector<std::vector<std::size_t>> fwd(n), rev(n);
    for (const auto& e : g.edges()) {
        fwd[e.from].push_back(e.to);
        rev[e.to].push_back(e.from);
    }
    return reach_count(n, fwd) == n && reach_count(n, rev) == n;
}

} // namespace pushpull
