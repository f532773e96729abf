#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pushpull {

/// Directed communication graph. An edge (from, to) means node `from` sends
/// to node `to`. Every node carries a self-loop.
class Digraph {
public:
    struct Edge {
        std::size_t from;
        std::size_t to;
        friend auto operator<=>(const Edge&, const Edge&) = default;
    };

    /// Builds a graph on n nodes from `edges`; adds the self-loops, removes
    /// duplicates, rejects out-of-range endpoints.
    Digraph(std::size_t n, std::vector<Edge> edges);

    std::size_t size() const noexcept { return n_; }
    /// Sorted by (from, to), duplicate free.
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    bool has_edge(std::size_t from, std::size_t to) const;
    std::vector<std::size_t> out_neighbors(std::size_t node) const;
    std::size_t out_degree(std::size_t node) const { return out_neighbors(node).size(); }
    bool is_symmetric() const;

    friend bool operator==(const Digraph&, const Digraph&) = default;

private:
    std::size_t n_;
    std::vector<Edge> edges_;
};

enum class TopologyKind { Exponential, Ring, Grid, Random, Geometric, NearestNeighbor };

std::string_view to_string(TopologyKind kind);
TopologyKind parse_topology_kind(std::string_view name);
bool is_undirected(TopologyKind kind);

/// Kind-specific parameters. Zero means "use the default for n".
struct TopologyParams {
    std::size_t grid_rows = 0;
    std::size_t grid_cols = 0;
    double edge_prob = 0.0;
    double radius = 0.0;
    std::size_t neighbors = 0;
};

struct TopologySpec {
    TopologyKind kind = TopologyKind::Exponential;
    std::size_t n = 1;
    TopologyParams params;
    std::uint64_t seed = 0;
};

/// Retry budget for the random undirected generators (seed+1, ..., seed+100).
inline constexpr int kConnectivityRetries = 100;

/// Fills zero-valued parameters with their defaults for spec.n and checks
/// the result. Throws std::invalid_argument on inconsistent parameters.
TopologySpec resolve_defaults(TopologySpec spec);

/// Throws std::invalid_argument for bad parameters and std::runtime_error if
/// no strongly connected draw is found within the retry budget.
Digraph build_topology(const TopologySpec& spec);

bool is_strongly_connected(const Digraph& g);

} // namespace pushpull
