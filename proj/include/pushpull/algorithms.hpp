#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "pushpull/kernels.hpp"
#include "pushpull/linalg.hpp"
#include "pushpull/mixing.hpp"
#include "pushpull/objective.hpp"
#include "pushpull/rng.hpp"

namespace pushpull {

enum class Algorithm { PushPull, PushDiging, Frost, CentralizedSgd };

std::string_view to_string(Algorithm algo);
/// Accepts the config names push_pull, push_diging, frost, centralized.
Algorithm parse_algorithm(std::string_view name);

using ShardSet = std::vector<NodeShard>;

/// Iterate state of one run. Owned by exactly one run; step() mutates it.
struct AlgorithmState {
    Algorithm algo = Algorithm::PushPull;
    std::size_t t = 0;
    /// n × d iterates; for CentralizedSgd every row holds the shared iterate.
    Matrix x;
    /// n × d tracker (unused for CentralizedSgd).
    Matrix y;
    /// Last sampled stochastic gradients 𝐠⁽ᵗ⁾, row i at x_i.
    Matrix g_prev;
    /// Push-DiGing: v_t = Bᵗ𝟙.
    Vector v;
    /// Frost: diag(Aᵗ) and the running power Aᵗ it is read from.
    Vector ddiag;
    Matrix a_power;
    double alpha = 0.0;
    /// Minibatch size; 0 means full-shard gradients.
    std::size_t batch = 0;
    /// One independent generator per node.
    std::vector<Rng> node_rngs;

    std::shared_ptr<const StochasticMatrix> a;
    std::shared_ptr<const StochasticMatrix> b;
    std::shared_ptr<const ShardSet> shards;
    kernels::Exec exec = kernels::Exec::Parallel;

    std::size_t nodes() const noexcept { return x.rows(); }
    std::size_t dim() const noexcept { return x.cols(); }
};

struct RunOptions {
    double alpha = 0.005;
    std::size_t batch = 8;
    std::uint64_t seed = 0;
    kernels::Exec exec = kernels::Exec::Parallel;
};

/// X = 𝟙x0ᵀ, one gradient sample per node at x0, Y = G_prev = 𝐠⁽⁰⁾,
/// v = 𝟙 (Push-DiGing), diag(A⁰) = 𝟙 (Frost). Matrices a and b may be null
/// when the algorithm does not use them.
AlgorithmState init_state(Algorithm algo, std::shared_ptr<const StochasticMatrix> a,
                          std::shared_ptr<const StochasticMatrix> b, std::shared_ptr<const ShardSet> shards,
                          std::span<const double> x0, const RunOptions& opts);

/// Samples 𝐠 at the current X using the per-node streams.
Matrix sample_gradients(AlgorithmState& s);

void step_push_pull(AlgorithmState& s);
void step_push_diging(AlgorithmState& s);
void step_frost(AlgorithmState& s);
void step_centralized(AlgorithmState& s);
/// Dispatches on s.algo.
void step(AlgorithmState& s);

} // namespace pushpull
