#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pushpull/kernels.hpp"
#include "pushpull/linalg.hpp"
#include "pushpull/rng.hpp"

namespace pushpull {

/// Synthetic logistic-regression data: standard normal features, labels in
/// {−1, +1} drawn from the logistic model around x_opt.
struct SyntheticDataset {
    Matrix features;       // L_total × d
    Vector labels;         // ±1
    Vector x_opt;
    double rho = 0.0;
    std::uint64_t seed = 0;

    std::size_t samples() const noexcept { return features.rows(); }
    std::size_t dim() const noexcept { return features.cols(); }
};

struct NodeShard {
    std::size_t node_id = 0;
    Matrix features;       // M × d, contiguous rows of the parent dataset
    Vector labels;
    double rho = 0.0;

    std::size_t samples() const noexcept { return features.rows(); }
    std::size_t dim() const noexcept { return features.cols(); }
};

/// Draw order from one mt19937_64(seed): x_opt (d normals), H row-major
/// (L·d normals), then one uniform z per row; y = +1 iff z < σ(hᵀx_opt).
SyntheticDataset synthesize(std::size_t samples, std::size_t dim, std::uint64_t seed, double rho);
/// Same as synthesize but with a caller-provided x_opt (no x_opt draws).
SyntheticDataset synthesize_with_optimum(std::size_t samples, std::span<const double> x_opt,
                                         std::uint64_t seed, double rho);

/// Contiguous row blocks of equal size. Throws if n does not divide L_total.
std::vector<NodeShard> partition(const SyntheticDataset& ds, std::size_t n);

double softplus(double u);
double sigmoid(double z);

/// (1/M)Σ ln(1 + exp(−y hᵀx)) + ρ Σ x_j²/(1 + x_j²).
double local_loss(const NodeShard& shard, std::span<const double> x);

/// Full-shard gradient ∇f_i(x).
Vector local_gradient(const NodeShard& shard, std::span<const double> x);
/// Minibatch gradient over `batch` rows sampled uniformly without
/// replacement using `rng`. Throws if batch is 0 or exceeds the shard size.
Vector local_gradient(const NodeShard& shard, std::span<const double> x, std::size_t batch, Rng& rng);

struct LossAndGradient {
    double loss = 0.0;
    Vector gradient;
};
/// Loss and full gradient in one pass over the shard.
LossAndGradient local_loss_and_gradient(const NodeShard& shard, std::span<const double> x);

/// Row i = ∇f_i(x_i), evaluated over nodes under the given policy.
Matrix stacked_full_gradient(std::span<const NodeShard> shards, const Matrix& x,
                             kernels::Exec exec = kernels::Exec::Parallel);

/// ‖(1/n) Σ_i ∇f_i(x_i)‖₂. Throws on shape mismatch.
double global_gradient_metric(std::span<const NodeShard> shards, const Matrix& x,
                              kernels::Exec exec = kernels::Exec::Parallel);

struct GlobalEvaluation {
    double grad_metric = 0.0;
    double loss_mean = 0.0;
};
/// grad_metric and (1/n)Σ f_i(x_i) together.
GlobalEvaluation evaluate_global(std::span<const NodeShard> shards, const Matrix& x,
                                 kernels::Exec exec = kernels::Exec::Parallel);

/// x_opt + N(0, σ_h² I) per node, drawn from mt19937_64(seed). n × d.
Matrix perturbed_local_points(const SyntheticDataset& ds, std::size_t n, double sigma_h, std::uint64_t seed);

/// Stationary point of f = (1/n)Σ f_i by damped Newton from `start`.
/// Returns the best iterate found; throws if its gradient norm exceeds
/// `tol`·1e3.
Vector stationary_point(std::span<const NodeShard> shards, std::span<const double> start, double tol = 1e-12);

} // namespace pushpull
