#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "pushpull/linalg.hpp"
#include "pushpull/topology.hpp"

namespace pushpull {

enum class Stochasticity { Row, Column };

std::string_view to_string(Stochasticity kind);

/// Nonnegative weight matrix that is row-stochastic (A, "pull") or
/// column-stochastic (B, "push"), with its Perron vector and limit matrix.
/// Immutable after construction.
class StochasticMatrix {
public:
    /// Validates stochasticity (1e-12) and computes π and the limit.
    StochasticMatrix(Matrix weights, Stochasticity kind);

    Stochasticity kind() const noexcept { return kind_; }
    std::size_t size() const noexcept { return w_.rows(); }
    const Matrix& weights() const noexcept { return w_; }
    const Vector& perron() const noexcept { return perron_; }
    /// A_∞ = 𝟙π_Aᵀ (row kind) or B_∞ = π_B𝟙ᵀ (column kind).
    const Matrix& limit() const noexcept { return limit_; }
    /// ‖πᵀA − πᵀ‖₂ or ‖Bπ − π‖₂.
    double perron_residual() const;

private:
    Stochasticity kind_;
    Matrix w_;
    Vector perron_;
    Matrix limit_;
};

/// Integer weights in {1..9} on every edge (j, i) of g, stored at w(i, j),
/// drawn row-major from mt19937_64(seed); then row or column normalized.
StochasticMatrix build_weight_matrix(const Digraph& g, Stochasticity kind, std::uint64_t seed);

struct PerronOptions {
    double tol = 1e-14;
    std::size_t max_iter = 1'000'000;
};

/// Power iteration on Aᵀ (row kind) or B (column kind) with ℓ₁
/// renormalization. Throws std::runtime_error if the residual does not
/// fall below 1e-10 within max_iter steps.
Vector perron_vector(const Matrix& w, Stochasticity kind, const PerronOptions& opts = {});

/// ‖Wᵗ − W_∞‖₂.
double matrix_power_deviation(const StochasticMatrix& w, std::size_t t);

/// Single-matrix connectivity metrics.
struct MatrixMetrics {
    double beta = 0.0;
    double kappa = 1.0;
    double M = 0.0;
    double s = 0.0;
    double decay_lambda = 0.0;
    /// ‖Wᵗ − W_∞‖₂ for t = 0.. until the term drops below the tolerance.
    Vector deviations;
    /// Start index of the tail used for decay_lambda.
    std::size_t tail_start = 0;
    /// Truncation cap reached before the tolerance; s is a partial sum.
    bool truncated = false;
};

struct MetricsOptions {
    double term_tol = 1e-12;
    std::size_t max_terms = 100'000;
};

MatrixMetrics matrix_metrics(const StochasticMatrix& w, const MetricsOptions& opts = {});

struct NetworkMetrics {
    double beta_A = 0.0, beta_B = 0.0;
    double kappa_A = 1.0, kappa_B = 1.0;
    double M_A = 0.0, M_B = 0.0;
    double s_A = 0.0, s_B = 0.0;
    double c = 1.0;
    double decay_lambda_A = 0.0, decay_lambda_B = 0.0;
    bool truncated_A = false, truncated_B = false;
};

/// β, κ, M, s for each matrix plus c = n·π_Aᵀπ_B.
NetworkMetrics compute_metrics(const StochasticMatrix& a, const StochasticMatrix& b,
                               const MetricsOptions& opts = {});

} // namespace pushpull
