#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "pushpull/algorithms.hpp"
#include "pushpull/linalg.hpp"
#include "pushpull/mixing.hpp"

namespace pushpull {

/// Per-iteration diagnostics; serialized as one CSV row (n is carried in
/// memory only, the CSV file name records it).
struct TraceRecord {
    std::size_t n = 0;
    std::size_t trial = 0;
    std::size_t t = 0;
    double grad_metric = 0.0;
    double eps_norm = 0.0;
    double consensus_x = 0.0;
    double delta_y_norm = 0.0;
    double mass_residual = 0.0;
    double loss_mean = 0.0;

    friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

/// x̂ = Xᵀπ.
Vector weighted_average(std::span<const double> pi, const Matrix& x);

/// ε = −α π_Aᵀ(I − B_∞)Y.
Vector error_term(double alpha, std::span<const double> pi_a, const Matrix& b_inf, const Matrix& y);

/// Frost: ε = α n⁻¹(𝟙ᵀ − π_AᵀD_t⁻¹)𝐠.
Vector frost_error_term(double alpha, std::span<const double> pi_a, std::span<const double> ddiag,
                        const Matrix& g);

/// (I − W_∞)·M.
Matrix deviation_from_limit(const Matrix& limit, const Matrix& m);

/// ‖x̂⁽ᵗ⁺¹⁾ − (x̂⁽ᵗ⁾ − cα ḡ⁽ᵗ⁾ + ε⁽ᵗ⁾)‖ / (‖x̂⁽ᵗ⁾‖ + α‖Y⁽ᵗ⁾‖_F) for one
/// Push-Pull step, from the state before and after the step.
double push_pull_step_residual(const AlgorithmState& before, const AlgorithmState& after);

/// ‖n⁻¹v_{t+1}ᵀX′ − (n⁻¹v_tᵀX − α n⁻¹𝟙ᵀY)‖ / (‖X‖_F + α‖Y‖_F) for one
/// Push-DiGing step.
double push_diging_alignment_residual(const AlgorithmState& before, const AlgorithmState& after);

/// ‖𝟙ᵀY − 𝟙ᵀG‖ / ‖G‖_F (absolute when G = 0). For Frost the conserved
/// quantity is π_AᵀY = π_AᵀD_t⁻¹G.
double mass_residual(const AlgorithmState& s);

/// Fills every TraceRecord field except grad_metric and loss_mean.
TraceRecord state_diagnostics(const AlgorithmState& s);

/// Residual of the m-step telescoping identity for one block starting at k:
///   Σ_{i<m} Δ_y⁽ᵏ⁺ⁱ⁾ = (Σ_{j<m}(Bʲ − B_∞))Δ_y⁽ᵏ⁾ + Σ_{j=1}^{m−1}(B^{m−j−1} − B_∞)(𝐠⁽ᵏ⁺ʲ⁾ − 𝐠⁽ᵏ⁾)
/// Returns ‖lhs − rhs‖_F / max(1, ‖lhs‖_F). Throws if g_block.size() < m.
double check_telescoping(const StochasticMatrix& b, const Matrix& delta_y_k, std::span<const Matrix> g_block,
                         const Matrix& delta_y_sum, std::size_t m);

/// Online checker fed every Push-Pull state; closes a block each m steps.
class TelescopingMonitor {
public:
    TelescopingMonitor(std::shared_ptr<const StochasticMatrix> b, std::size_t m);

    /// Call with the state at t = 0, 1, 2, ... in order.
    void observe(const AlgorithmState& s);

    std::size_t block_length() const noexcept { return m_; }
    std::size_t blocks() const noexcept { return residuals_.size(); }
    const std::vector<double>& residuals() const noexcept { return residuals_; }
    double max_residual() const noexcept;

private:
    std::shared_ptr<const StochasticMatrix> b_;
    std::size_t m_;
    /// (Bʲ − B_∞) for j = 0..m−1, with B⁰ − B_∞ = I − B_∞.
    std::vector<Matrix> powers_;
    Matrix delta_k_;
    Matrix delta_sum_;
    std::vector<Matrix> g_block_;
    std::vector<double> residuals_;
};

/// lhs = Σ_{k≤T} ‖Σ_{i≤k}(A^{k−i} − A_∞)Δ⁽ⁱ⁾‖_F², rhs = s²·Σ‖Δ⁽ⁱ⁾‖_F²
/// with s the rolling-sum metric of w.
std::pair<double, double> check_rolling_sum(const StochasticMatrix& w, std::span<const Matrix> deltas);
/// Same with a precomputed s.
std::pair<double, double> check_rolling_sum(const StochasticMatrix& w, double s, std::span<const Matrix> deltas);

/// Geometric mean of the final ⌈tail_frac·len⌉ entries.
double plateau_estimate(std::span<const double> series, double tail_frac);
/// Geometric mean over the window [begin_frac, end_frac) of the series.
double window_estimate(std::span<const double> series, double begin_frac, double end_frac);

} // namespace pushpull
