#include "pushpull/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "pushpull/rng.hpp"

namespace pushpull {

std::string_view to_string(Stochasticity kind) {
    return kind == Stochasticity::Row ? "row" : "column";
}

namespace {

constexpr double kSumTol = 1e-12;
constexpr double kPerronResidualTol = 1e-10;

Vector fixed_point_image(const Matrix& w, Stochasticity kind, const Vector& pi) {
    return kind == Stochasticity::Row ? left_multiply(pi, w) : right_multiply(w, pi);
}

double residual(const Matrix& w, Stochasticity kind, const Vector& pi) {
    Vector img = fixed_point_image(w, kind, pi);
    for (std::size_t k = 0; k < img.size(); ++k) img[k] -= pi[k];
    return norm2(img);
}

} // namespace

StochasticMatrix::StochasticMatrix(Matrix weights, Stochasticity kind) : kind_(kind), w_(std::move(weights)) {
    if (w_.rows() == 0 || w_.rows() != w_.cols()) throw std::invalid_argument("StochasticMatrix: must be square");
    for (double x : w_.data()) {
        if (!(x >= 0.0)) throw std::invalid_argument("StochasticMatrix: negative or NaN entry");
    }
    const Vector sums = kind_ == Stochasticity::Row ? row_sums(w_) : column_sums(w_);
    for (double s : sums) {
        if (std::abs(s - 1.0) > kSumTol) {
            throw std::invalid_argument("StochasticMatrix: " + std::string(to_string(kind_)) +
                                        " sums deviate from 1");
        }
    }
    perron_ = perron_vector(w_, kind_);
    const Vector ones(w_.rows(), 1.0);
    limit_ = kind_ == Stochasticity::Row ? Matrix::outer(ones, perron_) : Matrix::outer(perron_, ones);
}

double StochasticMatrix::perron_residual() const { return residual(w_, kind_, perron_); }

StochasticMatrix build_weight_matrix(const Digraph& g, Stochasticity kind, std::uint64_t seed) {
    const std::size_t n = g.size();
    Rng rng(seed);
    std::uniform_int_distribution<int> weight(1, 9);
    Matrix w(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (g.has_edge(j, i)) w(i, j) = weight(rng);
    if (kind == Stochasticity::Row) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (double x : w.row(i)) s += x;
            for (double& x : w.row(i)) x /= s;
        }
    } else {
        const Vector s = column_sums(w);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) w(i, j) /= s[j];
    }
    return StochasticMatrix(std::move(w), kind);
}

Vector perron_vector(const Matrix& w, Stochasticity kind, const PerronOptions& opts) {
    const std::size_t n = w.rows();
    Vector pi(n, 1.0 / static_cast<double>(n));
    for (std::size_t it = 0; it < opts.max_iter; ++it) {
        Vector next = fixed_point_image(w, kind, pi);
        const double mass = norm1(next);
        for (double& x : next) x /= mass;
        double change = 0.0;
        for (std::size_t k = 0; k < n; ++k) change = std::max(change, std::abs(next[k] - pi[k]));
        pi.swap(next);
        if (change <= opts.tol && residual(w, kind, pi) <= opts.tol) return pi;
        // Stagnation at rounding level is also a fixed point for our purposes.
        if (change == 0.0 && residual(w, kind, pi) <= kPerronResidualTol) return pi;
    }
    if (residual(w, kind, pi) <= kPerronResidualTol) return pi;
    throw std::runtime_error("perron_vector: power iteration did not converge (non-primitive matrix?)");
}

namespace {

// Wᵗ − W_∞ = (W − W_∞)ᵗ for t ≥ 1. Iterating the deviation itself keeps
// full relative precision where Wᵗ − W_∞ would cancel O(1) entries.
Matrix next_deviation(const StochasticMatrix& w, const Matrix& dev) { return (w.weights() - w.limit()) * dev; }

} // namespace

double matrix_power_deviation(const StochasticMatrix& w, std::size_t t) {
    Matrix dev = Matrix::identity(w.size()) - w.limit();
    for (std::size_t k = 0; k < t; ++k) dev = next_deviation(w, dev);
    return spectral_norm(dev);
}

namespace {

double weighted_spectral_gap(const StochasticMatrix& w) {
    const std::size_t n = w.size();
    Matrix d = w.weights() - w.limit();
    const Vector& pi = w.perron();
    // Row kind: Π^{1/2}(A − A_∞)Π^{-1/2}; column kind: Π^{-1/2}(B − B_∞)Π^{1/2}.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double scale = std::sqrt(pi[i] / pi[j]);
            d(i, j) *= w.kind() == Stochasticity::Row ? scale : 1.0 / scale;
        }
    return spectral_norm(d);
}

} // namespace

MatrixMetrics matrix_metrics(const StochasticMatrix& w, const MetricsOptions& opts) {
    MatrixMetrics m;
    const Vector& pi = w.perron();
    m.kappa = *std::max_element(pi.begin(), pi.end()) / *std::min_element(pi.begin(), pi.end());
    m.beta = weighted_spectral_gap(w);

    const Matrix step = w.weights() - w.limit();
    Matrix cur = Matrix::identity(w.size()) - w.limit();
    Vector warm;
    double sum = 0.0, sum_sq = 0.0;
    m.truncated = true;
    for (std::size_t t = 0; t < opts.max_terms; ++t) {
        const double term = spectral_norm(cur, &warm);
        if (term < opts.term_tol) {
            m.truncated = false;
            break;
        }
        m.deviations.push_back(term);
        sum += term;
        sum_sq += term * term;
        m.M = std::max(m.M, term);
        cur = step * cur;
    }
    m.s = std::max(sum, sum_sq);

    // Geometric rate over the last decade of the sequence: from the last
    // term that is still >= 10x the final term up to the final term.
    const auto& dev = m.deviations;
    if (dev.size() >= 2) {
        const std::size_t last = dev.size() - 1;
        std::size_t start = 0;
        for (std::size_t t = last; t-- > 0;) {
            if (dev[t] >= 10.0 * dev[last]) {
                start = t;
                break;
            }
        }
        m.tail_start = start;
        m.decay_lambda = std::pow(dev[last] / dev[start], 1.0 / static_cast<double>(last - start));
    } else {
        m.tail_start = 0;
        m.decay_lambda = 0.0;
    }
    return m;
}

NetworkMetrics compute_metrics(const StochasticMatrix& a, const StochasticMatrix& b, const MetricsOptions& opts) {
    if (a.kind() != Stochasticity::Row || b.kind() != Stochasticity::Column) {
        throw std::invalid_argument("compute_metrics: expects row-stochastic A and column-stochastic B");
    }
    if (a.size() != b.size()) throw std::invalid_argument("compute_metrics: size mismatch");
    const MatrixMetrics ma = matrix_metrics(a, opts);
    const MatrixMetrics mb = matrix_metrics(b, opts);
    NetworkMetrics out;
    out.beta_A = ma.beta;
    out.beta_B = mb.beta;
    out.kappa_A = ma.kappa;
    out.kappa_B = mb.kappa;
    out.M_A = ma.M;
    out.M_B = mb.M;
    out.s_A = ma.s;
    out.s_B = mb.s;
    out.decay_lambda_A = ma.decay_lambda;
    out.decay_lambda_B = mb.decay_lambda;
    out.truncated_A = ma.truncated;
    out.truncated_B = mb.truncated;
    out.c = static_cast<double>(a.size()) * dot(a.perron(), b.perron());
    return out;
}

} // namespace pushpull
