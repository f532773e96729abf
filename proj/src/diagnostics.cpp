#include "pushpull/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pushpull {

Vector weighted_average(std::span<const double> pi, const Matrix& x) { return left_multiply(pi, x); }

Matrix deviation_from_limit(const Matrix& limit, const Matrix& m) { return m - limit * m; }

Vector error_term(double alpha, std::span<const double> pi_a, const Matrix& b_inf, const Matrix& y) {
    Vector eps = left_multiply(pi_a, deviation_from_limit(b_inf, y));
    for (double& e : eps) e *= -alpha;
    return eps;
}

Vector frost_error_term(double alpha, std::span<const double> pi_a, std::span<const double> ddiag, const Matrix& g) {
    const std::size_t n = g.rows();
    Vector weights(n);
    for (std::size_t i = 0; i < n; ++i) weights[i] = 1.0 - pi_a[i] / ddiag[i];
    Vector eps = left_multiply(weights, g);
    for (double& e : eps) e *= alpha / static_cast<double>(n);
    return eps;
}

namespace {

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : num; }

Vector consensus_weights(const AlgorithmState& s) {
    const std::size_t n = s.nodes();
    switch (s.algo) {
        case Algorithm::PushPull:
        case Algorithm::Frost: return s.a->perron();
        case Algorithm::PushDiging: {
            Vector w = s.v;
            for (double& e : w) e /= static_cast<double>(n);
            return w;
        }
        case Algorithm::CentralizedSgd: break;
    }
    return Vector(n, 1.0 / static_cast<double>(n));
}

} // namespace

double mass_residual(const AlgorithmState& s) {
    if (s.algo == Algorithm::CentralizedSgd) return 0.0;
    Vector lhs, rhs;
    if (s.algo == Algorithm::Frost) {
        const Vector& pi = s.a->perron();
        lhs = left_multiply(pi, s.y);
        Vector scaled(pi.size());
        for (std::size_t i = 0; i < pi.size(); ++i) scaled[i] = pi[i] / s.ddiag[i];
        rhs = left_multiply(scaled, s.g_prev);
    } else {
        lhs = column_sums(s.y);
        rhs = column_sums(s.g_prev);
    }
    for (std::size_t j = 0; j < lhs.size(); ++j) lhs[j] -= rhs[j];
    return safe_ratio(norm2(lhs), frobenius_norm(s.g_prev));
}

TraceRecord state_diagnostics(const AlgorithmState& s) {
    TraceRecord r;
    r.n = s.nodes();
    r.t = s.t;
    const Vector xhat = weighted_average(consensus_weights(s), s.x);
    r.consensus_x = frobenius_norm(s.x - Matrix::broadcast_rows(s.nodes(), xhat));
    r.mass_residual = mass_residual(s);
    switch (s.algo) {
        case Algorithm::PushPull: {
            const Matrix dy = deviation_from_limit(s.b->limit(), s.y);
            r.delta_y_norm = frobenius_norm(dy);
            Vector eps = left_multiply(s.a->perron(), dy);
            r.eps_norm = s.alpha * norm2(eps);
            break;
        }
        case Algorithm::PushDiging:
            r.delta_y_norm = frobenius_norm(deviation_from_limit(s.b->limit(), s.y));
            break;
        case Algorithm::Frost:
            r.delta_y_norm = frobenius_norm(deviation_from_limit(s.a->limit(), s.y));
            r.eps_norm = norm2(frost_error_term(s.alpha, s.a->perron(), s.ddiag, s.g_prev));
            break;
        case Algorithm::CentralizedSgd: break;
    }
    return r;
}

double push_pull_step_residual(const AlgorithmState& before, const AlgorithmState& after) {
    if (before.algo != Algorithm::PushPull || after.t != before.t + 1) {
        throw std::invalid_argument("push_pull_step_residual: expects consecutive Push-Pull states");
    }
    const Vector& pi_a = before.a->perron();
    const double n = static_cast<double>(before.nodes());
    const double c = n * dot(pi_a, before.b->perron());
    const Vector xhat = weighted_average(pi_a, before.x);
    const Vector xhat_next = weighted_average(pi_a, after.x);
    Vector gbar = column_sums(before.g_prev);
    const Vector eps = error_term(before.alpha, pi_a, before.b->limit(), before.y);
    Vector diff(xhat.size());
    for (std::size_t j = 0; j < diff.size(); ++j) {
        gbar[j] /= n;
        diff[j] = xhat_next[j] - (xhat[j] - c * before.alpha * gbar[j] + eps[j]);
    }
    return safe_ratio(norm2(diff), norm2(xhat) + before.alpha * frobenius_norm(before.y));
}

double push_diging_alignment_residual(const AlgorithmState& before, const AlgorithmState& after) {
    if (before.algo != Algorithm::PushDiging || after.t != before.t + 1) {
        throw std::invalid_argument("push_diging_alignment_residual: expects consecutive Push-DiGing states");
    }
    const double n = static_cast<double>(before.nodes());
    const Vector lhs = left_multiply(after.v, after.x);
    const Vector prev = left_multiply(before.v, before.x);
    const Vector mass = column_sums(before.y);
    Vector diff(lhs.size());
    for (std::size_t j = 0; j < diff.size(); ++j) {
        diff[j] = lhs[j] / n - (prev[j] / n - before.alpha * mass[j] / n);
    }
    return safe_ratio(norm2(diff), frobenius_norm(before.x) + before.alpha * frobenius_norm(before.y));
}

namespace {

std::vector<Matrix> deviation_powers(const StochasticMatrix& w, std::size_t count) {
    std::vector<Matrix> out;
    out.reserve(count);
    Matrix p = Matrix::identity(w.size());
    for (std::size_t j = 0; j < count; ++j) {
        out.push_back(p - w.limit());
        p = w.weights() * p;
    }
    return out;
}

double telescoping_residual(std::span<const Matrix> powers, const Matrix& delta_y_k,
                            std::span<const Matrix> g_block, const Matrix& delta_y_sum, std::size_t m) {
    Matrix rhs(delta_y_k.rows(), delta_y_k.cols());
    for (std::size_t j = 0; j < m; ++j) rhs += powers[j] * delta_y_k;
    for (std::size_t j = 1; j < m; ++j) rhs += powers[m - j - 1] * (g_block[j] - g_block[0]);
    return frobenius_norm(delta_y_sum - rhs) / std::max(1.0, frobenius_norm(delta_y_sum));
}

} // namespace

double check_telescoping(const StochasticMatrix& b, const Matrix& delta_y_k, std::span<const Matrix> g_block,
                         const Matrix& delta_y_sum, std::size_t m) {
    if (m == 0 || g_block.size() < m) throw std::invalid_argument("check_telescoping: block shorter than m");
    const auto powers = deviation_powers(b, m);
    return telescoping_residual(powers, delta_y_k, g_block, delta_y_sum, m);
}

TelescopingMonitor::TelescopingMonitor(std::shared_ptr<const StochasticMatrix> b, std::size_t m)
    : b_(std::move(b)), m_(m) {
    if (!b_ || m_ == 0) throw std::invalid_argument("TelescopingMonitor: need B and m >= 1");
    powers_ = deviation_powers(*b_, m_);
}

void TelescopingMonitor::observe(const AlgorithmState& s) {
    const Matrix dy = deviation_from_limit(b_->limit(), s.y);
    if (s.t % m_ == 0) {
        delta_k_ = dy;
        delta_sum_ = dy;
        g_block_.assign(1, s.g_prev);
    } else {
        if (g_block_.empty()) return;  // joined mid-block
        delta_sum_ += dy;
        g_block_.push_back(s.g_prev);
    }
    if (g_block_.size() == m_) {
        residuals_.push_back(telescoping_residual(powers_, delta_k_, g_block_, delta_sum_, m_));
        g_block_.clear();
    }
}

double TelescopingMonitor::max_residual() const noexcept {
    return residuals_.empty() ? 0.0 : *std::max_element(residuals_.begin(), residuals_.end());
}

std::pair<double, double> check_rolling_sum(const StochasticMatrix& w, std::span<const Matrix> deltas) {
    return check_rolling_sum(w, matrix_metrics(w).s, deltas);
}

std::pair<double, double> check_rolling_sum(const StochasticMatrix& w, double s, std::span<const Matrix> deltas) {
    if (deltas.empty()) return {0.0, 0.0};
    const auto powers = deviation_powers(w, deltas.size());
    double lhs = 0.0, energy = 0.0;
    for (std::size_t k = 0; k < deltas.size(); ++k) {
        Matrix acc(deltas[k].rows(), deltas[k].cols());
        for (std::size_t i = 0; i <= k; ++i) acc += powers[k - i] * deltas[i];
        const double f = frobenius_norm(acc);
        lhs += f * f;
        const double e = frobenius_norm(deltas[k]);
        energy += e * e;
    }
    return {lhs, s * s * energy};
}

namespace {

double geometric_mean(std::span<const double> values) {
    double acc = 0.0;
    for (double v : values) acc += std::log(v);
    return std::exp(acc / static_cast<double>(values.size()));
}

} // namespace

double plateau_estimate(std::span<const double> series, double tail_frac) {
    if (!(tail_frac > 0.0 && tail_frac <= 1.0)) throw std::invalid_argument("plateau_estimate: tail_frac in (0, 1]");
    if (series.empty()) throw std::invalid_argument("plateau_estimate: empty series");
    const auto count = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil(tail_frac * static_cast<double>(series.size()) - 1e-9)), 1,
        series.size());
    return geometric_mean(series.subspan(series.size() - count));
}

double window_estimate(std::span<const double> series, double begin_frac, double end_frac) {
    const auto len = static_cast<double>(series.size());
    const auto b = static_cast<std::size_t>(std::floor(begin_frac * len));
    const auto e = std::min(series.size(), static_cast<std::size_t>(std::floor(end_frac * len)));
    if (!(begin_frac >= 0.0 && begin_frac < end_frac && end_frac <= 1.0) || e <= b) {
        throw std::invalid_argument("window_estimate: empty window");
    }
    return geometric_mean(series.subspan(b, e - b));
}

} // namespace pushpull
