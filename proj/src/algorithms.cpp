#include "pushpull/algorithms.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace pushpull {

std::string_view to_string(Algorithm algo) {
    switch (algo) {
        case Algorithm::PushPull: return "push_pull";
        case Algorithm::PushDiging: return "push_diging";
        case Algorithm::Frost: return "frost";
        case Algorithm::CentralizedSgd: return "centralized";
    }
    return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
    for (auto a : {Algorithm::PushPull, Algorithm::PushDiging, Algorithm::Frost, Algorithm::CentralizedSgd}) {
        if (name == to_string(a)) return a;
    }
    throw std::invalid_argument("unknown algorithm: " + std::string(name));
}

namespace {

constexpr double kUnderflowGuard = 1e-300;

void require_matrix(const std::shared_ptr<const StochasticMatrix>& m, Stochasticity kind, std::size_t n,
                    const char* what) {
    if (!m) throw std::invalid_argument(std::string("init_state: ") + what + " requires its mixing matrix");
    if (m->kind() != kind) throw std::invalid_argument(std::string("init_state: wrong stochasticity for ") + what);
    if (m->size() != n) throw std::invalid_argument("init_state: matrix size does not match shard count");
}

void require_algo(const AlgorithmState& s, Algorithm algo) {
    if (s.algo != algo) {
        throw std::invalid_argument("step_" + std::string(to_string(algo)) + ": state holds " +
                                    std::string(to_string(s.algo)));
    }
}

} // namespace

AlgorithmState init_state(Algorithm algo, std::shared_ptr<const StochasticMatrix> a,
                          std::shared_ptr<const StochasticMatrix> b, std::shared_ptr<const ShardSet> shards,
                          std::span<const double> x0, const RunOptions& opts) {
    if (!shards || shards->empty()) throw std::invalid_argument("init_state: no shards");
    if (!(opts.alpha > 0.0)) throw std::invalid_argument("init_state: alpha must be > 0");
    const std::size_t n = shards->size();
    if (x0.size() != shards->front().dim()) throw std::invalid_argument("init_state: x0 has wrong dimension");
    for (const auto& sh : *shards) {
        if (opts.batch > sh.samples()) throw std::invalid_argument("init_state: batch exceeds shard size");
    }
    switch (algo) {
        case Algorithm::PushPull:
            require_matrix(a, Stochasticity::Row, n, "push_pull");
            require_matrix(b, Stochasticity::Column, n, "push_pull");
            break;
        case Algorithm::PushDiging: require_matrix(b, Stochasticity::Column, n, "push_diging"); break;
        case Algorithm::Frost: require_matrix(a, Stochasticity::Row, n, "frost"); break;
        case Algorithm::CentralizedSgd: break;
    }

    AlgorithmState s;
    s.algo = algo;
    s.alpha = opts.alpha;
    s.batch = opts.batch;
    s.exec = opts.exec;
    s.a = std::move(a);
    s.b = std::move(b);
    s.shards = std::move(shards);
    s.x = Matrix::broadcast_rows(n, x0);
    s.node_rngs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) s.node_rngs.emplace_back(derive_seed(opts.seed, i));
    s.g_prev = sample_gradients(s);
    s.y = s.g_prev;
    if (algo == Algorithm::PushDiging) s.v.assign(n, 1.0);
    if (algo == Algorithm::Frost) {
        s.ddiag.assign(n, 1.0);
        s.a_power = Matrix::identity(n);
    }
    return s;
}

Matrix sample_gradients(AlgorithmState& s) {
    const ShardSet& shards = *s.shards;
    Matrix g(s.nodes(), s.dim());
    kernels::for_each_index(shards.size(), s.exec, [&](std::size_t i) {
        const Vector gi = s.batch == 0 ? local_gradient(shards[i], s.x.row(i))
                                       : local_gradient(shards[i], s.x.row(i), s.batch, s.node_rngs[i]);
        std::copy(gi.begin(), gi.end(), g.row(i).begin());
    });
    return g;
}

void step_push_pull(AlgorithmState& s) {
    require_algo(s, Algorithm::PushPull);
    Matrix x_next;
    kernels::mix_axpy(s.a->weights(), s.x, s.alpha, s.y, x_next, s.exec);
    s.x = std::move(x_next);
    Matrix g_next = sample_gradients(s);
    Matrix y_next;
    kernels::track(s.b->weights(), s.y, s.g_prev, g_next, y_next, s.exec);
    s.y = std::move(y_next);
    s.g_prev = std::move(g_next);
    ++s.t;
}

void step_push_diging(AlgorithmState& s) {
    require_algo(s, Algorithm::PushDiging);
    const Matrix& b = s.b->weights();
    const std::size_t n = s.nodes();
    const Vector v_next = right_multiply(b, s.v);
    for (double vi : v_next) {
        if (!(vi >= kUnderflowGuard)) throw std::runtime_error("step_push_diging: v underflow");
    }
    // X' = V_{t+1}^{-1} (B V_t X − α Y), i.e. A_t X − α V_{t+1}^{-1} Y with
    // A_t = V_{t+1}^{-1} B V_t applied through diagonal scalings.
    Matrix scaled = s.x;
    for (std::size_t i = 0; i < n; ++i)
        for (double& e : scaled.row(i)) e *= s.v[i];
    Matrix x_next;
    kernels::mix_axpy(b, scaled, s.alpha, s.y, x_next, s.exec);
    for (std::size_t i = 0; i < n; ++i)
        for (double& e : x_next.row(i)) e /= v_next[i];
    s.x = std::move(x_next);
    s.v = v_next;
    Matrix g_next = sample_gradients(s);
    Matrix y_next;
    kernels::track(b, s.y, s.g_prev, g_next, y_next, s.exec);
    s.y = std::move(y_next);
    s.g_prev = std::move(g_next);
    ++s.t;
}

void step_frost(AlgorithmState& s) {
    require_algo(s, Algorithm::Frost);
    const Matrix& a = s.a->weights();
    const std::size_t n = s.nodes();
    Matrix x_next;
    kernels::mix_axpy(a, s.x, s.alpha, s.y, x_next, s.exec);
    s.x = std::move(x_next);

    Matrix power_next;
    kernels::mix(a, s.a_power, power_next, s.exec);
    const Vector d_next = power_next.diagonal();
    for (double di : d_next) {
        if (!(di >= kUnderflowGuard)) throw std::runtime_error("step_frost: diag(A^t) underflow");
    }
    Matrix g_next = sample_gradients(s);

    // Y' = (A·Y − D_t^{-1} G_t) + D_{t+1}^{-1} G_{t+1}
    Matrix scaled_old = s.g_prev;
    Matrix scaled_new = g_next;
    for (std::size_t i = 0; i < n; ++i) {
        for (double& e : scaled_old.row(i)) e /= s.ddiag[i];
        for (double& e : scaled_new.row(i)) e /= d_next[i];
    }
    Matrix y_next;
    kernels::track(a, s.y, scaled_old, scaled_new, y_next, s.exec);
    s.y = std::move(y_next);
    s.g_prev = std::move(g_next);
    s.a_power = std::move(power_next);
    s.ddiag = d_next;
    ++s.t;
}

void step_centralized(AlgorithmState& s) {
    require_algo(s, Algorithm::CentralizedSgd);
    const std::size_t n = s.nodes();
    Vector mean = column_sums(s.g_prev);
    for (double& v : mean) v /= static_cast<double>(n);
    Vector x(s.x.row(0).begin(), s.x.row(0).end());
    for (std::size_t j = 0; j < x.size(); ++j) x[j] -= s.alpha * mean[j];
    s.x = Matrix::broadcast_rows(n, x);
    s.g_prev = sample_gradients(s);
    s.y = s.g_prev;
    ++s.t;
}

void step(AlgorithmState& s) {
    switch (s.algo) {
        case Algorithm::PushPull: step_push_pull(s); break;
        case Algorithm::PushDiging: step_push_diging(s); break;
        case Algorithm::Frost: step_frost(s); break;
        case Algorithm::CentralizedSgd: step_centralized(s); break;
    }
}

} // namespace pushpull
