#include "pushpull/objective.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace pushpull {

namespace {

void require_dim(const NodeShard& shard, std::span<const double> x) {
    if (x.size() != shard.dim()) {
        throw std::invalid_argument("objective: x has dimension " + std::to_string(x.size()) +
                                    ", shard expects " + std::to_string(shard.dim()));
    }
}

double regularizer(std::span<const double> x, double rho) {
    double r = 0.0;
    for (double v : x) r += v * v / (1.0 + v * v);
    return rho * r;
}

void add_regularizer_gradient(std::span<const double> x, double rho, std::span<double> g) {
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double q = 1.0 + x[j] * x[j];
        g[j] += rho * 2.0 * x[j] / (q * q);
    }
}

// Accumulates −y σ(−y hᵀx) h into g for one sample and returns the margin.
inline double accumulate_logistic(std::span<const double> h, double y, std::span<const double> x,
                                  std::span<double> g) {
    const double margin = y * dot(h, x);
    const double weight = -y * sigmoid(-margin);
    for (std::size_t j = 0; j < g.size(); ++j) g[j] += weight * h[j];
    return margin;
}

} // namespace

double softplus(double u) {
    if (u > 30.0) return u + std::log1p(std::exp(-u));
    return std::log1p(std::exp(u));
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

namespace {

// Features then labels, continuing the generator state left by x_opt draws.
void draw_features_and_labels(SyntheticDataset& ds, std::size_t samples, Rng& rng) {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    ds.features = Matrix(samples, ds.x_opt.size());
    for (double& h : ds.features.data()) h = normal(rng);
    ds.labels.resize(samples);
    for (std::size_t l = 0; l < samples; ++l) {
        // 1/z > 1 + exp(−hᵀx_opt)  ⟺  z < σ(hᵀx_opt)
        const double z = uniform(rng);
        ds.labels[l] = z < sigmoid(dot(ds.features.row(l), ds.x_opt)) ? 1.0 : -1.0;
    }
}

void check_synthesis_args(std::size_t samples, std::size_t dim, double rho) {
    if (samples == 0 || dim == 0) throw std::invalid_argument("synthesize: need L_total >= 1 and d >= 1");
    if (!(rho >= 0.0)) throw std::invalid_argument("synthesize: rho must be >= 0");
}

} // namespace

SyntheticDataset synthesize(std::size_t samples, std::size_t dim, std::uint64_t seed, double rho) {
    check_synthesis_args(samples, dim, rho);
    Rng rng(seed);
    std::normal_distribution<double> normal;
    SyntheticDataset ds;
    ds.seed = seed;
    ds.rho = rho;
    ds.x_opt.resize(dim);
    for (double& v : ds.x_opt) v = normal(rng);
    draw_features_and_labels(ds, samples, rng);
    return ds;
}

SyntheticDataset synthesize_with_optimum(std::size_t samples, std::span<const double> x_opt,
                                         std::uint64_t seed, double rho) {
    check_synthesis_args(samples, x_opt.size(), rho);
    Rng rng(seed);
    SyntheticDataset ds;
    ds.seed = seed;
    ds.rho = rho;
    ds.x_opt.assign(x_opt.begin(), x_opt.end());
    draw_features_and_labels(ds, samples, rng);
    return ds;
}

std::vector<NodeShard> partition(const SyntheticDataset& ds, std::size_t n) {
    if (n == 0 || ds.samples() % n != 0) {
        throw std::invalid_argument("partition: L_total = " + std::to_string(ds.samples()) +
                                    " is not divisible by n = " + std::to_string(n));
    }
    const std::size_t m = ds.samples() / n;
    std::vector<NodeShard> shards(n);
    for (std::size_t i = 0; i < n; ++i) {
        NodeShard& s = shards[i];
        s.node_id = i;
        s.rho = ds.rho;
        s.features = Matrix(m, ds.dim());
        s.labels.assign(ds.labels.begin() + static_cast<std::ptrdiff_t>(i * m),
                        ds.labels.begin() + static_cast<std::ptrdiff_t>((i + 1) * m));
        for (std::size_t r = 0; r < m; ++r) {
            auto src = ds.features.row(i * m + r);
            std::copy(src.begin(), src.end(), s.features.row(r).begin());
        }
    }
    return shards;
}

double local_loss(const NodeShard& shard, std::span<const double> x) {
    require_dim(shard, x);
    double sum = 0.0;
    for (std::size_t l = 0; l < shard.samples(); ++l) {
        sum += softplus(-shard.labels[l] * dot(shard.features.row(l), x));
    }
    return sum / static_cast<double>(shard.samples()) + regularizer(x, shard.rho);
}

LossAndGradient local_loss_and_gradient(const NodeShard& shard, std::span<const double> x) {
    require_dim(shard, x);
    LossAndGradient out;
    out.gradient.assign(shard.dim(), 0.0);
    double sum = 0.0;
    for (std::size_t l = 0; l < shard.samples(); ++l) {
        sum += softplus(-accumulate_logistic(shard.features.row(l), shard.labels[l], x, out.gradient));
    }
    const double inv = 1.0 / static_cast<double>(shard.samples());
    for (double& g : out.gradient) g *= inv;
    add_regularizer_gradient(x, shard.rho, out.gradient);
    out.loss = sum * inv + regularizer(x, shard.rho);
    return out;
}

Vector local_gradient(const NodeShard& shard, std::span<const double> x) {
    require_dim(shard, x);
    Vector g(shard.dim(), 0.0);
    for (std::size_t l = 0; l < shard.samples(); ++l) {
        accumulate_logistic(shard.features.row(l), shard.labels[l], x, g);
    }
    const double inv = 1.0 / static_cast<double>(shard.samples());
    for (double& v : g) v *= inv;
    add_regularizer_gradient(x, shard.rho, g);
    return g;
}

Vector local_gradient(const NodeShard& shard, std::span<const double> x, std::size_t batch, Rng& rng) {
    require_dim(shard, x);
    if (batch == 0 || batch > shard.samples()) {
        throw std::invalid_argument("local_gradient: batch size " + std::to_string(batch) +
                                    " outside [1, " + std::to_string(shard.samples()) + "]");
    }
    std::vector<std::size_t> population(shard.samples());
    std::iota(population.begin(), population.end(), std::size_t{0});
    std::vector<std::size_t> picked(batch);
    std::sample(population.begin(), population.end(), picked.begin(), batch, rng);
    Vector g(shard.dim(), 0.0);
    for (std::size_t l : picked) accumulate_logistic(shard.features.row(l), shard.labels[l], x, g);
    const double inv = 1.0 / static_cast<double>(batch);
    for (double& v : g) v *= inv;
    add_regularizer_gradient(x, shard.rho, g);
    return g;
}

namespace {

void require_rows(std::span<const NodeShard> shards, const Matrix& x) {
    if (shards.empty() || x.rows() != shards.size() || x.cols() != shards.front().dim()) {
        throw std::invalid_argument("global metric: X must have one row per shard and d columns");
    }
}

} // namespace

Matrix stacked_full_gradient(std::span<const NodeShard> shards, const Matrix& x, kernels::Exec exec) {
    require_rows(shards, x);
    Matrix g(x.rows(), x.cols());
    kernels::for_each_index(shards.size(), exec, [&](std::size_t i) {
        const Vector gi = local_gradient(shards[i], x.row(i));
        std::copy(gi.begin(), gi.end(), g.row(i).begin());
    });
    return g;
}

double global_gradient_metric(std::span<const NodeShard> shards, const Matrix& x, kernels::Exec exec) {
    const Matrix g = stacked_full_gradient(shards, x, exec);
    Vector mean = column_sums(g);
    for (double& v : mean) v /= static_cast<double>(shards.size());
    return norm2(mean);
}

GlobalEvaluation evaluate_global(std::span<const NodeShard> shards, const Matrix& x, kernels::Exec exec) {
    require_rows(shards, x);
    const std::size_t n = shards.size();
    Matrix g(n, x.cols());
    Vector losses(n);
    kernels::for_each_index(n, exec, [&](std::size_t i) {
        LossAndGradient lg = local_loss_and_gradient(shards[i], x.row(i));
        losses[i] = lg.loss;
        std::copy(lg.gradient.begin(), lg.gradient.end(), g.row(i).begin());
    });
    // Node reductions stay serial so both policies sum in the same order.
    Vector mean = column_sums(g);
    for (double& v : mean) v /= static_cast<double>(n);
    GlobalEvaluation out;
    out.grad_metric = norm2(mean);
    out.loss_mean = std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(n);
    return out;
}

Matrix perturbed_local_points(const SyntheticDataset& ds, std::size_t n, double sigma_h, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, sigma_h);
    Matrix pts(n, ds.dim());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < ds.dim(); ++j) pts(i, j) = ds.x_opt[j] + normal(rng);
    return pts;
}

namespace {

struct Model {
    double value;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
};

Model global_model(std::span<const NodeShard> shards, const Eigen::VectorXd& x) {
    const std::size_t d = static_cast<std::size_t>(x.size());
    const double n = static_cast<double>(shards.size());
    Model m{0.0, Eigen::VectorXd::Zero(x.size()), Eigen::MatrixXd::Zero(x.size(), x.size())};
    const std::span<const double> xs(x.data(), d);
    for (const NodeShard& s : shards) {
        const double inv = 1.0 / (static_cast<double>(s.samples()) * n);
        for (std::size_t l = 0; l < s.samples(); ++l) {
            auto h = s.features.row(l);
            const double margin = s.labels[l] * dot(h, xs);
            const double p = sigmoid(-margin);
            const Eigen::Map<const Eigen::VectorXd> hv(h.data(), x.size());
            m.value += softplus(-margin) * inv;
            m.grad += (-s.labels[l] * p * inv) * hv;
            m.hess += (p * (1.0 - p) * inv) * hv * hv.transpose();
        }
    }
    const double rho = shards.front().rho;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double v = x[j];
        const double q = 1.0 + v * v;
        m.value += rho * v * v / q;
        m.grad[j] += rho * 2.0 * v / (q * q);
        m.hess(j, j) += rho * (2.0 - 6.0 * v * v) / (q * q * q);
    }
    return m;
}

} // namespace

Vector stationary_point(std::span<const NodeShard> shards, std::span<const double> start, double tol) {
    if (shards.empty() || start.size() != shards.front().dim()) {
        throw std::invalid_argument("stationary_point: start has wrong dimension");
    }
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(start.data(), static_cast<Eigen::Index>(start.size()));
    Model m = global_model(shards, x);
    for (int it = 0; it < 200 && m.grad.norm() > tol; ++it) {
        Eigen::VectorXd dir;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(m.hess);
        if (ldlt.info() == Eigen::Success && ldlt.isPositive()) dir = -ldlt.solve(m.grad);
        else dir = -m.grad;
        // Backtrack on the gradient norm; near the solution the full step wins.
        double step = 1.0;
        Model trial = global_model(shards, x + dir);
        while (trial.grad.norm() >= m.grad.norm() && step > 1e-8) {
            step *= 0.5;
            trial = global_model(shards, x + step * dir);
        }
        if (trial.grad.norm() >= m.grad.norm()) break;
        x += step * dir;
        m = std::move(trial);
    }
    if (!(m.grad.norm() <= tol * 1e3)) {
        throw std::runtime_error("stationary_point: Newton did not converge, |grad| = " +
                                 std::to_string(m.grad.norm()));
    }
    return Vector(x.data(), x.data() + x.size());
}

} // namespace pushpull
