#include <doctest.h>

#include "support.hpp"

using namespace pushpull;
using namespace testing_support;

namespace {

struct Net {
    std::shared_ptr<const StochasticMatrix> a, b;
};

Net make_net(TopologyKind kind, std::size_t n, std::uint64_t seed) {
    const Digraph g = build_topology({kind, n, {}, seed});
    return {std::make_shared<const StochasticMatrix>(build_weight_matrix(g, Stochasticity::Row, seed + 10)),
            std::make_shared<const StochasticMatrix>(build_weight_matrix(g, Stochasticity::Column, seed + 20))};
}

AlgorithmState run_state(Algorithm algo, const Net& net, std::size_t n, std::uint64_t seed) {
    const auto ds = synthesize(16 * n, 4, seed, 0.01);
    auto shards = std::make_shared<const ShardSet>(partition(ds, n));
    return init_state(algo, net.a, net.b, shards, ds.x_opt, {0.05, 4, seed});
}

}  // namespace

TEST_CASE("weighted average examples") {
    const Matrix same = Matrix::broadcast_rows(3, Vector{1.5, -2.0});
    CHECK(weighted_average(Vector{0.2, 0.3, 0.5}, same)[0] == doctest::Approx(1.5));
    const Matrix x{{1, 2}, {3, 4}, {5, 9}};
    const Vector u = weighted_average(Vector(3, 1.0 / 3), x);
    CHECK(u[0] == doctest::Approx(3.0));
    CHECK(u[1] == doctest::Approx(5.0));
    const Vector h = weighted_average(Vector{1.0 / 3, 2.0 / 3}, Matrix{{3, 0}, {0, 3}});
    CHECK(h[0] == doctest::Approx(1.0));
    CHECK(h[1] == doctest::Approx(2.0));
}

TEST_CASE("error term vanishes on the consensus subspace") {
    const Net net = make_net(TopologyKind::Ring, 5, 3);
    const Vector& pa = net.a->perron();
    CHECK(norm2(error_term(0.1, pa, net.b->limit(), Matrix(5, 3))) == 0.0);
    const Matrix y = Matrix::outer(net.b->perron(), Vector{1.0, -4.0, 2.5});
    CHECK(norm2(error_term(0.1, pa, net.b->limit(), y)) < 1e-15);

    // Against π_Aᵀ(I − π_B𝟙ᵀ)Y built from Eigen.
    Rng rng(2);
    const Matrix r = random_matrix(5, 3, rng);
    Eigen::VectorXd pae(5), pbe(5);
    for (int i = 0; i < 5; ++i) {
        pae(i) = pa[i];
        pbe(i) = net.b->perron()[i];
    }
    const Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(5, 5) - pbe * Eigen::RowVectorXd::Ones(5);
    const Eigen::RowVectorXd ref = -0.1 * pae.transpose() * proj * to_eigen(r);
    const Vector eps = error_term(0.1, pa, net.b->limit(), r);
    for (int j = 0; j < 3; ++j) CHECK(eps[j] == doctest::Approx(ref(j)).epsilon(1e-12));
}

TEST_CASE("step residual and mass conservation along Push-Pull runs") {
    for (auto kind : kAllTopologies) {
        const Net net = make_net(kind, 8, 4);
        AlgorithmState s = run_state(Algorithm::PushPull, net, 8, 6);
        double worst = 0.0, mass = mass_residual(s);
        for (int t = 0; t < 300; ++t) {
            AlgorithmState before = s;
            step(s);
            worst = std::max(worst, push_pull_step_residual(before, s));
            mass = std::max(mass, mass_residual(s));
        }
        CAPTURE(to_string(kind));
        CHECK(worst < 1e-12);
        CHECK(mass < 1e-12);
    }
}

TEST_CASE("Push-DiGing alignment identity") {
    for (auto kind : kAllTopologies) {
        const Net net = make_net(kind, 4, 7);
        AlgorithmState s = run_state(Algorithm::PushDiging, net, 4, 8);
        double worst = 0.0;
        for (int t = 0; t < 300; ++t) {
            AlgorithmState before = s;
            step(s);
            worst = std::max(worst, push_diging_alignment_residual(before, s));
            CHECK(mass_residual(s) < 1e-12);
        }
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("FROST error term and weighted mass") {
    const Net net = make_net(TopologyKind::Grid, 6, 2);
    AlgorithmState s = run_state(Algorithm::Frost, net, 6, 3);
    for (int t = 0; t < 100; ++t) {
        step(s);
        CHECK(mass_residual(s) < 1e-12);
    }
    const TraceRecord r = state_diagnostics(s);
    const Vector eps = frost_error_term(s.alpha, net.a->perron(), s.ddiag, s.g_prev);
    CHECK(r.eps_norm == doctest::Approx(norm2(eps)));
    // D_t = diag(π_A) leaves only the α n⁻¹(𝟙ᵀ − 𝟙ᵀ)·g = 0 term.
    CHECK(norm2(frost_error_term(0.1, net.a->perron(), net.a->perron(), s.g_prev)) < 1e-15);
}

TEST_CASE("identity checks reject mismatched states") {
    const Net net = make_net(TopologyKind::Ring, 3, 1);
    AlgorithmState s = run_state(Algorithm::PushPull, net, 3, 1);
    CHECK_THROWS_AS(push_pull_step_residual(s, s), std::invalid_argument);
    CHECK_THROWS_AS(push_diging_alignment_residual(s, s), std::invalid_argument);
}

TEST_CASE("telescoping identity: m = 1 and offline blocks") {
    const Net net = make_net(TopologyKind::Exponential, 6, 5);
    Rng rng(1);
    const Matrix dy = deviation_from_limit(net.b->limit(), random_matrix(6, 3, rng));
    const Matrix g0 = random_matrix(6, 3, rng);
    CHECK(check_telescoping(*net.b, dy, std::span<const Matrix>(&g0, 1), dy, 1) < 1e-15);
    CHECK_THROWS_AS(check_telescoping(*net.b, dy, std::span<const Matrix>(&g0, 1), dy, 2), std::invalid_argument);

    // Independent recursion: Δ_y⁽ᵏ⁺¹⁾ = BΔ_y⁽ᵏ⁾ + (I − B_∞)(g⁽ᵏ⁺¹⁾ − g⁽ᵏ⁾), summed over the block.
    const Matrix proj = Matrix::identity(6) - net.b->limit();
    for (std::size_t m : {2u, 5u, 16u}) {
        std::vector<Matrix> g;
        for (std::size_t j = 0; j < m; ++j) g.push_back(random_matrix(6, 3, rng));
        Matrix d = dy, sum = dy;
        for (std::size_t j = 1; j < m; ++j) {
            d = net.b->weights() * d + proj * (g[j] - g[j - 1]);
            sum += d;
        }
        CHECK(check_telescoping(*net.b, dy, g, sum, m) < 1e-12);
        sum(0, 0) += 1.0;
        CHECK(check_telescoping(*net.b, dy, g, sum, m) > 1e-3);
    }
}

TEST_CASE("telescoping monitor on a live run") {
    const Net net = make_net(TopologyKind::Ring, 8, 9);
    AlgorithmState s = run_state(Algorithm::PushPull, net, 8, 9);
    std::vector<TelescopingMonitor> mons;
    for (std::size_t m : {1u, 2u, 8u, 16u}) mons.emplace_back(net.b, m);
    for (auto& mon : mons) mon.observe(s);
    for (int t = 0; t < 320; ++t) {
        step(s);
        for (auto& mon : mons) mon.observe(s);
    }
    CHECK(mons[0].blocks() == 321);
    CHECK(mons[1].blocks() == 160);
    CHECK(mons[2].blocks() == 40);
    CHECK(mons[3].blocks() == 20);
    for (const auto& mon : mons) CHECK(mon.max_residual() < 1e-12);
}

TEST_CASE("rolling-sum inequality") {
    const Net net = make_net(TopologyKind::Geometric, 7, 3);
    CHECK(check_rolling_sum(*net.a, std::vector<Matrix>(4, Matrix(7, 2))) == std::pair<double, double>{0.0, 0.0});
    Rng rng(6);
    const Matrix d0 = random_matrix(7, 2, rng);
    const auto [lhs0, rhs0] = check_rolling_sum(*net.a, std::span<const Matrix>(&d0, 1));
    const double p = frobenius_norm(deviation_from_limit(net.a->limit(), d0));
    CHECK(lhs0 == doctest::Approx(p * p));
    CHECK(lhs0 <= rhs0);
    const double s = matrix_metrics(*net.a).s;
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<Matrix> deltas;
        for (int k = 0; k <= 10; ++k) deltas.push_back(random_matrix(7, 2, rng));
        const auto [lhs, rhs] = check_rolling_sum(*net.a, s, deltas);
        CHECK(lhs <= rhs);
    }
}

TEST_CASE("plateau and window estimates") {
    CHECK(plateau_estimate(Vector(10, 3.0), 0.2) == doctest::Approx(3.0));
    CHECK(plateau_estimate(Vector{100, 1, 1, 1, 1}, 0.4) == doctest::Approx(1.0));
    CHECK(plateau_estimate(Vector{1, 4}, 1.0) == doctest::Approx(2.0));
    CHECK(window_estimate(Vector{8, 2, 2, 8, 8}, 0.2, 0.6) == doctest::Approx(2.0));
    CHECK_THROWS_AS(plateau_estimate(Vector{}, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(plateau_estimate(Vector{1.0}, 0.0), std::invalid_argument);
}

TEST_CASE("state diagnostics fields") {
    const Net net = make_net(TopologyKind::Ring, 4, 1);
    AlgorithmState s = run_state(Algorithm::PushPull, net, 4, 2);
    const TraceRecord r0 = state_diagnostics(s);
    CHECK(r0.consensus_x < 1e-15);
    CHECK(r0.t == 0);
    step(s);
    const TraceRecord r1 = state_diagnostics(s);
    CHECK(r1.t == 1);
    CHECK(r1.consensus_x > 0.0);
    CHECK(r1.eps_norm == doctest::Approx(norm2(error_term(s.alpha, net.a->perron(), net.b->limit(), s.y))));
    CHECK(r1.delta_y_norm == doctest::Approx(frobenius_norm(deviation_from_limit(net.b->limit(), s.y))));
}
