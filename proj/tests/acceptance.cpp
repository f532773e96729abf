// Acceptance suite: one PASS/FAIL line per criterion, details indented.
//
//   acceptance [--expect-fail <id>]...
//
// Exit status is the number of failing criteria not named by --expect-fail.
// An expected failure is still printed as FAIL.

#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

#include "pushpull/harness.hpp"

using namespace pushpull;

namespace {

constexpr TopologyKind kTopologies[] = {TopologyKind::Exponential, TopologyKind::Ring,
                                        TopologyKind::Grid,        TopologyKind::Random,
                                        TopologyKind::Geometric,   TopologyKind::NearestNeighbor};

struct Outcome {
    bool pass = true;
    std::vector<std::string> details;

    void require(bool ok, std::string what) {
        if (!ok) pass = false;
        details.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    }
    void note(std::string what) { details.push_back("     " + std::move(what)); }
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string name(TopologyKind k) { return std::string(to_string(k)); }

// Grouped per (n, trial) series of a trace field.
std::map<std::pair<std::size_t, std::size_t>, Vector> series_of(const std::vector<TraceRecord>& traces,
                                                               double TraceRecord::*field) {
    std::map<std::pair<std::size_t, std::size_t>, Vector> out;
    for (const auto& r : traces) out[{r.n, r.trial}].push_back(r.*field);
    return out;
}

Outcome linear_speedup() {
    Outcome o;
    ExperimentConfig cfg;  // defaults are the desk-scale experiment
    const auto result = run_experiment(cfg);
    const SpeedupSummary s = summarize_speedup(result.traces, 0.2);
    const double ratio = s.plateau.at(4) / s.plateau.at(16);
    for (const auto& [n, p] : s.plateau) o.note(fmt("plateau(n=%zu) = %.6g", n, p));
    o.require(s.slope >= -0.65 && s.slope <= -0.35, fmt("slope %.4f in [-0.65, -0.35]", s.slope));
    o.require(ratio >= 1.5 && ratio <= 2.7, fmt("plateau(4)/plateau(16) %.4f in [1.5, 2.7]", ratio));
    return o;
}

Outcome nonvanishing_epsilon() {
    Outcome o;
    for (auto kind : {TopologyKind::Exponential, TopologyKind::Ring, TopologyKind::Grid}) {
        ExperimentConfig cfg;
        cfg.topology = kind;
        cfg.node_counts = {8};
        const auto result = run_experiment(cfg);
        for (const auto& [key, eps] : series_of(result.traces, &TraceRecord::eps_norm)) {
            const double tail = plateau_estimate(eps, 0.2);
            const double mid = window_estimate(eps, 0.4, 0.6);
            o.require(tail >= 0.5 * mid, fmt("%s n=8 trial %zu: tail %.4g >= 0.5 * middle %.4g", name(kind).c_str(),
                                             key.second, tail, mid));
        }
    }
    return o;
}

Outcome frost_decay() {
    Outcome o;
    ExperimentConfig cfg;
    cfg.algo = Algorithm::Frost;
    cfg.batch = 0;
    cfg.node_counts = {8};
    for (auto kind : kTopologies) {
        cfg.topology = kind;
        for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
            const Cell cell = make_cell(cfg, 8, trial);
            AlgorithmState s = start_cell(cfg, cell);
            const double eps0 = state_diagnostics(s).eps_norm;
            double best = 1.0, best_rel = 1.0;
            std::size_t hit = 0;
            for (std::size_t t = 1; t <= 200; ++t) {
                step(s);
                const double e = state_diagnostics(s).eps_norm;
                best = std::min(best, e / eps0);
                best_rel = std::min(best_rel, e / (s.alpha * frobenius_norm(s.g_prev)));
                if (hit == 0 && e < 1e-8 * eps0) hit = t;
            }
            const std::string when = hit != 0 ? fmt("first below 1e-8 at t=%zu", hit) : std::string("never below 1e-8");
            o.require(hit != 0, fmt("%s n=8 trial %zu: min eps/eps0 over 200 steps %.3g (%s); min eps/(alpha*|g|_F) %.3g",
                                    name(kind).c_str(), trial, best, when.c_str(), best_rel));
        }
        const MatrixMetrics m = matrix_metrics(*make_cell(cfg, 8, 0).a);
        o.note(fmt("%s: decay_lambda_A %.4f, decay_lambda^200 = %.3g", name(kind).c_str(), m.decay_lambda,
                   std::pow(m.decay_lambda, 200.0)));
    }
    return o;
}

Outcome push_diging_alignment() {
    Outcome o;
    ExperimentConfig cfg;
    cfg.algo = Algorithm::PushDiging;
    cfg.iters = 1000;
    cfg.node_counts = {4, 8};
    cfg.trials = 2;
    for (auto kind : kTopologies) {
        cfg.topology = kind;
        const auto result = run_experiment(cfg);
        double worst = 0.0;
        for (const auto& r : result.traces) worst = std::max(worst, r.eps_norm);
        o.require(worst <= 1e-10, fmt("%s n in {4,8}: max alignment residual %.3g <= 1e-10", name(kind).c_str(), worst));
    }
    return o;
}

Outcome telescoping() {
    Outcome o;
    ExperimentConfig cfg;
    cfg.verify = true;
    cfg.node_counts = {2, 8};
    cfg.iters = 8000;
    cfg.trials = 1;
    cfg.metric_every = 100;
    for (auto kind : {TopologyKind::Exponential, TopologyKind::Ring, TopologyKind::Grid}) {
        cfg.topology = kind;
        const auto result = run_experiment(cfg);
        for (const auto& v : result.verify) {
            for (const auto& [m, count] : v.blocks) {
                const double res = v.max_block_residual.at(m);
                o.require(res <= 1e-9 && count >= 500, fmt("%s n=%zu m=%zu: %zu blocks, max residual %.3g <= 1e-9",
                                                           name(kind).c_str(), v.n, m, count, res));
            }
            o.note(fmt("%s n=%zu: max single-step reconstruction residual %.3g", name(kind).c_str(), v.n,
                       v.max_step_residual));
        }
    }
    return o;
}

Outcome mass_conservation() {
    Outcome o;
    ExperimentConfig cfg;
    cfg.iters = 10000;
    cfg.node_counts = {2, 8};
    cfg.trials = 1;
    for (auto kind : kTopologies) {
        cfg.topology = kind;
        const auto result = run_experiment(cfg);
        double worst = 0.0;
        std::size_t steps = 0;
        for (const auto& r : result.traces) {
            worst = std::max(worst, r.mass_residual);
            ++steps;
        }
        o.require(worst <= 1e-9 && steps == 2 * cfg.iters,
                  fmt("%s n in {2,8}: %zu steps, max residual %.3g <= 1e-9", name(kind).c_str(), steps, worst));
    }
    return o;
}

Outcome propositions() {
    Outcome o;
    struct Tally {
        std::size_t checked = 0;
        std::vector<std::string> violations;
    };
    std::map<std::string, Tally> tallies;
    const auto check = [&](const char* kind, bool ok, const std::function<std::string()>& what) {
        auto& t = tallies[kind];
        ++t.checked;
        if (!ok) t.violations.push_back(what());
    };
    std::set<std::string> flagged_matrices;
    for (auto kind : kTopologies) {
        ExperimentConfig cfg;
        cfg.topology = kind;
        for (std::size_t n = 2; n <= 16; ++n) {
            for (std::uint64_t seed = 0; seed < 5; ++seed) {
                const std::uint64_t cs = cell_seed(cfg.base_seed, n, seed);
                const Digraph g = build_topology({kind, n, {}, derive_seed(cs, 1)});
                const auto a = build_weight_matrix(g, Stochasticity::Row, derive_seed(cs, 2));
                const auto b = build_weight_matrix(g, Stochasticity::Column, derive_seed(cs, 3));
                const std::string tag = fmt("%s n=%zu seed=%llu", name(kind).c_str(), n, (unsigned long long)seed);
                for (const StochasticMatrix* w : {&a, &b}) {
                    const char* which = w == &a ? "A" : "B";
                    const MatrixMetrics m = matrix_metrics(*w);
                    check("perron residual <= 1e-10", w->perron_residual() <= 1e-10,
                          [&] { return fmt("%s %s: %.3g", tag.c_str(), which, w->perron_residual()); });
                    const auto& dev = m.deviations;
                    for (std::size_t t = m.tail_start; t + 1 < dev.size(); ++t) {
                        const double ratio = dev[t + 1] / dev[t];
                        check("tail ratio <= decay_lambda + 0.05", ratio <= m.decay_lambda + 0.05, [&] {
                            return fmt("%s %s: ratio %.4f at t=%zu, lambda %.4f", tag.c_str(), which, ratio, t,
                                       m.decay_lambda);
                        });
                    }
                    for (std::size_t t = m.tail_start; t + 1 < dev.size(); ++t)
                        if (dev[t + 1] / dev[t] > m.decay_lambda + 0.05) flagged_matrices.insert(tag + " " + which);
                    check("power sequence not truncated", !m.truncated, [&] { return tag + " " + which; });
                    check("M <= sqrt(n)", m.M <= std::sqrt(double(n)) * (1 + 1e-12),
                          [&] { return fmt("%s %s: M %.6g", tag.c_str(), which, m.M); });
                    const double bound = m.M * m.M * (1.0 + 0.5 * std::log(m.kappa)) / (1.0 - m.beta);
                    check("s <= M^2 (1 + ln(kappa)/2) / (1 - beta)", m.s <= bound * (1 + 1e-9),
                          [&] { return fmt("%s %s: s %.6g > %.6g", tag.c_str(), which, m.s, bound); });
                }
                const auto& pa = a.perron();
                const auto& pb = b.perron();
                const double c = double(n) * dot(pa, pb);
                const double lo = double(n) * std::max(*std::min_element(pa.begin(), pa.end()),
                                                       *std::min_element(pb.begin(), pb.end()));
                const double hi = double(n) * std::min(*std::max_element(pa.begin(), pa.end()),
                                                       *std::max_element(pb.begin(), pb.end()));
                check("c sandwich", lo <= c * (1 + 1e-12) && c <= hi * (1 + 1e-12),
                      [&] { return fmt("%s: c %.6g outside [%.6g, %.6g]", tag.c_str(), c, lo, hi); });
            }
        }
    }
    for (const auto& [kind, t] : tallies) {
        o.require(t.violations.empty(), fmt("%s: %zu checks, %zu violations", kind.c_str(), t.checked,
                                            t.violations.size()));
        std::map<std::string, std::size_t> by_topology;
        for (const auto& v : t.violations) by_topology[v.substr(0, v.find(' '))] += 1;
        for (const auto& [topo, count] : by_topology) o.note(fmt("  %s: %zu", topo.c_str(), count));
        for (std::size_t k = 0; k < std::min<std::size_t>(3, t.violations.size()); ++k) o.note("  e.g. " + t.violations[k]);
    }
    o.note(fmt("matrices with a tail-ratio violation: %zu of %zu", flagged_matrices.size(),
               tallies["power sequence not truncated"].checked));
    return o;
}

Outcome rolling_sum() {
    Outcome o;
    Rng rng(20240601);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> log_scale(-3.0, 3.0);
    ExperimentConfig cfg;
    std::size_t instances = 0, violations = 0;
    double worst = 0.0;
    for (auto kind : kTopologies) {
        for (std::size_t n : {4u, 8u, 16u}) {
            const std::uint64_t cs = cell_seed(cfg.base_seed, n, 0);
            const Digraph g = build_topology({kind, n, {}, derive_seed(cs, 1)});
            const auto a = build_weight_matrix(g, Stochasticity::Row, derive_seed(cs, 2));
            const auto b = build_weight_matrix(g, Stochasticity::Column, derive_seed(cs, 3));
            for (const StochasticMatrix* w : {&a, &b}) {
                const double s = matrix_metrics(*w).s;
                for (int rep = 0; rep < 50; ++rep) {
                    std::vector<Matrix> deltas;
                    for (int k = 0; k <= 10; ++k) {
                        Matrix d(n, 3);
                        const double scale = std::pow(10.0, log_scale(rng));
                        for (double& v : d.data()) v = scale * nd(rng);
                        deltas.push_back(std::move(d));
                    }
                    const auto [lhs, rhs] = check_rolling_sum(*w, s, deltas);
                    ++instances;
                    worst = std::max(worst, lhs / rhs);
                    if (!(lhs <= rhs)) ++violations;
                }
            }
        }
    }
    o.require(violations == 0, fmt("%zu instances (50 per matrix, T=10), %zu violations, max lhs/rhs %.4f", instances,
                                   violations, worst));
    return o;
}

Outcome gradient_oracle() {
    Outcome o;
    const ExperimentConfig cfg;
    const auto ds = synthesize(cfg.dataset.samples, cfg.dataset.dim, 7, cfg.dataset.rho);
    const auto shards = partition(ds, 8);
    Rng rng(99);
    std::normal_distribution<double> nd(0.0, 2.0);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const auto& s = shards[rep % shards.size()];
        Vector x(ds.dim());
        for (double& v : x) v = nd(rng);
        const Vector g = local_gradient(s, x);
        for (std::size_t j = 0; j < x.size(); ++j) {
            Vector xp = x, xm = x;
            xp[j] += 1e-6;
            xm[j] -= 1e-6;
            const double fd = (local_loss(s, xp) - local_loss(s, xm)) / 2e-6;
            worst = std::max(worst, std::abs(fd - g[j]) / std::max(std::abs(g[j]), 1e-4));
        }
    }
    o.require(worst <= 1e-5, fmt("finite differences on 100 points: max relative error %.3g <= 1e-5", worst));

    const auto& s = shards[0];
    const std::size_t batch = s.samples() / 4;
    Vector x(ds.dim());
    for (double& v : x) v = nd(rng);
    const Vector full = local_gradient(s, x);
    const int reps = 10000;
    Vector mean(x.size(), 0.0), sq(x.size(), 0.0);
    for (int r = 0; r < reps; ++r) {
        const Vector g = local_gradient(s, x, batch, rng);
        for (std::size_t j = 0; j < x.size(); ++j) {
            mean[j] += g[j];
            sq[j] += g[j] * g[j];
        }
    }
    double worst_z = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        mean[j] /= reps;
        const double se = std::sqrt((sq[j] / reps - mean[j] * mean[j]) / reps);
        worst_z = std::max(worst_z, std::abs(mean[j] - full[j]) / se);
    }
    o.require(worst_z <= 3.0, fmt("minibatch mean of %d draws (B=M/4): max |z| %.3f <= 3", reps, worst_z));

    const Vector zero(ds.dim(), 0.0);
    const auto flat = synthesize_with_optimum(100000, zero, 2024, 0.0);
    const double frac = double(std::count(flat.labels.begin(), flat.labels.end(), 1.0)) / 100000.0;
    o.require(frac >= 0.49 && frac <= 0.51, fmt("P(y=+1 | margin 0) = %.4f in [0.49, 0.51]", frac));
    return o;
}

Outcome single_node() {
    Outcome o;
    ExperimentConfig cfg;
    cfg.node_counts = {1};
    cfg.iters = 2000;
    cfg.trials = 2;
    std::vector<double> reference;
    for (auto algo : {Algorithm::CentralizedSgd, Algorithm::PushPull, Algorithm::PushDiging, Algorithm::Frost}) {
        cfg.algo = algo;
        std::vector<double> series;
        for (const auto& r : run_experiment(cfg).traces) series.push_back(r.grad_metric);
        if (reference.empty()) {
            reference = series;
            continue;
        }
        o.require(series == reference,
                  fmt("%s grad_metric series bit-identical to centralized (%zu points)", std::string(to_string(algo)).c_str(),
                      series.size()));
    }
    return o;
}

struct Criterion {
    const char* id;
    const char* title;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    std::set<std::string> expected;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--expect-fail" && i + 1 < argc) {
            expected.insert(argv[++i]);
        } else {
            std::fprintf(stderr, "usage: %s [--expect-fail <id>]...\n", argv[0]);
            return 2;
        }
    }

    const std::vector<Criterion> criteria{
        {"linear_speedup", "linear speedup in n (exponential graph)", linear_speedup},
        {"nonvanishing_epsilon", "Push-Pull error term stays at a nonzero plateau", nonvanishing_epsilon},
        {"frost_epsilon_decay", "FROST error term decays below 1e-8 of its start within 200 steps", frost_decay},
        {"push_diging_alignment", "Push-DiGing alignment identity holds exactly", push_diging_alignment},
        {"telescoping_identity", "m-step telescoping identity of the tracker deviation", telescoping},
        {"mass_conservation", "tracker mass equals gradient mass", mass_conservation},
        {"network_propositions", "Perron residual, geometric tail, M, s and c bounds", propositions},
        {"rolling_sum", "rolling-sum inequality", rolling_sum},
        {"gradient_oracle", "gradient oracle checks", gradient_oracle},
        {"single_node", "n = 1 degeneracy of all four algorithms", single_node},
    };

    int unexpected = 0;
    std::size_t passed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool known = expected.contains(c.id);
        std::printf("%s %-22s %s (%.1fs)%s\n", o.pass ? "PASS" : "FAIL", c.id, c.title, secs,
                    !o.pass && known ? " [expected failure]" : "");
        for (const auto& d : o.details) std::printf("    %s\n", d.c_str());
        std::fflush(stdout);
        if (o.pass) ++passed;
        else if (!known) ++unexpected;
        if (o.pass && known) std::printf("    note: %s was expected to fail but passed\n", c.id);
    }
    std::printf("%zu/%zu criteria passed\n", passed, criteria.size());
    return unexpected;
}
