#include "pushpull/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>

#include "pushpull/rng.hpp"

namespace pushpull {

std::string_view to_string(InitMode mode) {
    switch (mode) {
        case InitMode::Stationary: return "stationary";
        case InitMode::PerturbedMean: return "perturbed_mean";
        case InitMode::XOpt: return "x_opt";
        case InitMode::Origin: return "origin";
    }
    return "unknown";
}

InitMode parse_init_mode(std::string_view name) {
    for (auto m : {InitMode::Stationary, InitMode::PerturbedMean, InitMode::XOpt, InitMode::Origin}) {
        if (name == to_string(m)) return m;
    }
    throw std::invalid_argument("unknown init mode: " + std::string(name));
}

void validate(const ExperimentConfig& cfg) {
    auto fail = [](const std::string& what) { throw std::invalid_argument("config: " + what); };
    if (cfg.iters < 1) fail("iters must be >= 1");
    if (cfg.trials < 1) fail("trials must be >= 1");
    if (!(cfg.alpha > 0.0)) fail("alpha must be > 0");
    if (cfg.node_counts.empty()) fail("node_counts must be non-empty");
    if (cfg.metric_every < 1) fail("metric_every must be >= 1");
    if (cfg.dataset.samples < 1 || cfg.dataset.dim < 1) fail("dataset L_total and d must be >= 1");
    if (!(cfg.dataset.rho >= 0.0)) fail("dataset rho must be >= 0");
    for (std::size_t n : cfg.node_counts) {
        if (n == 0) fail("node counts must be >= 1");
        if (cfg.dataset.samples % n != 0) {
            fail("n = " + std::to_string(n) + " does not divide L_total = " + std::to_string(cfg.dataset.samples));
        }
        if (cfg.batch > cfg.dataset.samples / n) {
            fail("batch " + std::to_string(cfg.batch) + " exceeds shard size at n = " + std::to_string(n));
        }
        TopologySpec spec{cfg.topology, n, cfg.topology_params, 0};
        resolve_defaults(spec);
    }
    for (std::size_t m : cfg.verify_blocks) {
        if (m == 0) fail("verify block lengths must be >= 1");
    }
}

namespace {

const std::set<std::string> kConfigKeys{
    "topology", "node_counts", "algo", "alpha", "batch", "iters", "trials", "base_seed", "dataset",
    "init", "init_sigma", "verify", "verify_blocks", "metric_every", "out_path"};

void parse_topology(const Json& j, ExperimentConfig& cfg) {
    if (j.is_string()) {
        cfg.topology = parse_topology_kind(j.get<std::string>());
        return;
    }
    if (!j.is_object()) throw std::invalid_argument("config: topology must be a string or object");
    for (const auto& [key, value] : j.items()) {
        if (key == "kind") cfg.topology = parse_topology_kind(value.get<std::string>());
        else if (key == "rows") cfg.topology_params.grid_rows = value.get<std::size_t>();
        else if (key == "cols") cfg.topology_params.grid_cols = value.get<std::size_t>();
        else if (key == "edge_prob") cfg.topology_params.edge_prob = value.get<double>();
        else if (key == "radius") cfg.topology_params.radius = value.get<double>();
        else if (key == "neighbors") cfg.topology_params.neighbors = value.get<std::size_t>();
        else throw std::invalid_argument("config: unknown topology key '" + key + "'");
    }
}

} // namespace

ExperimentConfig config_from_json(const Json& j) {
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
    ExperimentConfig cfg;
    for (const auto& [key, value] : j.items()) {
        if (!kConfigKeys.contains(key)) throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    try {
        if (j.contains("topology")) parse_topology(j.at("topology"), cfg);
        if (j.contains("node_counts")) cfg.node_counts = j.at("node_counts").get<std::vector<std::size_t>>();
        if (j.contains("algo")) cfg.algo = parse_algorithm(j.at("algo").get<std::string>());
        if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<double>();
        if (j.contains("batch")) cfg.batch = j.at("batch").get<std::size_t>();
        if (j.contains("iters")) cfg.iters = j.at("iters").get<std::size_t>();
        if (j.contains("trials")) cfg.trials = j.at("trials").get<std::size_t>();
        if (j.contains("base_seed")) cfg.base_seed = j.at("base_seed").get<std::uint64_t>();
        if (j.contains("dataset")) {
            for (const auto& [key, value] : j.at("dataset").items()) {
                if (key == "L_total") cfg.dataset.samples = value.get<std::size_t>();
                else if (key == "d") cfg.dataset.dim = value.get<std::size_t>();
                else if (key == "rho") cfg.dataset.rho = value.get<double>();
                else throw std::invalid_argument("config: unknown dataset key '" + key + "'");
            }
        }
        if (j.contains("init")) cfg.init = parse_init_mode(j.at("init").get<std::string>());
        if (j.contains("init_sigma")) cfg.init_sigma = j.at("init_sigma").get<double>();
        if (j.contains("verify")) cfg.verify = j.at("verify").get<bool>();
        if (j.contains("verify_blocks")) cfg.verify_blocks = j.at("verify_blocks").get<std::vector<std::size_t>>();
        if (j.contains("metric_every")) cfg.metric_every = j.at("metric_every").get<std::size_t>();
        if (j.contains("out_path")) cfg.out_path = j.at("out_path").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    validate(cfg);
    return cfg;
}

Json to_json(const ExperimentConfig& cfg) {
    Json topo;
    topo["kind"] = std::string(to_string(cfg.topology));
    const auto& p = cfg.topology_params;
    if (p.grid_rows != 0) topo["rows"] = p.grid_rows;
    if (p.grid_cols != 0) topo["cols"] = p.grid_cols;
    if (p.edge_prob != 0.0) topo["edge_prob"] = p.edge_prob;
    if (p.radius != 0.0) topo["radius"] = p.radius;
    if (p.neighbors != 0) topo["neighbors"] = p.neighbors;
    Json j;
    j["topology"] = topo;
    j["node_counts"] = cfg.node_counts;
    j["algo"] = std::string(to_string(cfg.algo));
    j["alpha"] = cfg.alpha;
    j["batch"] = cfg.batch;
    j["iters"] = cfg.iters;
    j["trials"] = cfg.trials;
    j["base_seed"] = cfg.base_seed;
    j["dataset"] = Json{{"L_total", cfg.dataset.samples}, {"d", cfg.dataset.dim}, {"rho", cfg.dataset.rho}};
    j["init"] = std::string(to_string(cfg.init));
    j["init_sigma"] = cfg.init_sigma;
    j["verify"] = cfg.verify;
    j["verify_blocks"] = cfg.verify_blocks;
    j["metric_every"] = cfg.metric_every;
    j["out_path"] = cfg.out_path;
    return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path.string());
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument("config " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t n, std::size_t trial) {
    return derive_seed(base_seed, n, trial);
}

std::uint64_t dataset_seed(std::uint64_t base_seed, std::size_t trial) {
    return derive_seed(base_seed, 0xda7a5e7ULL, trial);
}

namespace {

enum Stream : std::uint64_t { kTopologyStream = 1, kWeightsA = 2, kWeightsB = 3, kGradients = 4, kInitPoints = 5 };

} // namespace

Cell make_cell(const ExperimentConfig& cfg, std::size_t n, std::size_t trial) {
    Cell cell;
    cell.n = n;
    cell.trial = trial;
    cell.seed = cell_seed(cfg.base_seed, n, trial);

    const std::uint64_t ds_seed = dataset_seed(cfg.base_seed, trial);
    const SyntheticDataset ds = synthesize(cfg.dataset.samples, cfg.dataset.dim, ds_seed, cfg.dataset.rho);
    cell.shards = std::make_shared<const ShardSet>(partition(ds, n));

    TopologySpec spec{cfg.topology, n, cfg.topology_params, derive_seed(cell.seed, kTopologyStream)};
    cell.graph = build_topology(spec);
    cell.a = std::make_shared<const StochasticMatrix>(
        build_weight_matrix(cell.graph, Stochasticity::Row, derive_seed(cell.seed, kWeightsA)));
    cell.b = std::make_shared<const StochasticMatrix>(
        build_weight_matrix(cell.graph, Stochasticity::Column, derive_seed(cell.seed, kWeightsB)));

    switch (cfg.init) {
        case InitMode::Stationary: cell.x0 = stationary_point(*cell.shards, ds.x_opt); break;
        case InitMode::PerturbedMean: {
            const Matrix pts =
                perturbed_local_points(ds, n, cfg.init_sigma, derive_seed(cell.seed, kInitPoints));
            cell.x0 = column_sums(pts);
            for (double& v : cell.x0) v /= static_cast<double>(n);
            break;
        }
        case InitMode::XOpt: cell.x0 = ds.x_opt; break;
        case InitMode::Origin: cell.x0.assign(ds.dim(), 0.0); break;
    }
    return cell;
}

AlgorithmState start_cell(const ExperimentConfig& cfg, const Cell& cell, kernels::Exec exec) {
    RunOptions opts{cfg.alpha, cfg.batch, derive_seed(cell.seed, kGradients), exec};
    return init_state(cfg.algo, cell.a, cell.b, cell.shards, cell.x0, opts);
}

namespace {

// Copy of the iterate data without the generators, for per-step residuals.
AlgorithmState snapshot(const AlgorithmState& s) {
    AlgorithmState c;
    c.algo = s.algo;
    c.t = s.t;
    c.x = s.x;
    c.y = s.y;
    c.g_prev = s.g_prev;
    c.v = s.v;
    c.ddiag = s.ddiag;
    c.alpha = s.alpha;
    c.batch = s.batch;
    c.a = s.a;
    c.b = s.b;
    c.shards = s.shards;
    return c;
}

struct CellOutput {
    std::vector<TraceRecord> traces;
    VerifyReport verify;
    std::optional<NetworkMetrics> metrics;
};

CellOutput run_cell(const ExperimentConfig& cfg, std::size_t n, std::size_t trial, kernels::Exec exec) {
    CellOutput out;
    const Cell cell = make_cell(cfg, n, trial);
    if (trial == 0) out.metrics = compute_metrics(*cell.a, *cell.b);
    AlgorithmState s = start_cell(cfg, cell, exec);

    const bool verify_pp = cfg.verify && cfg.algo == Algorithm::PushPull;
    std::vector<TelescopingMonitor> monitors;
    if (verify_pp) {
        for (std::size_t m : cfg.verify_blocks) monitors.emplace_back(cell.b, m);
        for (auto& mon : monitors) mon.observe(s);
    }
    out.verify.n = n;
    out.verify.trial = trial;
    if (cfg.verify) out.verify.max_mass_residual = mass_residual(s);

    const bool need_before = verify_pp || cfg.algo == Algorithm::PushDiging;
    out.traces.reserve(cfg.iters / cfg.metric_every);
    for (std::size_t it = 1; it <= cfg.iters; ++it) {
        AlgorithmState before;
        if (need_before) before = snapshot(s);
        step(s);
        double alignment = 0.0;
        if (cfg.algo == Algorithm::PushDiging) alignment = push_diging_alignment_residual(before, s);
        if (verify_pp) {
            out.verify.max_step_residual =
                std::max(out.verify.max_step_residual, push_pull_step_residual(before, s));
            for (auto& mon : monitors) mon.observe(s);
        }
        if (cfg.verify) out.verify.max_mass_residual = std::max(out.verify.max_mass_residual, mass_residual(s));
        if (it % cfg.metric_every != 0) continue;
        TraceRecord r = state_diagnostics(s);
        if (cfg.algo == Algorithm::PushDiging) r.eps_norm = alignment;
        r.trial = trial;
        const GlobalEvaluation ev = evaluate_global(*cell.shards, s.x, exec);
        r.grad_metric = ev.grad_metric;
        r.loss_mean = ev.loss_mean;
        out.traces.push_back(r);
    }
    for (const auto& mon : monitors) {
        out.verify.blocks[mon.block_length()] = mon.blocks();
        out.verify.max_block_residual[mon.block_length()] = mon.max_residual();
    }
    return out;
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    std::vector<std::pair<std::size_t, std::size_t>> work;
    for (std::size_t n : cfg.node_counts)
        for (std::size_t r = 0; r < cfg.trials; ++r) work.emplace_back(n, r);

    // Cells go to the worker pool; inner kernels stay serial inside a cell
    // when more than one thread is available.
    const bool pool = kernels::max_threads() > 1 && work.size() > 1;
    const kernels::Exec inner = pool ? kernels::Exec::Serial : kernels::Exec::Parallel;
    std::vector<CellOutput> outputs(work.size());
    std::vector<std::exception_ptr> errors(work.size());
    const long long count = static_cast<long long>(work.size());
#pragma omp parallel for schedule(dynamic) if (pool)
    for (long long w = 0; w < count; ++w) {
        const auto idx = static_cast<std::size_t>(w);
        try {
            outputs[idx] = run_cell(cfg, work[idx].first, work[idx].second, inner);
        } catch (...) {
            errors[idx] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    ExperimentResult result;
    for (std::size_t w = 0; w < work.size(); ++w) {
        auto& o = outputs[w];
        result.traces.insert(result.traces.end(), o.traces.begin(), o.traces.end());
        if (cfg.verify) result.verify.push_back(o.verify);
        if (o.metrics) result.metrics[work[w].first] = *o.metrics;
    }
    std::stable_sort(result.traces.begin(), result.traces.end(), [](const TraceRecord& l, const TraceRecord& r) {
        return std::tie(l.n, l.trial, l.t) < std::tie(r.n, r.trial, r.t);
    });
    return result;
}

double least_squares_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("least_squares_slope: need >= 2 points");
    const double k = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / k;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / k;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw std::invalid_argument("least_squares_slope: x values are all equal");
    return sxy / sxx;
}

SpeedupSummary summarize_speedup(std::span<const TraceRecord> traces, double tail_frac) {
    std::map<std::size_t, std::map<std::size_t, std::vector<std::pair<std::size_t, double>>>> series;
    for (const auto& r : traces) series[r.n][r.trial].emplace_back(r.t, r.grad_metric);
    if (series.size() < 2) throw std::invalid_argument("summarize_speedup: need at least 2 distinct node counts");

    SpeedupSummary out;
    std::vector<double> log_n, log_p;
    for (auto& [n, trials] : series) {
        double acc = 0.0;
        for (auto& [trial, points] : trials) {
            std::sort(points.begin(), points.end());
            Vector values;
            values.reserve(points.size());
            for (const auto& pt : points) values.push_back(pt.second);
            acc += plateau_estimate(values, tail_frac);
        }
        const double plateau = acc / static_cast<double>(trials.size());
        if (!(plateau > 0.0)) throw std::runtime_error("summarize_speedup: non-positive plateau at n=" + std::to_string(n));
        out.plateau[n] = plateau;
        log_n.push_back(std::log(static_cast<double>(n)));
        log_p.push_back(std::log(plateau));
    }
    out.slope = least_squares_slope(log_n, log_p);
    return out;
}

} // namespace pushpull
