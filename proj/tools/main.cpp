#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "pushpull/harness.hpp"

using namespace pushpull;

namespace {

std::vector<std::size_t> parse_node_list(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t pos = 0;
        const unsigned long v = std::stoul(item, &pos);
        if (pos != item.size()) throw std::invalid_argument("bad node count '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("empty node list");
    return out;
}

struct SimulateArgs {
    std::string config;
    std::string algo, topology, nodes, out, init;
    std::optional<double> lr;
    std::optional<std::size_t> batch, iters, trials, metric_every;
    std::optional<std::uint64_t> seed;
    bool verify = false;
};

int run_simulate(const SimulateArgs& a) {
    ExperimentConfig cfg = a.config.empty() ? ExperimentConfig{} : load_config(a.config);
    if (!a.algo.empty()) cfg.algo = parse_algorithm(a.algo);
    if (!a.topology.empty()) cfg.topology = parse_topology_kind(a.topology);
    if (!a.nodes.empty()) cfg.node_counts = parse_node_list(a.nodes);
    if (!a.init.empty()) cfg.init = parse_init_mode(a.init);
    if (a.lr) cfg.alpha = *a.lr;
    if (a.batch) cfg.batch = *a.batch;
    if (a.iters) cfg.iters = *a.iters;
    if (a.trials) cfg.trials = *a.trials;
    if (a.metric_every) cfg.metric_every = *a.metric_every;
    if (a.seed) cfg.base_seed = *a.seed;
    if (a.verify) cfg.verify = true;
    if (!a.out.empty()) cfg.out_path = a.out;
    if (cfg.out_path.empty()) cfg.out_path = "out";
    validate(cfg);

    const ExperimentResult result = run_experiment(cfg);
    const auto files = write_outputs(cfg, result, cfg.out_path);
    for (const auto& f : files) std::cerr << "wrote " << f.string() << '\n';
    if (cfg.verify) {
        double step = 0.0, mass = 0.0, block = 0.0;
        for (const auto& r : result.verify) {
            step = std::max(step, r.max_step_residual);
            mass = std::max(mass, r.max_mass_residual);
            for (const auto& [m, v] : r.max_block_residual) block = std::max(block, v);
        }
        std::cerr << "verify: step " << step << "  mass " << mass << "  telescoping " << block << '\n';
    }
    return 0;
}

int run_metrics(const std::string& topology, std::size_t n, std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.topology = parse_topology_kind(topology);
    cfg.base_seed = seed;
    const std::uint64_t cs = cell_seed(seed, n, 0);
    const Digraph g = build_topology({cfg.topology, n, {}, derive_seed(cs, 1)});
    const auto a = build_weight_matrix(g, Stochasticity::Row, derive_seed(cs, 2));
    const auto b = build_weight_matrix(g, Stochasticity::Column, derive_seed(cs, 3));
    std::cout << to_json(compute_metrics(a, b)).dump(2) << '\n';
    return 0;
}

int run_summarize(const std::vector<std::string>& inputs, double tail) {
    std::vector<TraceRecord> all;
    for (const auto& path : inputs) {
        const auto rows = read_csv(path, node_count_from_filename(path));
        all.insert(all.end(), rows.begin(), rows.end());
    }
    std::cout << to_json(summarize_speedup(all, tail)).dump(2) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decentralized gradient-tracking simulator"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "run an experiment and write traces");
    simulate->add_option("--config", sim.config, "JSON experiment config")->check(CLI::ExistingFile);
    simulate->add_option("--algo", sim.algo, "push_pull | push_diging | frost | centralized");
    simulate->add_option("--topology", sim.topology, "exponential | ring | grid | random | geometric | nearest_neighbor");
    simulate->add_option("--nodes", sim.nodes, "comma separated node counts, e.g. 4,8,16");
    simulate->add_option("--lr", sim.lr, "step size alpha");
    simulate->add_option("--batch", sim.batch, "minibatch size per node (0 = full shard)");
    simulate->add_option("--iters", sim.iters, "iterations per run");
    simulate->add_option("--trials", sim.trials, "independent trials per node count");
    simulate->add_option("--seed", sim.seed, "base seed");
    simulate->add_option("--init", sim.init, "stationary | perturbed_mean | x_opt | origin");
    simulate->add_option("--metric-every", sim.metric_every, "record every k-th iteration");
    simulate->add_flag("--verify", sim.verify, "check the identities along the run");
    simulate->add_option("--out", sim.out, "output directory");

    std::string topo;
    std::size_t n = 8;
    std::uint64_t seed = 42;
    auto* metrics = app.add_subcommand("metrics", "print connectivity metrics as JSON");
    metrics->add_option("--topology", topo, "topology name")->required();
    metrics->add_option("--nodes", n, "node count")->required();
    metrics->add_option("--seed", seed, "base seed");

    std::vector<std::string> inputs;
    double tail = 0.2;
    auto* summarize = app.add_subcommand("summarize", "speedup summary from trace CSVs");
    summarize->add_option("--in", inputs, "trace CSV files (names end in _n<N>.csv)")->required()->check(CLI::ExistingFile);
    summarize->add_option("--tail", tail, "tail fraction for the plateau")->check(CLI::Range(1e-9, 1.0));

    CLI11_PARSE(app, argc, argv);
    try {
        if (*simulate) return run_simulate(sim);
        if (*metrics) return run_metrics(topo, n, seed);
        if (*summarize) return run_summarize(inputs, tail);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
