#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pushpull/algorithms.hpp"
#include "pushpull/diagnostics.hpp"
#include "pushpull/mixing.hpp"
#include "pushpull/objective.hpp"
#include "pushpull/topology.hpp"

namespace pushpull {

using Json = nlohmann::ordered_json;

/// How the consensual start point x⁽⁰⁾ is chosen.
enum class InitMode {
    Stationary,     // Newton-solved stationary point of f (default)
    PerturbedMean,  // mean over nodes of x_opt + N(0, σ_h² I)
    XOpt,           // the generating parameters x_opt
    Origin,         // zero vector
};

std::string_view to_string(InitMode mode);
InitMode parse_init_mode(std::string_view name);

struct DatasetConfig {
    std::size_t samples = 2048;  // L_total
    std::size_t dim = 10;
    double rho = 0.01;
};

struct ExperimentConfig {
    TopologyKind topology = TopologyKind::Exponential;
    TopologyParams topology_params;
    std::vector<std::size_t> node_counts{4, 8, 16};
    Algorithm algo = Algorithm::PushPull;
    double alpha = 0.005;
    /// 0 selects full-shard gradients.
    std::size_t batch = 8;
    std::size_t iters = 5000;
    std::size_t trials = 5;
    std::uint64_t base_seed = 42;
    DatasetConfig dataset;
    InitMode init = InitMode::Stationary;
    double init_sigma = 10.0;
    bool verify = false;
    std::vector<std::size_t> verify_blocks{1, 2, 8, 16};
    std::size_t metric_every = 1;
    std::string out_path;
};

/// Throws std::invalid_argument with the offending field.
void validate(const ExperimentConfig& cfg);

ExperimentConfig config_from_json(const Json& j);
Json to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Everything one (n, trial) cell needs, derived deterministically from the
/// config. Shared pieces are immutable.
struct Cell {
    std::size_t n = 0;
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    Digraph graph{1, {}};
    std::shared_ptr<const StochasticMatrix> a;
    std::shared_ptr<const StochasticMatrix> b;
    std::shared_ptr<const ShardSet> shards;
    Vector x0;
};

std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t n, std::size_t trial);
std::uint64_t dataset_seed(std::uint64_t base_seed, std::size_t trial);

Cell make_cell(const ExperimentConfig& cfg, std::size_t n, std::size_t trial);
AlgorithmState start_cell(const ExperimentConfig& cfg, const Cell& cell,
                          kernels::Exec exec = kernels::Exec::Parallel);

/// Identity-check outcome of one cell (only populated with verify = true).
struct VerifyReport {
    std::size_t n = 0;
    std::size_t trial = 0;
    /// Max single-step reconstruction residual of x̂ (Push-Pull only).
    double max_step_residual = 0.0;
    double max_mass_residual = 0.0;
    std::map<std::size_t, std::size_t> blocks;      // m → blocks checked
    std::map<std::size_t, double> max_block_residual;  // m → worst residual
};

struct ExperimentResult {
    std::vector<TraceRecord> traces;  // sorted by (n, trial, t)
    std::vector<VerifyReport> verify;
    std::map<std::size_t, NetworkMetrics> metrics;  // trial-0 matrices per n
};

/// Runs every (n, trial) cell; cells execute on the OpenMP worker pool and
/// results are sorted, so the output does not depend on the thread count.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct SpeedupSummary {
    std::map<std::size_t, double> plateau;
    double slope = 0.0;
    double reference_slope = -0.5;
};

/// Plateau per n = mean over trials of plateau_estimate(grad_metric), then
/// the least-squares slope of log plateau against log n.
SpeedupSummary summarize_speedup(std::span<const TraceRecord> traces, double tail_frac = 0.2);
Json to_json(const SpeedupSummary& s);

/// Least-squares slope of y against x.
double least_squares_slope(std::span<const double> x, std::span<const double> y);

inline constexpr std::string_view kTraceHeader =
    "trial,t,grad_metric,eps_norm,consensus_x,delta_y_norm,mass_residual,loss_mean";

/// 17 significant digits, so parsing recovers the exact double.
std::string format_double(double v);

void emit_csv(std::span<const TraceRecord> traces, const std::filesystem::path& path);
std::string to_csv(std::span<const TraceRecord> traces);
/// Parses a trace CSV; `n` is stamped on every record.
std::vector<TraceRecord> read_csv(const std::filesystem::path& path, std::size_t n);
std::vector<TraceRecord> parse_csv(std::string_view text, std::size_t n);

/// Node count from a trace file name ending in `_n<N>.csv`.
std::size_t node_count_from_filename(const std::filesystem::path& path);
std::filesystem::path trace_filename(Algorithm algo, TopologyKind topo, std::size_t n);

Json to_json(const NetworkMetrics& m);
NetworkMetrics metrics_from_json(const Json& j);
void emit_metrics_json(const NetworkMetrics& m, const std::filesystem::path& path);
Json to_json(const VerifyReport& r);

/// Writes traces (one CSV per n), metrics and, when applicable, the speedup
/// summary and verify report under `dir`. Returns the files written.
std::vector<std::filesystem::path> write_outputs(const ExperimentConfig& cfg, const ExperimentResult& result,
                                                 const std::filesystem::path& dir);

} // namespace pushpull
