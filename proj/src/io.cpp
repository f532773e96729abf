#include <charconv>
#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>
#include <stdexcept>

#include "pushpull/harness.hpp"

namespace pushpull {

std::string format_double(double v) {
    char buf[32];
    const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(len));
}

std::string to_csv(std::span<const TraceRecord> traces) {
    std::string out(kTraceHeader);
    out += '\n';
    for (const auto& r : traces) {
        out += std::to_string(r.trial);
        out += ',';
        out += std::to_string(r.t);
        for (double v : {r.grad_metric, r.eps_norm, r.consensus_x, r.delta_y_norm, r.mass_residual, r.loss_mean}) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

void emit_csv(std::span<const TraceRecord> traces, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << to_csv(traces);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

namespace {

template <class T>
T parse_field(std::string_view s, std::size_t line) {
    T value{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw std::runtime_error("csv line " + std::to_string(line) + ": bad field '" + std::string(s) + "'");
    }
    return value;
}

double parse_double_field(std::string_view s, std::size_t line) {
    // from_chars rejects "inf"/"nan" spellings printed by %g on some libcs.
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
    return parse_field<double>(s, line);
}

} // namespace

std::vector<TraceRecord> parse_csv(std::string_view text, std::size_t n) {
    std::vector<TraceRecord> out;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (!text.empty()) {
        const std::size_t eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (!header_seen) {
            if (line != kTraceHeader) throw std::runtime_error("csv: unexpected header '" + std::string(line) + "'");
            header_seen = true;
            continue;
        }
        std::vector<std::string_view> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            fields.push_back(line.substr(start, comma - start));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (fields.size() != 8) {
            throw std::runtime_error("csv line " + std::to_string(line_no) + ": expected 8 fields");
        }
        TraceRecord r;
        r.n = n;
        r.trial = parse_field<std::size_t>(fields[0], line_no);
        r.t = parse_field<std::size_t>(fields[1], line_no);
        r.grad_metric = parse_double_field(fields[2], line_no);
        r.eps_norm = parse_double_field(fields[3], line_no);
        r.consensus_x = parse_double_field(fields[4], line_no);
        r.delta_y_norm = parse_double_field(fields[5], line_no);
        r.mass_residual = parse_double_field(fields[6], line_no);
        r.loss_mean = parse_double_field(fields[7], line_no);
        out.push_back(r);
    }
    if (!header_seen) throw std::runtime_error("csv: missing header");
    return out;
}

std::vector<TraceRecord> read_csv(const std::filesystem::path& path, std::size_t n) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), n);
}

std::size_t node_count_from_filename(const std::filesystem::path& path) {
    static const std::regex pattern(R"(_n([0-9]+)\.csv$)");
    const std::string name = path.filename().string();
    std::smatch m;
    if (!std::regex_search(name, m, pattern)) {
        throw std::invalid_argument("cannot infer node count from file name " + name);
    }
    return std::stoul(m[1].str());
}

std::filesystem::path trace_filename(Algorithm algo, TopologyKind topo, std::size_t n) {
    return "trace_" + std::string(to_string(algo)) + "_" + std::string(to_string(topo)) + "_n" + std::to_string(n) +
           ".csv";
}

Json to_json(const NetworkMetrics& m) {
    Json j;
    j["beta_A"] = m.beta_A;
    j["beta_B"] = m.beta_B;
    j["kappa_A"] = m.kappa_A;
    j["kappa_B"] = m.kappa_B;
    j["M_A"] = m.M_A;
    j["M_B"] = m.M_B;
    j["s_A"] = m.s_A;
    j["s_B"] = m.s_B;
    j["c"] = m.c;
    j["decay_lambda_A"] = m.decay_lambda_A;
    j["decay_lambda_B"] = m.decay_lambda_B;
    j["truncated_A"] = m.truncated_A;
    j["truncated_B"] = m.truncated_B;
    return j;
}

NetworkMetrics metrics_from_json(const Json& j) {
    NetworkMetrics m;
    m.beta_A = j.at("beta_A").get<double>();
    m.beta_B = j.at("beta_B").get<double>();
    m.kappa_A = j.at("kappa_A").get<double>();
    m.kappa_B = j.at("kappa_B").get<double>();
    m.M_A = j.at("M_A").get<double>();
    m.M_B = j.at("M_B").get<double>();
    m.s_A = j.at("s_A").get<double>();
    m.s_B = j.at("s_B").get<double>();
    m.c = j.at("c").get<double>();
    m.decay_lambda_A = j.value("decay_lambda_A", 0.0);
    m.decay_lambda_B = j.value("decay_lambda_B", 0.0);
    m.truncated_A = j.value("truncated_A", false);
    m.truncated_B = j.value("truncated_B", false);
    return m;
}

namespace {

void write_json(const Json& j, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

} // namespace

void emit_metrics_json(const NetworkMetrics& m, const std::filesystem::path& path) { write_json(to_json(m), path); }

Json to_json(const SpeedupSummary& s) {
    Json plateau = Json::object();
    for (const auto& [n, p] : s.plateau) plateau[std::to_string(n)] = p;
    Json j;
    j["plateau"] = plateau;
    j["slope"] = s.slope;
    j["reference_slope"] = s.reference_slope;
    return j;
}

Json to_json(const VerifyReport& r) {
    Json blocks = Json::object();
    for (const auto& [m, count] : r.blocks) {
        blocks[std::to_string(m)] = Json{{"blocks", count}, {"max_residual", r.max_block_residual.at(m)}};
    }
    Json j;
    j["n"] = r.n;
    j["trial"] = r.trial;
    j["max_step_residual"] = r.max_step_residual;
    j["max_mass_residual"] = r.max_mass_residual;
    j["telescoping"] = blocks;
    return j;
}

std::vector<std::filesystem::path> write_outputs(const ExperimentConfig& cfg, const ExperimentResult& result,
                                                 const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    const std::string topo(to_string(cfg.topology));

    for (std::size_t n : cfg.node_counts) {
        std::vector<TraceRecord> rows;
        for (const auto& r : result.traces)
            if (r.n == n) rows.push_back(r);
        const auto path = dir / trace_filename(cfg.algo, cfg.topology, n);
        emit_csv(rows, path);
        written.push_back(path);
    }
    for (const auto& [n, m] : result.metrics) {
        const auto path = dir / ("metrics_" + topo + "_n" + std::to_string(n) + ".json");
        emit_metrics_json(m, path);
        written.push_back(path);
    }
    if (result.metrics.size() >= 2 && !result.traces.empty()) {
        const auto path = dir / "summary.json";
        write_json(to_json(summarize_speedup(result.traces)), path);
        written.push_back(path);
    }
    if (cfg.verify) {
        Json reports = Json::array();
        for (const auto& r : result.verify) reports.push_back(to_json(r));
        const auto path = dir / "verify.json";
        write_json(reports, path);
        written.push_back(path);
    }
    const auto path = dir / "config.json";
    write_json(to_json(cfg), path);
    written.push_back(path);
    return written;
}

} // namespace pushpull
