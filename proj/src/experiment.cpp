#include "swarmcap/experiment.hpp"

#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "swarmcap/errors.hpp"
#include "swarmcap/markov.hpp"
#include "swarmcap/queueing.hpp"
#include "swarmcap/version.hpp"

namespace swarmcap {

namespace {

using nlohmann::json;

std::string fmt12(double value) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.12g", value);
    return buffer;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t point_seed(std::uint64_t base, std::size_t index) {
    return mix64(mix64(base) ^ (static_cast<std::uint64_t>(index) + 1));
}

std::string trim(std::string_view text) {
    const auto begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return {};
    const auto end = text.find_last_not_of(" \t\r\n");
    return std::string(text.substr(begin, end - begin + 1));
}

bool parse_bool(const std::string& field, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw SpecError(field, "expected a boolean, got '" + value + "'");
}

double parse_double(const std::string& field, const std::string& value) {
    if (value == "inf" || value == "infinity")
        return std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw SpecError(field, "expected a number, got '" + value + "'");
    }
}

long parse_int(const std::string& field, const std::string& value) {
    try {
        std::size_t used = 0;
        const long v = std::stol(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw SpecError(field, "expected an integer, got '" + value + "'");
    }
}

void run_point_pool(std::size_t jobs, bool serial, const std::function<void(std::size_t)>& job) {
    const unsigned hw = std::thread::hardware_concurrency();
    const unsigned workers =
        serial ? 1 : std::min<unsigned>(hw ? hw : 1, static_cast<unsigned>(jobs));
    if (workers <= 1) {
        for (std::size_t i = 0; i < jobs; ++i) job(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&]() {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= jobs) return;
                job(i);
            }
        });
    for (std::thread& t : pool) t.join();
}

} // namespace

const char* to_string(Method method) {
    switch (method) {
        case Method::Markov: return "markov";
        case Method::Queueing: return "queueing";
        case Method::Simulate: return "simulate";
        case Method::Bound: return "bound";
    }
    return "?";
}

const char* to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::Peers: return "N";
        case SweepAxis::Blocks: return "K";
        case SweepAxis::PublisherCapacity: return "U";
        case SweepAxis::EndgameRateInverse: return "mu_prime_inverse";
        case SweepAxis::LingerRate: return "gamma";
    }
    return "?";
}

Method parse_method(std::string_view text) {
    if (text == "markov") return Method::Markov;
    if (text == "queueing") return Method::Queueing;
    if (text == "simulate") return Method::Simulate;
    if (text == "bound") return Method::Bound;
    throw SpecError("method", "unknown method '" + std::string(text) + "'");
}

SweepAxis parse_sweep_axis(std::string_view text) {
    if (text == "N") return SweepAxis::Peers;
    if (text == "K") return SweepAxis::Blocks;
    if (text == "U") return SweepAxis::PublisherCapacity;
    if (text == "mu_prime_inverse") return SweepAxis::EndgameRateInverse;
    if (text == "gamma") return SweepAxis::LingerRate;
    throw SpecError("sweep", "unknown axis '" + std::string(text) +
                                 "' (expected N, K, U, mu_prime_inverse or gamma)");
}

std::vector<double> SweepSpec::values() const {
    if (!(step > 0)) throw SpecError("sweep", "step must be positive");
    if (to < from) throw SpecError("sweep", "empty range (to < from)");
    std::vector<double> grid;
    for (double v = from; v <= to + step * 1e-9; v += step) grid.push_back(v);
    return grid;
}

SweepSpec parse_sweep(std::string_view text) {
    std::array<std::string, 4> parts;
    std::size_t k = 0, pos = 0;
    const std::string value(text);
    while (k < 4) {
        const auto colon = value.find(':', pos);
        parts[k++] = value.substr(pos, colon == std::string::npos ? colon : colon - pos);
        if (colon == std::string::npos) break;
        pos = colon + 1;
    }
    if (k != 4) throw SpecError("sweep", "expected axis:from:to:step, got '" + value + "'");
    SweepSpec sweep;
    sweep.axis = parse_sweep_axis(parts[0]);
    sweep.from = parse_double("sweep", parts[1]);
    sweep.to = parse_double("sweep", parts[2]);
    sweep.step = parse_double("sweep", parts[3]);
    return sweep;
}

void ExperimentSpec::validate() const {
    try {
        params.validate();
    } catch (const std::invalid_argument& e) {
        throw SpecError("params", e.what());
    }
    if (!(horizon > 0)) throw SpecError("horizon", "must be positive");
    if (warmup < 0 || warmup >= horizon) throw SpecError("warmup", "must satisfy 0 <= warmup < horizon");
    if (replications < 1) throw SpecError("replications", "must be >= 1");
    if (method == Method::Simulate && replications < 2)
        throw SpecError("replications", "simulation needs >= 2 replications for an interval");

    if (!sweep) return;
    const std::vector<double> grid = sweep->values();
    if (grid.empty()) throw SpecError("sweep", "empty grid");

    switch (sweep->axis) {
        case SweepAxis::Peers:
            if (method == Method::Queueing || method == Method::Bound)
                throw SpecError("sweep", "population axis does not apply to the large-population methods");
            break;
        case SweepAxis::LingerRate:
            if (method == Method::Queueing || method == Method::Bound)
                throw SpecError("sweep", "linger axis applies to markov and simulate only");
            break;
        default:
            break;
    }
    for (double v : grid) {
        switch (sweep->axis) {
            case SweepAxis::Peers:
            case SweepAxis::Blocks:
                if (std::abs(v - std::round(v)) > 1e-9 || v < 1)
                    throw SpecError("sweep", "axis values must be positive integers");
                break;
            case SweepAxis::PublisherCapacity:
            case SweepAxis::EndgameRateInverse:
                if (!(v > 0)) throw SpecError("sweep", "axis values must be positive");
                break;
            case SweepAxis::LingerRate:
                if (!(v > 0)) throw SpecError("sweep", "linger rates must be positive");
                break;
        }
    }
}

namespace {

ModelParams params_at(const ExperimentSpec& spec, double axis_value) {
    ModelParams p = spec.params;
    if (!spec.sweep) return p;
    switch (spec.sweep->axis) {
        case SweepAxis::Peers: p.peers = static_cast<int>(std::llround(axis_value)); break;
        case SweepAxis::Blocks: p.blocks = static_cast<int>(std::llround(axis_value)); break;
        case SweepAxis::PublisherCapacity: p.publisher_capacity = axis_value; break;
        case SweepAxis::EndgameRateInverse: p.endgame_rate = 1.0 / axis_value; break;
        case SweepAxis::LingerRate: p.linger_rate = axis_value; break;
    }
    return p;
}

ResultRow evaluate_point(const ExperimentSpec& spec, const ModelParams& params,
                         std::uint64_t seed) {
    ResultRow row;
    row.params = params;
    row.method = spec.method;
    switch (spec.method) {
        case Method::Markov: {
            const ThroughputSolution solution = solve_throughput(params, /*lumped=*/true);
            row.throughput = solution.throughput;
            row.iterations = solution.iterations;
            row.residual = solution.residual;
            row.has_residual = true;
            break;
        }
        case Method::Queueing: {
            const QueueNetworkSolution net = fixed_point(params);
            row.throughput = net.lambda_s;
            row.iterations = net.iterations;
            row.residual = std::abs(net.lambda_s - net.departure_rate) /
                           std::max(net.lambda_s, 1e-300);
            row.has_residual = true;
            break;
        }
        case Method::Simulate: {
            SimConfig config;
            config.params = params;
            config.seed = seed;
            config.horizon = spec.horizon;
            config.warmup = spec.warmup;
            config.replications = spec.replications;
            const ThroughputEstimate estimate = estimate_throughput(config);
            row.throughput = estimate.mean;
            row.ci_halfwidth = estimate.ci_halfwidth;
            row.has_ci = true;
            row.seed = seed;
            row.has_seed = true;
            break;
        }
        case Method::Bound: {
            row.throughput = throughput_bound(params);
            break;
        }
    }
    return row;
}

} // namespace

RunResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();

    RunResult result;
    result.spec = spec;

    const std::vector<double> axis_values =
        spec.sweep ? spec.sweep->values() : std::vector<double>{0.0};
    const std::size_t count = axis_values.size();
    result.points.resize(count);
    std::vector<ResultRow> rows(count);
    std::vector<char> ok(count, 0);

    // Simulation points already parallelize over replications internally.
    run_point_pool(count, spec.method == Method::Simulate, [&](std::size_t i) {
        PointStatus& status = result.points[i];
        status.index = i;
        status.axis_value = axis_values[i];
        status.seed = point_seed(spec.rng_seed, i);
        const auto start = std::chrono::steady_clock::now();
        try {
            const ModelParams params = params_at(spec, axis_values[i]);
            params.validate();
            rows[i] = evaluate_point(spec, params, status.seed);
            ok[i] = 1;
            status.ok = true;
        } catch (const NotConverged& e) {
            status.error = e.what();
            status.nonconverged = true;
        } catch (const std::exception& e) {
            status.error = e.what();
        }
        status.wall_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    });

    for (std::size_t i = 0; i < count; ++i) {
        if (ok[i]) {
            result.rows.push_back(rows[i]);
        } else {
            result.all_ok = false;
            if (result.points[i].nonconverged) result.any_nonconverged = true;
        }
    }
    return result;
}

std::string csv_header() {
    return "method,K,N,U,mu,mu_prime,publisher_policy,peer_policy,shield,gamma,"
           "throughput,ci_halfwidth,iterations,residual,seed";
}

std::string csv_row(const ResultRow& row) {
    const ModelParams& p = row.params;
    std::string line;
    line += to_string(row.method);
    line += ',' + std::to_string(p.blocks);
    line += ',' + std::to_string(p.peers);
    line += ',' + fmt12(p.publisher_capacity);
    line += ',' + fmt12(p.peer_rate);
    line += ',' + fmt12(p.endgame_rate);
    line += ',';
    line += to_string(p.publisher_policy);
    line += ',';
    line += to_string(p.peer_policy);
    line += ',';
    line += p.shield_newcomers ? "true" : "false";
    line += ',' + fmt12(p.linger_rate);
    line += ',' + fmt12(row.throughput);
    line += ',';
    if (row.has_ci) line += fmt12(row.ci_halfwidth);
    line += ',';
    if (row.has_residual) line += std::to_string(row.iterations);
    line += ',';
    if (row.has_residual) line += fmt12(row.residual);
    line += ',';
    if (row.has_seed) line += std::to_string(row.seed);
    return line;
}

void write_csv(const RunResult& result, std::ostream& out) {
    out << csv_header() << '\n';
    for (const ResultRow& row : result.rows) out << csv_row(row) << '\n';
}

namespace {

json params_to_json(const ModelParams& p) {
    return json{{"blocks", p.blocks},
                {"peers", p.peers},
                {"publisher-capacity", p.publisher_capacity},
                {"peer-rate", p.peer_rate},
                {"endgame-rate", p.endgame_rate},
                {"publisher-policy", to_string(p.publisher_policy)},
                {"peer-policy", to_string(p.peer_policy)},
                {"shield-newcomers", p.shield_newcomers},
                {"linger-rate", std::isinf(p.linger_rate) ? json("inf") : json(p.linger_rate)}};
}

json spec_to_json(const ExperimentSpec& spec) {
    json j{{"name", spec.name},
           {"method", to_string(spec.method)},
           {"params", params_to_json(spec.params)},
           {"rng-seed", spec.rng_seed},
           {"horizon", spec.horizon},
           {"warmup", spec.warmup},
           {"replications", spec.replications},
           {"out", spec.output_path}};
    if (spec.sweep)
        j["sweep"] = json{{"axis", to_string(spec.sweep->axis)},
                          {"from", spec.sweep->from},
                          {"to", spec.sweep->to},
                          {"step", spec.sweep->step}};
    return j;
}

ModelParams params_from_json(const json& j) {
    ModelParams p;
    p.blocks = j.at("blocks").get<int>();
    p.peers = j.at("peers").get<int>();
    p.publisher_capacity = j.at("publisher-capacity").get<double>();
    p.peer_rate = j.at("peer-rate").get<double>();
    p.endgame_rate = j.at("endgame-rate").get<double>();
    p.publisher_policy = parse_publisher_policy(j.at("publisher-policy").get<std::string>());
    p.peer_policy = parse_peer_policy(j.at("peer-policy").get<std::string>());
    p.shield_newcomers = j.at("shield-newcomers").get<bool>();
    const json& linger = j.at("linger-rate");
    p.linger_rate = linger.is_string() ? std::numeric_limits<double>::infinity()
                                       : linger.get<double>();
    return p;
}

ExperimentSpec spec_from_json(const json& j) {
    ExperimentSpec spec;
    spec.name = j.at("name").get<std::string>();
    spec.method = parse_method(j.at("method").get<std::string>());
    spec.params = params_from_json(j.at("params"));
    spec.rng_seed = j.at("rng-seed").get<std::uint64_t>();
    spec.horizon = j.at("horizon").get<double>();
    spec.warmup = j.at("warmup").get<double>();
    spec.replications = j.at("replications").get<int>();
    spec.output_path = j.at("out").get<std::string>();
    if (j.contains("sweep")) {
        SweepSpec sweep;
        sweep.axis = parse_sweep_axis(j["sweep"].at("axis").get<std::string>());
        sweep.from = j["sweep"].at("from").get<double>();
        sweep.to = j["sweep"].at("to").get<double>();
        sweep.step = j["sweep"].at("step").get<double>();
        spec.sweep = sweep;
    }
    return spec;
}

json manifest_json(const RunResult& result) {
    json points = json::array();
    for (const PointStatus& p : result.points) {
        json entry{{"index", p.index},
                   {"axis_value", p.axis_value},
                   {"status", p.ok ? "ok" : (p.nonconverged ? "nonconverged" : "error")},
                   {"seed", p.seed},
                   {"wall_ms", p.wall_ms}};
        if (!p.ok) entry["error"] = p.error;
        points.push_back(std::move(entry));
    }
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    return json{{"version", kVersion},
                {"created_unix_ms",
                 std::chrono::duration_cast<std::chrono::milliseconds>(now).count()},
                {"spec", spec_to_json(result.spec)},
                {"points", std::move(points)}};
}

} // namespace

void write_manifest(const RunResult& result, std::ostream& out) {
    out << manifest_json(result).dump(2) << '\n';
}

void write_outputs(const RunResult& result) {
    const std::filesystem::path csv_path(result.spec.output_path);
    if (csv_path.has_parent_path()) std::filesystem::create_directories(csv_path.parent_path());
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
    write_csv(result, csv);
    std::ofstream manifest(csv_path.string() + ".manifest.json");
    if (!manifest) throw std::runtime_error("cannot write manifest next to " + csv_path.string());
    write_manifest(result, manifest);
}

std::vector<ComparisonRow> compare_runs(const RunResult& a, const RunResult& b) {
    const bool a_swept = a.spec.sweep.has_value();
    const bool b_swept = b.spec.sweep.has_value();
    if (a_swept != b_swept) throw AxisMismatch("compare: one run sweeps, the other does not");
    if (a_swept && a.spec.sweep->axis != b.spec.sweep->axis)
        throw AxisMismatch("compare: sweep axes differ");
    if (a.points.size() != b.points.size())
        throw AxisMismatch("compare: sweep grids have different sizes");
    for (std::size_t i = 0; i < a.points.size(); ++i)
        if (std::abs(a.points[i].axis_value - b.points[i].axis_value) > 1e-9)
            throw AxisMismatch("compare: sweep grids differ at index " + std::to_string(i));

    // Rows omit failed points; walk them in step with the point lists.
    std::vector<ComparisonRow> joined;
    std::size_t row_a = 0, row_b = 0;
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        const bool ok_a = a.points[i].ok;
        const bool ok_b = b.points[i].ok;
        if (ok_a && ok_b) {
            ComparisonRow row;
            row.axis_value = a.points[i].axis_value;
            row.value_a = a.rows[row_a].throughput;
            row.value_b = b.rows[row_b].throughput;
            row.relative_error =
                std::abs(row.value_a - row.value_b) / std::max(std::abs(row.value_b), 1e-300);
            joined.push_back(row);
        }
        if (ok_a) ++row_a;
        if (ok_b) ++row_b;
    }
    return joined;
}

void write_comparison_csv(const RunResult& a, const RunResult& b,
                          const std::vector<ComparisonRow>& rows, std::ostream& out) {
    const char* axis = a.spec.sweep ? to_string(a.spec.sweep->axis) : "point";
    out << "method_a,method_b,axis,axis_value,throughput_a,throughput_b,relative_error\n";
    for (const ComparisonRow& row : rows) {
        out << to_string(a.spec.method) << ',' << to_string(b.spec.method) << ',' << axis << ','
            << fmt12(row.axis_value) << ',' << fmt12(row.value_a) << ',' << fmt12(row.value_b)
            << ',' << fmt12(row.relative_error) << '\n';
    }
}

ExperimentSpec parse_spec(std::istream& in, const std::string& name) {
    ExperimentSpec spec;
    spec.name = name;
    std::string line;
    std::size_t line_no = 0;
    bool in_section = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = trim(line.substr(0, line.find('#')));
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text != "[experiment]")
                throw SpecError("line " + std::to_string(line_no),
                                "unknown section " + text + " (expected [experiment])");
            if (in_section)
                throw SpecError("line " + std::to_string(line_no),
                                "one experiment per file");
            in_section = true;
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw SpecError("line " + std::to_string(line_no), "expected key = value");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key == "name") {
            spec.name = value;
        } else if (key == "method") {
            spec.method = parse_method(value);
        } else if (key == "blocks") {
            spec.params.blocks = static_cast<int>(parse_int(key, value));
        } else if (key == "peers") {
            spec.params.peers = static_cast<int>(parse_int(key, value));
        } else if (key == "publisher-capacity") {
            spec.params.publisher_capacity = parse_double(key, value);
        } else if (key == "peer-rate") {
            spec.params.peer_rate = parse_double(key, value);
        } else if (key == "endgame-rate") {
            spec.params.endgame_rate = parse_double(key, value);
        } else if (key == "publisher-policy") {
            spec.params.publisher_policy = parse_publisher_policy(value);
        } else if (key == "peer-policy") {
            spec.params.peer_policy = parse_peer_policy(value);
        } else if (key == "shield-newcomers") {
            spec.params.shield_newcomers = parse_bool(key, value);
        } else if (key == "linger-rate") {
            spec.params.linger_rate = parse_double(key, value);
        } else if (key == "sweep") {
            spec.sweep = parse_sweep(value);
        } else if (key == "rng-seed") {
            spec.rng_seed = static_cast<std::uint64_t>(parse_int(key, value));
        } else if (key == "horizon") {
            spec.horizon = parse_double(key, value);
        } else if (key == "warmup") {
            spec.warmup = parse_double(key, value);
        } else if (key == "replications") {
            spec.replications = static_cast<int>(parse_int(key, value));
        } else if (key == "out") {
            spec.output_path = value;
        } else {
            throw SpecError("line " + std::to_string(line_no), "unknown key '" + key + "'");
        }
    }
    return spec;
}

ExperimentSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecError("file", "cannot open " + path);
    if (path.size() > 5 && path.substr(path.size() - 5) == ".json") {
        json manifest = json::parse(in);
        return spec_from_json(manifest.contains("spec") ? manifest["spec"] : manifest);
    }
    return parse_spec(in, std::filesystem::path(path).stem().string());
}

std::string format_spec(const ExperimentSpec& spec) {
    std::ostringstream out;
    out << "[experiment]\n";
    out << "name = " << spec.name << '\n';
    out << "method = " << to_string(spec.method) << '\n';
    out << "blocks = " << spec.params.blocks << '\n';
    out << "peers = " << spec.params.peers << '\n';
    out << "publisher-capacity = " << fmt12(spec.params.publisher_capacity) << '\n';
    out << "peer-rate = " << fmt12(spec.params.peer_rate) << '\n';
    out << "endgame-rate = " << fmt12(spec.params.endgame_rate) << '\n';
    out << "publisher-policy = " << to_string(spec.params.publisher_policy) << '\n';
    out << "peer-policy = " << to_string(spec.params.peer_policy) << '\n';
    out << "shield-newcomers = " << (spec.params.shield_newcomers ? "true" : "false") << '\n';
    out << "linger-rate = " << fmt12(spec.params.linger_rate) << '\n';
    if (spec.sweep)
        out << "sweep = " << to_string(spec.sweep->axis) << ':' << fmt12(spec.sweep->from) << ':'
            << fmt12(spec.sweep->to) << ':' << fmt12(spec.sweep->step) << '\n';
    out << "rng-seed = " << spec.rng_seed << '\n';
    out << "horizon = " << fmt12(spec.horizon) << '\n';
    out << "warmup = " << fmt12(spec.warmup) << '\n';
    out << "replications = " << spec.replications << '\n';
    if (!spec.output_path.empty()) out << "out = " << spec.output_path << '\n';
    return out.str();
}

} // namespace swarmcap
