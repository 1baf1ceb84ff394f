#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "swarmcap/params.hpp"
#include "swarmcap/sim.hpp"

namespace swarmcap {

enum class Method { Markov, Queueing, Simulate, Bound };

enum class SweepAxis { Peers, Blocks, PublisherCapacity, EndgameRateInverse, LingerRate };

const char* to_string(Method method);
const char* to_string(SweepAxis axis);
Method parse_method(std::string_view text);
SweepAxis parse_sweep_axis(std::string_view text);

struct SweepSpec {
    SweepAxis axis = SweepAxis::Peers;
    double from = 0.0;
    double to = 0.0;
    double step = 1.0;

    std::vector<double> values() const;  // inclusive ascending grid
};

// "axis:from:to:step", e.g. "N:2:30:1".
SweepSpec parse_sweep(std::string_view text);

// One experiment: a method, a parameter point, and an optional sweep axis.
struct ExperimentSpec {
    std::string name = "experiment";
    Method method = Method::Markov;
    ModelParams params;
    std::optional<SweepSpec> sweep;

    // Simulation knobs (ignored by analytic methods).
    std::uint64_t rng_seed = 1;
    double horizon = 2000.0;
    double warmup = 200.0;
    int replications = 10;

    std::string output_path;  // CSV destination; manifest lands alongside

    void validate() const;  // throws SpecError naming the field
};

// Flat key = value text with one [experiment] section; '#' begins a comment.
ExperimentSpec parse_spec(std::istream& in, const std::string& name);
ExperimentSpec load_spec(const std::string& path);  // .json manifests re-run their echoed spec
std::string format_spec(const ExperimentSpec& spec);

// One CSV row per sweep point. Column order is fixed; floats carry 12
// significant digits; fields that do not apply stay empty.
struct ResultRow {
    ModelParams params;
    Method method = Method::Markov;
    double throughput = 0.0;
    double ci_halfwidth = 0.0;
    bool has_ci = false;
    std::size_t iterations = 0;
    double residual = 0.0;
    bool has_residual = false;
    std::uint64_t seed = 0;
    bool has_seed = false;
};

struct PointStatus {
    std::size_t index = 0;
    double axis_value = 0.0;
    bool ok = false;
    bool nonconverged = false;
    std::string error;
    std::uint64_t seed = 0;
    double wall_ms = 0.0;
};

struct RunResult {
    ExperimentSpec spec;
    std::vector<ResultRow> rows;       // ordered by sweep axis; failed points omitted
    std::vector<PointStatus> points;   // one per sweep point, failures included
    bool all_ok = true;
    bool any_nonconverged = false;
};

// Evaluates every sweep point (worker pool; output order follows the axis),
// recording per-point failures without aborting the run.
RunResult run_experiment(const ExperimentSpec& spec);

std::string csv_header();
std::string csv_row(const ResultRow& row);

// CSV plus the manifest (spec echo, toolkit version, seeds, wall clock,
// per-point status); the manifest lands at `<output>.manifest.json`.
void write_csv(const RunResult& result, std::ostream& out);
void write_manifest(const RunResult& result, std::ostream& out);
void write_outputs(const RunResult& result);

// Joined comparison of two runs over the same sweep grid; throws AxisMismatch
// when the axes or grids differ. Rows where either side failed are dropped.
struct ComparisonRow {
    double axis_value = 0.0;
    double value_a = 0.0;
    double value_b = 0.0;
    double relative_error = 0.0;  // |a - b| / max(|b|, tiny)
};
std::vector<ComparisonRow> compare_runs(const RunResult& a, const RunResult& b);
void write_comparison_csv(const RunResult& a, const RunResult& b,
                          const std::vector<ComparisonRow>& rows, std::ostream& out);

// Transient experiment bundled inside a recipe: empirical CDF of the time to
// enter (or leave) the one-club at the given population fraction.
struct TransientJob {
    std::string metric;  // "enter" | "leave"
    SimConfig config;
    double fraction = 0.9;
};

// Canned experiment recipes named after the report figures they reproduce.
// Parameters the scenario text leaves open are pinned here and listed under
// `assumptions`.
struct Recipe {
    std::string name;
    std::string description;
    std::vector<ExperimentSpec> specs;       // concatenated into one CSV
    std::vector<TransientJob> transients;    // emitted as (metric, policy, U, time, cdf) rows
    std::vector<std::string> assumptions;

    bool transient() const { return !transients.empty(); }
};
std::vector<std::string> recipe_names();
Recipe make_recipe(const std::string& name);

// Executes a recipe and writes its CSV + manifest to `output_path`.
// Returns 0 on success, 3 when any point failed to converge.
int run_recipe(const Recipe& recipe, const std::string& output_path);

} // namespace swarmcap
