// Experiment driver: runs the exact chain, the queueing approximation, the
// simulator or the closed-form bound over parameter sweeps, and emits CSV
// tables plus reproducibility manifests.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "swarmcap/errors.hpp"
#include "swarmcap/experiment.hpp"
#include "swarmcap/version.hpp"

namespace {

using namespace swarmcap;

struct CliOptions {
    ExperimentSpec spec;
    std::string sweep_text;
    std::string spec_file;
};

void add_param_flags(CLI::App* cmd, CliOptions& options, bool with_sim_flags) {
    ModelParams& p = options.spec.params;
    cmd->add_option("--blocks", p.blocks, "File blocks K");
    cmd->add_option("--peers", p.peers, "Population size N");
    cmd->add_option("--publisher-capacity", p.publisher_capacity, "Publisher capacity U");
    cmd->add_option("--peer-rate", p.peer_rate, "Peer upload rate mu");
    cmd->add_option("--endgame-rate", p.endgame_rate, "Upload rate mu' once one block short");
    cmd->add_option_function<std::string>(
        "--publisher-policy",
        [&p](const std::string& v) { p.publisher_policy = parse_publisher_policy(v); },
        "rp-rub | rp-rfb | mdp-rfb");
    cmd->add_option_function<std::string>(
        "--peer-policy", [&p](const std::string& v) { p.peer_policy = parse_peer_policy(v); },
        "rp-rub | rup-rub");
    cmd->add_flag("--shield-newcomers", p.shield_newcomers,
                  "Hide empty peers from other peers (publisher serves them first)");
    cmd->add_option("--linger-rate", p.linger_rate,
                    "Seed departure rate gamma (inf = leave on completion)");
    cmd->add_option("--sweep", options.sweep_text, "Sweep axis:from:to:step (axes N K U mu_prime_inverse gamma)");
    cmd->add_option("--out", options.spec.output_path, "CSV output path (stdout when omitted)");
    if (with_sim_flags) {
        cmd->add_option("--replications", options.spec.replications, "Independent replications");
        cmd->add_option("--horizon", options.spec.horizon, "Simulated time per replication");
        cmd->add_option("--warmup", options.spec.warmup, "Time excluded from statistics");
        cmd->add_option("--rng-seed", options.spec.rng_seed, "Base RNG seed");
    }
}

int emit(const RunResult& result) {
    if (result.spec.output_path.empty()) {
        write_csv(result, std::cout);
    } else {
        write_outputs(result);
        std::cerr << "wrote " << result.spec.output_path << " (+ manifest)\n";
    }
    for (const PointStatus& point : result.points)
        if (!point.ok)
            std::cerr << "point " << point.index << " (axis " << point.axis_value
                      << ") failed: " << point.error << '\n';
    return result.any_nonconverged ? 3 : 0;
}

int run_method(CliOptions& options, Method method) {
    options.spec.method = method;
    options.spec.name = to_string(method);
    if (!options.sweep_text.empty()) options.spec.sweep = parse_sweep(options.sweep_text);
    return emit(run_experiment(options.spec));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Throughput toolkit for closed peer-to-peer swarms"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    CliOptions markov, queueing, simulate, bound;
    add_param_flags(app.add_subcommand("markov", "Exact chain throughput"), markov, false);
    add_param_flags(app.add_subcommand("queueing", "Large-population fixed point"), queueing, false);
    add_param_flags(app.add_subcommand("simulate", "Event-driven simulation"), simulate, true);
    add_param_flags(app.add_subcommand("bound", "Closed-form throughput ceiling"), bound, false);

    auto* run_cmd = app.add_subcommand("run", "Run an experiment spec file (.ini or manifest .json)");
    std::string run_file, run_out;
    run_cmd->add_option("spec", run_file, "Spec or manifest path")->required();
    run_cmd->add_option("--out", run_out, "Override the CSV output path");

    auto* recipe_cmd = app.add_subcommand("recipe", "Run a canned figure recipe (or 'list')");
    std::string recipe_name, recipe_out;
    recipe_cmd->add_option("name", recipe_name, "Recipe name or 'list'")->required();
    recipe_cmd->add_option("--out", recipe_out, "CSV output path");

    auto* compare_cmd = app.add_subcommand("compare", "Join two runs over a shared sweep axis");
    std::string spec_a, spec_b, compare_out;
    compare_cmd->add_option("--spec-a", spec_a, "First spec file")->required();
    compare_cmd->add_option("--spec-b", spec_b, "Second spec file")->required();
    compare_cmd->add_option("--out", compare_out, "Joined CSV path (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand("markov")) return run_method(markov, Method::Markov);
        if (app.got_subcommand("queueing")) return run_method(queueing, Method::Queueing);
        if (app.got_subcommand("simulate")) return run_method(simulate, Method::Simulate);
        if (app.got_subcommand("bound")) return run_method(bound, Method::Bound);

        if (app.got_subcommand("run")) {
            ExperimentSpec spec = load_spec(run_file);
            if (!run_out.empty()) spec.output_path = run_out;
            const RunResult result = run_experiment(spec);
            return emit(result);
        }

        if (app.got_subcommand("recipe")) {
            if (recipe_name == "list") {
                for (const std::string& name : recipe_names()) {
                    const Recipe recipe = make_recipe(name);
                    std::cout << name << ": " << recipe.description << '\n';
                }
                return 0;
            }
            const Recipe recipe = make_recipe(recipe_name);
            const std::string out = recipe_out.empty() ? recipe_name + ".csv" : recipe_out;
            const int code = run_recipe(recipe, out);
            std::cerr << "wrote " << out << " (+ manifest)\n";
            return code;
        }

        if (app.got_subcommand("compare")) {
            const RunResult a = run_experiment(load_spec(spec_a));
            const RunResult b = run_experiment(load_spec(spec_b));
            const auto rows = compare_runs(a, b);
            if (compare_out.empty()) {
                write_comparison_csv(a, b, rows, std::cout);
            } else {
                std::ofstream out(compare_out);
                if (!out) throw std::runtime_error("cannot write " + compare_out);
                write_comparison_csv(a, b, rows, out);
                std::cerr << "wrote " << compare_out << '\n';
            }
            return (a.any_nonconverged || b.any_nonconverged) ? 3 : 0;
        }
    } catch (const NotConverged& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
