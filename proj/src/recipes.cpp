#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "swarmcap/errors.hpp"
#include "swarmcap/experiment.hpp"
#include "swarmcap/version.hpp"

namespace swarmcap {

namespace {

using nlohmann::json;

ExperimentSpec base_spec(std::string name, Method method, int blocks, int peers, double capacity,
                         double peer_rate, double endgame_rate,
                         PublisherPolicy publisher = PublisherPolicy::MostDeprivedRarestBlock,
                         PeerPolicy peer = PeerPolicy::RandomPeer) {
    ExperimentSpec spec;
    spec.name = std::move(name);
    spec.method = method;
    spec.params.blocks = blocks;
    spec.params.peers = peers;
    spec.params.publisher_capacity = capacity;
    spec.params.peer_rate = peer_rate;
    spec.params.endgame_rate = endgame_rate;
    spec.params.publisher_policy = publisher;
    spec.params.peer_policy = peer;
    return spec;
}

SweepSpec sweep(SweepAxis axis, double from, double to, double step) {
    SweepSpec s;
    s.axis = axis;
    s.from = from;
    s.to = to;
    s.step = step;
    return s;
}

TransientJob transient_job(std::string metric, double fraction, PublisherPolicy publisher,
                           double capacity, double peer_rate, int peers, double horizon,
                           int replications, std::uint64_t seed) {
    TransientJob job;
    job.metric = std::move(metric);
    job.fraction = fraction;
    job.config.params.blocks = 3;
    job.config.params.peers = peers;
    job.config.params.publisher_capacity = capacity;
    job.config.params.peer_rate = peer_rate;
    job.config.params.endgame_rate = peer_rate;
    job.config.params.publisher_policy = publisher;
    job.config.params.peer_policy = PeerPolicy::RandomPeer;
    job.config.horizon = horizon;
    job.config.replications = replications;
    job.config.seed = seed;
    job.config.initial =
        job.metric == "enter" ? InitialCondition::AllEmpty : InitialCondition::OneClub;
    return job;
}

} // namespace

std::vector<std::string> recipe_names() {
    return {"fig1",  "fig2a", "fig2b", "fig3",  "fig5a", "fig5b", "fig6a",
            "fig6b", "fig7a", "fig7b", "fig8a", "fig8b", "appD",  "appE"};
}

Recipe make_recipe(const std::string& name) {
    Recipe recipe;
    recipe.name = name;

    if (name == "fig1") {
        recipe.description = "Throughput versus population: near-linear rise, peak, plateau.";
        ExperimentSpec spec = base_spec("fig1-simulate", Method::Simulate, 3, 10, 1.0, 0.5, 0.5);
        spec.sweep = sweep(SweepAxis::Peers, 5, 500, 5);
        spec.horizon = 800;
        spec.warmup = 100;
        spec.replications = 3;
        spec.rng_seed = 1001;
        recipe.specs.push_back(spec);
        recipe.assumptions = {"U=1, mu=mu'=0.5, mdp-rfb publisher (scenario fixes only K=3)",
                              "population grid 5..500 step 5"};
    } else if (name == "fig2a" || name == "fig2b") {
        const bool enter = name == "fig2a";
        recipe.description = enter
            ? "Time until 90% of peers hold everything but the rarest block (empty start)."
            : "Time until half the population leaves the one-club (one-club start).";
        std::uint64_t seed = 2001;
        for (PublisherPolicy publisher :
             {PublisherPolicy::RandomPeerRandomBlock, PublisherPolicy::RandomPeerRarestBlock}) {
            for (double capacity : {0.5, 1.0}) {
                recipe.transients.push_back(
                    transient_job(enter ? "enter" : "leave", enter ? 0.9 : 0.5, publisher,
                                  capacity, 1.0, 15, 100.0, 1000, seed++));
            }
        }
        recipe.assumptions = {"random-peer publisher with both block policies (legend varies them)",
                              "horizon 100, 1000 replications"};
    } else if (name == "fig3") {
        recipe.description = "Publisher policy comparison on the exact chain, K=3.";
        const struct {
            const char* tag;
            PublisherPolicy publisher;
            PeerPolicy peer;
        } combos[] = {
            {"rp-rub", PublisherPolicy::RandomPeerRandomBlock, PeerPolicy::RandomPeer},
            {"rp-rfb", PublisherPolicy::RandomPeerRarestBlock, PeerPolicy::RandomPeer},
            {"mdp-rfb", PublisherPolicy::MostDeprivedRarestBlock, PeerPolicy::RandomPeer},
            {"mdp-rfb-rup", PublisherPolicy::MostDeprivedRarestBlock, PeerPolicy::RandomUsefulPeer},
        };
        for (const auto& combo : combos) {
            ExperimentSpec spec = base_spec(std::string("fig3-") + combo.tag, Method::Markov, 3,
                                            10, 1.0, 0.5, 0.5, combo.publisher, combo.peer);
            spec.sweep = sweep(SweepAxis::Peers, 2, 30, 1);
            recipe.specs.push_back(spec);
        }
        recipe.assumptions = {"population grid 2..30 step 1 (granularity not stated)"};
    } else if (name == "fig5a" || name == "fig5b") {
        const double capacity = name == "fig5a" ? 0.5 : 2.0;
        recipe.description = "Exact chain vs simulation vs queueing plateau, K=3, mu=mu'.";
        ExperimentSpec markov = base_spec(name + "-markov", Method::Markov, 3, 10, capacity, 1.0, 1.0);
        markov.sweep = sweep(SweepAxis::Peers, 2, 30, 1);
        recipe.specs.push_back(markov);
        ExperimentSpec simulate = base_spec(name + "-simulate", Method::Simulate, 3, 10, capacity, 1.0, 1.0);
        simulate.sweep = sweep(SweepAxis::Peers, 50, 250, 50);
        simulate.horizon = 2000;
        simulate.warmup = 200;
        simulate.replications = 8;
        simulate.rng_seed = 5001;
        recipe.specs.push_back(simulate);
        recipe.specs.push_back(base_spec(name + "-queueing", Method::Queueing, 3, 10, capacity, 1.0, 1.0));
        recipe.assumptions = {"U=" + std::to_string(capacity).substr(0, 3) +
                              ", mu=mu'=1 (text pins only the U-mu ordering)"};
    } else if (name == "fig6a") {
        recipe.description = "Queueing throughput is nearly linear in the block count.";
        ExperimentSpec spec = base_spec("fig6a-queueing", Method::Queueing, 3, 10, 1.0, 1.0, 1.0);
        spec.sweep = sweep(SweepAxis::Blocks, 2, 7, 1);
        recipe.specs.push_back(spec);
        recipe.assumptions = {"U=1, mu=mu'=1 pinned"};
    } else if (name == "fig6b") {
        recipe.description = "Queueing throughput is nearly linear in publisher capacity.";
        ExperimentSpec spec = base_spec("fig6b-queueing", Method::Queueing, 3, 10, 1.0, 1.0, 1.0);
        spec.sweep = sweep(SweepAxis::PublisherCapacity, 0.25, 2.0, 0.25);
        recipe.specs.push_back(spec);
        recipe.assumptions = {"K=3, mu=mu'=1 pinned"};
    } else if (name == "fig7a") {
        recipe.description = "Throughput grows with the inverse endgame rate (K=3..7).";
        for (int blocks = 3; blocks <= 7; ++blocks) {
            ExperimentSpec spec = base_spec("fig7a-k" + std::to_string(blocks), Method::Queueing,
                                            blocks, 10, 1.0, 10.0, 1.0);
            spec.sweep = sweep(SweepAxis::EndgameRateInverse, 1, 10, 1);
            recipe.specs.push_back(spec);
        }
        recipe.assumptions = {"U=1, mu=10; endgame rate swept via its inverse 1..10"};
    } else if (name == "fig7b") {
        recipe.description = "Throughput grows with publisher capacity under a reduced endgame rate.";
        for (int blocks = 3; blocks <= 7; ++blocks) {
            ExperimentSpec spec = base_spec("fig7b-k" + std::to_string(blocks), Method::Queueing,
                                            blocks, 10, 1.0, 10.0, 1.0);
            spec.sweep = sweep(SweepAxis::PublisherCapacity, 0.25, 2.0, 0.25);
            recipe.specs.push_back(spec);
        }
        recipe.assumptions = {"mu=10, mu'=1 pinned"};
    } else if (name == "fig8a") {
        recipe.description = "Shielding newcomers when the publisher is slower than peers.";
        const struct {
            const char* tag;
            double endgame;
            bool shield;
        } scenarios[] = {{"base", 10.0, false},
                         {"endgame", 1.0, false},
                         {"shield", 10.0, true},
                         {"shield-endgame", 1.0, true}};
        for (const auto& s : scenarios) {
            ExperimentSpec spec = base_spec(std::string("fig8a-") + s.tag, Method::Markov, 3, 10,
                                            0.1, 10.0, s.endgame);
            spec.params.shield_newcomers = s.shield;
            spec.sweep = sweep(SweepAxis::Peers, 2, 30, 1);
            recipe.specs.push_back(spec);
        }
        recipe.assumptions = {"U=0.1, mu=10 (U < mu case)"};
    } else if (name == "fig8b") {
        recipe.description = "Shielding newcomers barely matters when the publisher is faster.";
        for (bool shield : {false, true}) {
            ExperimentSpec spec = base_spec(std::string("fig8b-") + (shield ? "shield" : "base"),
                                            Method::Markov, 3, 10, 1.0, 0.5, 0.5);
            spec.params.shield_newcomers = shield;
            spec.sweep = sweep(SweepAxis::Peers, 2, 30, 1);
            recipe.specs.push_back(spec);
        }
        recipe.assumptions = {"U=1, mu=mu'=0.5 (U > mu case)"};
    } else if (name == "appD") {
        recipe.description = "Most-deprived publisher enters the one-club later and escapes sooner.";
        std::uint64_t seed = 4001;
        for (PublisherPolicy publisher :
             {PublisherPolicy::RandomPeerRarestBlock, PublisherPolicy::MostDeprivedRarestBlock}) {
            recipe.transients.push_back(
                transient_job("enter", 0.9, publisher, 0.1, 1.0, 15, 200.0, 500, seed++));
            recipe.transients.push_back(
                transient_job("leave", 0.5, publisher, 0.1, 1.0, 15, 200.0, 500, seed++));
        }
        recipe.assumptions = {"U=0.1, mu=mu'=1 (gains grow with the U-mu gap)",
                              "horizon 200, 500 replications"};
    } else if (name == "appE") {
        recipe.description = "Peers lingering as seeds: slow departures keep the swarm scalable.";
        const double rates[] = {0.8, 1.2, 1.5, std::numeric_limits<double>::infinity()};
        for (double gamma : rates) {
            const std::string tag =
                std::isinf(gamma) ? "inf" : std::to_string(gamma).substr(0, 3);
            ExperimentSpec spec = base_spec("appE-gamma-" + tag, Method::Markov, 2, 10, 1.0, 1.0,
                                            1.0, PublisherPolicy::RandomPeerRandomBlock);
            spec.params.linger_rate = gamma;
            spec.sweep = sweep(SweepAxis::Peers, 2, 40, 2);
            recipe.specs.push_back(spec);
        }
        recipe.assumptions = {"linger rates 0.8, 1.2, 1.5 and immediate departure",
                              "population grid 2..40 step 2"};
    } else {
        throw SpecError("recipe", "unknown recipe '" + name + "'");
    }
    return recipe;
}

int run_recipe(const Recipe& recipe, const std::string& output_path) {
    const std::filesystem::path csv_path(output_path);
    if (csv_path.has_parent_path()) std::filesystem::create_directories(csv_path.parent_path());
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot write " + output_path);

    json manifest{{"version", kVersion},
                  {"recipe", recipe.name},
                  {"description", recipe.description},
                  {"assumptions", recipe.assumptions}};
    bool nonconverged = false;

    if (!recipe.transient()) {
        csv << csv_header() << '\n';
        json runs = json::array();
        for (const ExperimentSpec& spec : recipe.specs) {
            const RunResult result = run_experiment(spec);
            for (const ResultRow& row : result.rows) csv << csv_row(row) << '\n';
            std::ostringstream buffer;
            write_manifest(result, buffer);
            runs.push_back(json::parse(buffer.str()));
            nonconverged = nonconverged || result.any_nonconverged;
        }
        manifest["runs"] = std::move(runs);
    } else {
        csv << "metric,publisher_policy,U,time,cdf\n";
        json runs = json::array();
        for (const TransientJob& job : recipe.transients) {
            const TransientResult result =
                job.metric == "enter" ? time_to_one_club(job.config, job.fraction)
                                      : time_to_leave_one_club(job.config, job.fraction);
            for (std::size_t i = 0; i < result.grid.size(); ++i) {
                char line[160];
                std::snprintf(line, sizeof line, "%s,%s,%.12g,%.12g,%.12g", job.metric.c_str(),
                              to_string(job.config.params.publisher_policy),
                              job.config.params.publisher_capacity, result.grid[i],
                              result.cdf[i]);
                csv << line << '\n';
            }
            runs.push_back(json{{"metric", job.metric},
                                {"publisher-policy", to_string(job.config.params.publisher_policy)},
                                {"U", job.config.params.publisher_capacity},
                                {"fraction", job.fraction},
                                {"seed", job.config.seed},
                                {"replications", job.config.replications},
                                {"censored", result.censored}});
        }
        manifest["runs"] = std::move(runs);
    }

    std::ofstream manifest_out(output_path + ".manifest.json");
    if (!manifest_out) throw std::runtime_error("cannot write manifest for " + output_path);
    manifest_out << manifest.dump(2) << '\n';
    return nonconverged ? 3 : 0;
}

} // namespace swarmcap
