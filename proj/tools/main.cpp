#include <csignal>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "ghal/config.hpp"
#include "ghal/harness.hpp"
#include "ghal/server.hpp"
#include "ghal/trace.hpp"

using namespace ghal;

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
    if (p.has_parent_path()) {
        std::filesystem::create_directories(p.parent_path());
    }
    std::ofstream out(p, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + p.string());
    }
    return out;
}

struct Common {
    std::filesystem::path config;
    std::optional<std::uint64_t> seed;

    ExperimentConfig load() const {
        ExperimentConfig cfg = config.empty() ? default_config("maps") : load_config(config);
        apply_env_overrides(cfg);
        if (seed) {
            cfg.base_seed = *seed;
        }
        return cfg;
    }
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("-c,--config", c.config, "INI config file (defaults when omitted)")->check(CLI::ExistingFile);
    cmd->add_option("--seed", c.seed, "seed override (base seed; learner seed for train)");
}

SessionServer* g_server = nullptr;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GHAL360 target-search simulator and experiment harness"};
    app.require_subcommand(1);

    Common train_c;
    std::filesystem::path train_out = "qtable.ghqt";
    std::filesystem::path train_curve;
    auto* train_cmd = app.add_subcommand("train", "train the guidance policy by Q-learning");
    add_common(train_cmd, train_c);
    train_cmd->add_option("-o,--out", train_out, "Q-table output file");
    train_cmd->add_option("--curve", train_curve, "per-episode training reward CSV");

    Common solve_c;
    std::filesystem::path solve_out = "oracle.ghqt";
    double solve_tol = 1e-9;
    auto* solve_cmd = app.add_subcommand("solve", "value-iteration oracle for the abstract MDP");
    add_common(solve_cmd, solve_c);
    solve_cmd->add_option("-o,--out", solve_out, "Q-table output file");
    solve_cmd->add_option("--tol", solve_tol, "convergence tolerance");

    Common eval_c;
    std::filesystem::path eval_out = "checkpoints.csv";
    auto* eval_cmd = app.add_subcommand("eval-checkpoints", "train, then score every checkpoint against FGS");
    add_common(eval_cmd, eval_c);
    eval_cmd->add_option("-o,--out", eval_out, "curve CSV");

    Common exp_c;
    std::filesystem::path exp_out = "results/report";
    std::optional<int> exp_trials;
    std::optional<int> exp_runs;
    std::optional<int> exp_workers;
    std::filesystem::path exp_policy;
    auto* exp_cmd = app.add_subcommand("experiment", "run the system comparison and write reports");
    add_common(exp_cmd, exp_c);
    exp_cmd->add_option("-o,--out", exp_out, "output prefix (<prefix>_time.csv, <prefix>_accuracy.csv, <prefix>.json)");
    exp_cmd->add_option("--trials", exp_trials, "paired trials per map and distance in each run");
    exp_cmd->add_option("--runs", exp_runs, "number of runs");
    exp_cmd->add_option("--workers", exp_workers, "worker threads (0 = all cores)");
    exp_cmd->add_option("--policy", exp_policy, "Q-table for RLGS/GHAL360 instead of training")->check(CLI::ExistingFile);

    Common trial_c;
    std::filesystem::path trial_map;
    std::string trial_system = "GHAL360";
    double trial_distance = 8.0;
    std::filesystem::path trial_policy;
    std::filesystem::path trial_out = "trial.jsonl";
    auto* trial_cmd = app.add_subcommand("trial", "run one trial and write its trace");
    add_common(trial_cmd, trial_c);
    trial_cmd->add_option("--map", trial_map, "map file")->required()->check(CLI::ExistingFile);
    trial_cmd->add_option("--system", trial_system, "MFO, ADV, FGS, RLGS or GHAL360");
    trial_cmd->add_option("--distance", trial_distance, "start distance to the target (m)");
    trial_cmd->add_option("--policy", trial_policy, "Q-table (trained when omitted)")->check(CLI::ExistingFile);
    trial_cmd->add_option("-o,--out", trial_out, "trace output file");

    std::filesystem::path replay_trace;
    std::filesystem::path replay_map;
    std::filesystem::path replay_out;
    auto* replay_cmd = app.add_subcommand("replay", "render a trace log as text frames");
    replay_cmd->add_option("trace", replay_trace, "trace file")->required()->check(CLI::ExistingFile);
    replay_cmd->add_option("--map", replay_map, "map file the trace was recorded on")->required()->check(
        CLI::ExistingFile);
    replay_cmd->add_option("-o,--out", replay_out, "write frames here instead of stdout");

    Common serve_c;
    std::filesystem::path serve_map;
    std::filesystem::path serve_policy;
    std::string serve_system = "GHAL360";
    ServerOptions serve_opts;
    auto* serve_cmd = app.add_subcommand("serve", "teleoperation session server (WebSocket /session)");
    add_common(serve_cmd, serve_c);
    serve_cmd->add_option("--map", serve_map, "map file")->required()->check(CLI::ExistingFile);
    serve_cmd->add_option("--policy", serve_policy, "Q-table (trained when omitted)")->check(CLI::ExistingFile);
    serve_cmd->add_option("--system", serve_system, "interface mode");
    serve_cmd->add_option("--address", serve_opts.address, "bind address");
    serve_cmd->add_option("--port", serve_opts.port, "TCP port");
    serve_cmd->add_option("--cadence-ms", serve_opts.cadence_ms, "idle tick period, 0 disables");
    serve_cmd->add_option("--trace-dir", serve_opts.trace_dir, "write each session's trace here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train_cmd) {
            ExperimentConfig cfg = train_c.load();
            if (train_c.seed) {
                cfg.learner.seed = *train_c.seed;
            }
            const TrainingResult tr = train(cfg.mdp, cfg.scenario, cfg.learner);
            save_qtable(tr.q, train_out);
            if (!train_curve.empty()) {
                auto out = open_out(train_curve);
                out << "episode,reward\n";
                for (std::size_t e = 0; e < tr.curve.size(); ++e) {
                    out << e + 1 << ',' << round6(tr.curve[e]) << '\n';
                }
            }
            std::cout << "trained " << cfg.learner.episodes << " episodes -> " << train_out.string() << '\n';
        } else if (*solve_cmd) {
            const ExperimentConfig cfg = solve_c.load();
            save_qtable(solve_value_iteration(cfg.mdp, cfg.learner.gamma, solve_tol), solve_out);
            std::cout << "value iteration -> " << solve_out.string() << '\n';
        } else if (*eval_cmd) {
            ExperimentConfig cfg = eval_c.load();
            if (eval_c.seed) {
                cfg.learner.seed = *eval_c.seed;
            }
            const TrainingResult tr = train(cfg.mdp, cfg.scenario, cfg.learner);
            const CheckpointCurve curve = evaluate_checkpoints(tr.checkpoints, cfg.scenario, cfg.mdp, cfg.eval);
            auto out = open_out(eval_out);
            emit_curve_csv(out, curve, cfg.learner.checkpoint_every);
            std::cout << curve.scores.size() << " checkpoints -> " << eval_out.string() << "  (final "
                      << round6(curve.scores.back()) << ", FGS " << round6(curve.fgs_reference) << ")\n";
        } else if (*exp_cmd) {
            ExperimentConfig cfg = exp_c.load();
            if (exp_trials) {
                cfg.trials_per_run = *exp_trials;
            }
            if (exp_runs) {
                cfg.runs = *exp_runs;
            }
            if (exp_workers) {
                cfg.workers = *exp_workers;
            }
            if (!exp_policy.empty()) {
                cfg.policy = exp_policy;
            }
            const ExperimentReport rep = run_experiment(cfg);
            if (exp_out.has_parent_path()) {
                std::filesystem::create_directories(exp_out.parent_path());
            }
            emit_report(rep, exp_out);
            emit_time_csv(std::cout, rep);
            emit_accuracy_csv(std::cout, rep);
        } else if (*trial_cmd) {
            ExperimentConfig cfg = trial_c.load();
            const World world = load_map_file(trial_map);
            const SystemKind kind = parse_system_kind(trial_system);
            if (!trial_policy.empty()) {
                cfg.policy = trial_policy;
            }
            const PolicySource policy = obtain_policy(cfg);
            Rng rng(derive_seed(cfg.base_seed, 0));
            const RobotPose start = sample_start_poses(world, trial_distance, 1, rng).front();
            const TrialSetup setup{start, *world.geodesic_to_target(start.cell), derive_seed(cfg.base_seed, 1)};
            TrialConfig tc = cfg.trial;
            tc.record_trace = true;
            const TrialResult r = run_trial(kind, world, &policy.policy, tc, setup);
            write_trace(trial_out, make_trace(r, world.name(), setup, tc));
            std::cout << to_string(kind) << ": " << (r.success ? "found" : "not found") << " after " << r.ticks
                      << " ticks -> " << trial_out.string() << '\n';
        } else if (*replay_cmd) {
            const World world = load_map_file(replay_map);
            const TraceLog log = read_trace(replay_trace);
            if (log.header.map != world.name()) {
                throw std::runtime_error("trace was recorded on map '" + log.header.map + "', not '" + world.name() +
                                         "'");
            }
            if (replay_out.empty()) {
                render_trace(std::cout, world, log);
            } else {
                auto out = open_out(replay_out);
                render_trace(out, world, log);
            }
        } else if (*serve_cmd) {
            ExperimentConfig cfg = serve_c.load();
            const World world = load_map_file(serve_map);
            if (!serve_policy.empty()) {
                cfg.policy = serve_policy;
            }
            const PolicySource policy = obtain_policy(cfg);
            serve_opts.session.system = parse_system_kind(serve_system);
            serve_opts.session.trial = cfg.trial;
            serve_opts.session.seed = cfg.base_seed;
            SessionServer server(world, &policy.policy, serve_opts);
            g_server = &server;
            std::signal(SIGINT, [](int) {
                if (g_server != nullptr) {
                    g_server->stop();
                }
            });
            std::cout << "serving " << world.name() << " on ws://" << serve_opts.address << ':' << server.port()
                      << "/session" << std::endl;
            server.run();
            g_server = nullptr;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
