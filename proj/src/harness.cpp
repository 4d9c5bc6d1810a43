#include "ghal/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <thread>

#include "json.hpp"

namespace ghal {

using nlohmann::json;

namespace {

std::string describe_band(double requested, std::optional<double> nearest) {
    std::string msg = "no free cell at geodesic distance " + std::to_string(requested) + " m";
    if (nearest) {
        msg += "; nearest achievable distance is " + std::to_string(*nearest) + " m";
    } else {
        msg += "; the target is unreachable from every free cell";
    }
    return msg;
}

}  // namespace

EmptyBandError::EmptyBandError(double requested_m, std::optional<double> nearest_m)
    : std::runtime_error(describe_band(requested_m, nearest_m)), nearest_(nearest_m) {}

std::vector<Cell> start_band(const World& world, double distance_m) {
    const double half = world.cell_size() / 2.0 + 1e-9;
    std::vector<Cell> band;
    std::optional<double> nearest;
    for (int r = 0; r < world.grid().rows(); ++r) {
        for (int c = 0; c < world.grid().cols(); ++c) {
            const Cell cell{r, c};
            if (!world.passable(cell)) {
                continue;
            }
            const auto g = world.geodesic_to_target(cell);
            if (!g) {
                continue;
            }
            if (std::abs(*g - distance_m) <= half) {
                band.push_back(cell);
            }
            if (!nearest || std::abs(*g - distance_m) < std::abs(*nearest - distance_m)) {
                nearest = *g;
            }
        }
    }
    if (band.empty()) {
        throw EmptyBandError(distance_m, nearest);
    }
    return band;
}

std::vector<RobotPose> sample_start_poses(const World& world, double distance_m, int n, Rng& rng) {
    if (n < 1) {
        throw std::invalid_argument("sample_start_poses needs n >= 1");
    }
    const auto band = start_band(world, distance_m);
    std::vector<RobotPose> poses;
    poses.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const Cell cell = band[rng.below(band.size())];
        poses.push_back({cell, static_cast<Compass>(rng.below_int(8))});
    }
    return poses;
}

void RunningStats::add(double x) noexcept {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
}

double RunningStats::stddev() const noexcept {
    return n_ < 2 ? 0.0 : std::sqrt(m2_ / static_cast<double>(n_ - 1));
}

const TimeCell& ExperimentReport::time(const std::string& map, SystemKind s, double distance_m) const {
    for (const auto& c : times) {
        if (c.map == map && c.system == s && c.distance_m == distance_m) {
            return c;
        }
    }
    throw std::out_of_range("no time cell for " + map + "/" + std::string(to_string(s)));
}

const AccuracyCell& ExperimentReport::accuracy_of(const std::string& map, SystemKind s) const {
    for (const auto& c : accuracy) {
        if (c.map == map && c.system == s) {
            return c;
        }
    }
    throw std::out_of_range("no accuracy cell for " + map + "/" + std::string(to_string(s)));
}

double completion_time_s(const TrialResult& r, const TrialConfig& cfg) noexcept {
    return r.success ? r.elapsed_s : cfg.budget_ticks * cfg.seconds_per_tick;
}

PolicySource obtain_policy(const ExperimentConfig& cfg) {
    PolicySource src;
    if (!cfg.policy.empty()) {
        src.policy = greedy_policy(load_qtable(cfg.policy));
        return src;
    }
    const TrainingResult tr = train(cfg.mdp, cfg.scenario, cfg.learner);
    src.policy = greedy_policy(tr.q);
    const auto block = static_cast<std::size_t>(cfg.learner.checkpoint_every);
    for (std::size_t b = 0; b + block <= tr.curve.size(); b += block) {
        double sum = 0.0;
        for (std::size_t i = b; i < b + block; ++i) {
            sum += tr.curve[i];
        }
        src.learning_curve.push_back(sum / static_cast<double>(block));
    }
    return src;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    bool needs_policy = false;
    for (auto k : cfg.systems) {
        needs_policy = needs_policy || k == SystemKind::RLGS || k == SystemKind::GHAL360;
    }
    return run_experiment(cfg, needs_policy ? obtain_policy(cfg) : PolicySource{});
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const PolicySource& policy) {
    cfg.validate();
    std::vector<World> worlds;
    worlds.reserve(cfg.maps.size());
    for (const auto& m : cfg.maps) {
        worlds.push_back(load_map_file(m));
    }
    TrialConfig tc = cfg.trial;
    tc.record_trace = false;

    const std::size_t n_maps = worlds.size();
    const std::size_t n_dist = cfg.distances_m.size();
    const auto n_runs = static_cast<std::size_t>(cfg.runs);
    const std::size_t n_sys = cfg.systems.size();
    const auto n_trials = static_cast<std::size_t>(cfg.trials_per_run);

    // Start poses and seeds per (map, distance, run) block, shared by all systems.
    struct Block {
        std::vector<RobotPose> poses;
        std::vector<std::uint64_t> seeds;
    };
    std::vector<Block> blocks(n_maps * n_dist * n_runs);
    for (std::size_t m = 0; m < n_maps; ++m) {
        for (std::size_t d = 0; d < n_dist; ++d) {
            for (std::size_t r = 0; r < n_runs; ++r) {
                const std::uint64_t key =
                    derive_seed(derive_seed(derive_seed(cfg.base_seed, m), 1000 + d), 2000 + r);
                Rng pose_rng(derive_seed(key, 0));
                Block& b = blocks[(m * n_dist + d) * n_runs + r];
                b.poses = sample_start_poses(worlds[m], cfg.distances_m[d], cfg.trials_per_run, pose_rng);
                b.seeds = paired_seeds(cfg.trials_per_run, derive_seed(key, 1));
            }
        }
    }

    // One job per (block, system); each writes only its own slot.
    struct JobResult {
        double time_sum = 0.0;
        int correct = 0;
    };
    const std::size_t n_jobs = blocks.size() * n_sys;
    std::vector<JobResult> results(n_jobs);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t j = next.fetch_add(1);
            if (j >= n_jobs) {
                return;
            }
            try {
                const std::size_t bi = j / n_sys;
                const SystemKind kind = cfg.systems[j % n_sys];
                const std::size_t m = bi / (n_dist * n_runs);
                const std::size_t d = (bi / n_runs) % n_dist;
                const Block& b = blocks[bi];
                JobResult out;
                for (std::size_t t = 0; t < n_trials; ++t) {
                    const TrialSetup setup{b.poses[t], cfg.distances_m[d], b.seeds[t]};
                    const TrialResult res = run_trial(kind, worlds[m], &policy.policy, tc, setup);
                    out.time_sum += completion_time_s(res, tc);
                    out.correct += res.correct ? 1 : 0;
                }
                results[j] = out;
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next.store(n_jobs);
            }
        }
    };
    unsigned n_workers = cfg.workers > 0 ? static_cast<unsigned>(cfg.workers) : std::thread::hardware_concurrency();
    n_workers = std::max(1U, std::min<unsigned>(n_workers, static_cast<unsigned>(n_jobs)));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < n_workers; ++w) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& th : pool) {
        th.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    ExperimentReport rep;
    rep.config_hash = hex64(config_hash(cfg));
    rep.base_seed = cfg.base_seed;
    rep.trials_per_run = cfg.trials_per_run;
    rep.runs = cfg.runs;
    rep.learning_curve = policy.learning_curve;
    const auto job = [&](std::size_t m, std::size_t d, std::size_t r, std::size_t s) -> const JobResult& {
        return results[((m * n_dist + d) * n_runs + r) * n_sys + s];
    };
    for (std::size_t m = 0; m < n_maps; ++m) {
        for (std::size_t s = 0; s < n_sys; ++s) {
            for (std::size_t d = 0; d < n_dist; ++d) {
                TimeCell cell{worlds[m].name(), cfg.systems[s], cfg.distances_m[d], 0.0, 0.0, {}};
                RunningStats st;
                for (std::size_t r = 0; r < n_runs; ++r) {
                    const double mean = job(m, d, r, s).time_sum / static_cast<double>(n_trials);
                    cell.run_means.push_back(mean);
                    st.add(mean);
                }
                cell.mean_time_s = st.mean();
                cell.std_time_s = st.stddev();
                rep.times.push_back(std::move(cell));
            }
            AccuracyCell acc{worlds[m].name(), cfg.systems[s], 0.0, 0.0, {}};
            RunningStats st;
            for (std::size_t r = 0; r < n_runs; ++r) {
                int correct = 0;
                for (std::size_t d = 0; d < n_dist; ++d) {
                    correct += job(m, d, r, s).correct;
                }
                const double v = static_cast<double>(correct) / static_cast<double>(n_trials * n_dist);
                acc.run_values.push_back(v);
                st.add(v);
            }
            acc.mean_accuracy = st.mean();
            acc.std_accuracy = st.stddev();
            rep.accuracy.push_back(std::move(acc));
        }
    }
    return rep;
}

namespace {

std::string fmt6(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 6);
    return {buf, r.ptr};
}

json num6(double v) { return round6(v); }

json list6(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) {
        a.push_back(round6(x));
    }
    return a;
}

}  // namespace

double round6(double v) {
    if (!std::isfinite(v)) {
        return v;
    }
    const std::string s = fmt6(v);
    double out = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), out);
    return out;
}

void emit_time_csv(std::ostream& out, const ExperimentReport& r) {
    out << "# config_hash=" << r.config_hash << " base_seed=" << r.base_seed << '\n';
    out << "map,system,distance_m,mean_time_s,std_time_s\n";
    for (const auto& c : r.times) {
        out << c.map << ',' << to_string(c.system) << ',' << fmt6(c.distance_m) << ',' << fmt6(c.mean_time_s)
            << ',' << fmt6(c.std_time_s) << '\n';
    }
}

void emit_accuracy_csv(std::ostream& out, const ExperimentReport& r) {
    out << "# config_hash=" << r.config_hash << " base_seed=" << r.base_seed << '\n';
    out << "map,system,mean_accuracy,std_accuracy\n";
    for (const auto& c : r.accuracy) {
        out << c.map << ',' << to_string(c.system) << ',' << fmt6(c.mean_accuracy) << ',' << fmt6(c.std_accuracy)
            << '\n';
    }
}

void emit_json(std::ostream& out, const ExperimentReport& r) {
    json j;
    j["config_hash"] = r.config_hash;
    j["base_seed"] = r.base_seed;
    j["trials_per_run"] = r.trials_per_run;
    j["runs"] = r.runs;
    json times = json::array();
    for (const auto& c : r.times) {
        times.push_back({{"map", c.map},
                         {"system", to_string(c.system)},
                         {"distance_m", num6(c.distance_m)},
                         {"mean_time_s", num6(c.mean_time_s)},
                         {"std_time_s", num6(c.std_time_s)},
                         {"run_means", list6(c.run_means)}});
    }
    j["times"] = times;
    json acc = json::array();
    for (const auto& c : r.accuracy) {
        acc.push_back({{"map", c.map},
                       {"system", to_string(c.system)},
                       {"mean_accuracy", num6(c.mean_accuracy)},
                       {"std_accuracy", num6(c.std_accuracy)},
                       {"run_values", list6(c.run_values)}});
    }
    j["accuracy"] = acc;
    j["learning_curve"] = list6(r.learning_curve);
    out << j.dump(2) << '\n';
}

ExperimentReport parse_report_json(std::istream& in) {
    const json j = json::parse(in);
    ExperimentReport r;
    r.config_hash = j.at("config_hash").get<std::string>();
    r.base_seed = j.at("base_seed").get<std::uint64_t>();
    r.trials_per_run = j.at("trials_per_run").get<int>();
    r.runs = j.at("runs").get<int>();
    for (const auto& c : j.at("times")) {
        r.times.push_back({c.at("map").get<std::string>(), parse_system_kind(c.at("system").get<std::string>()),
                           c.at("distance_m").get<double>(), c.at("mean_time_s").get<double>(),
                           c.at("std_time_s").get<double>(), c.at("run_means").get<std::vector<double>>()});
    }
    for (const auto& c : j.at("accuracy")) {
        r.accuracy.push_back({c.at("map").get<std::string>(), parse_system_kind(c.at("system").get<std::string>()),
                              c.at("mean_accuracy").get<double>(), c.at("std_accuracy").get<double>(),
                              c.at("run_values").get<std::vector<double>>()});
    }
    r.learning_curve = j.at("learning_curve").get<std::vector<double>>();
    return r;
}

void emit_report(const ExperimentReport& r, const std::filesystem::path& prefix) {
    auto open = [](const std::filesystem::path& p) {
        std::ofstream out(p, std::ios::binary);
        if (!out) {
            throw std::runtime_error("cannot write " + p.string());
        }
        return out;
    };
    const std::string base = prefix.string();
    {
        auto out = open(base + "_time.csv");
        emit_time_csv(out, r);
    }
    {
        auto out = open(base + "_accuracy.csv");
        emit_accuracy_csv(out, r);
    }
    {
        auto out = open(base + ".json");
        emit_json(out, r);
    }
}

std::vector<EgoState> evaluation_starts(const ScenarioConfig& scenario, const EvalConfig& eval) {
    eval.validate();
    std::vector<EgoState> starts;
    starts.reserve(static_cast<std::size_t>(eval.episodes));
    for (int e = 0; e < eval.episodes; ++e) {
        Rng rng(derive_seed(eval.seed, static_cast<std::uint64_t>(e)));
        starts.push_back(initial_state(scenario, rng));
    }
    return starts;
}

double expected_return(const GuidancePolicy* policy, const std::vector<EgoState>& starts, const MdpConfig& mdp,
                       int horizon) {
    // Closure of the starts under left/right moves; all the recursion touches.
    std::vector<std::int32_t> slot(kStateCount, -1);
    std::vector<EgoState> states;
    auto visit = [&](const EgoState& s) {
        const StateIndex i = encode_state(s);
        if (slot[i] < 0) {
            slot[i] = static_cast<std::int32_t>(states.size());
            states.push_back(s);
        }
    };
    for (const auto& s : starts) {
        visit(s);
    }
    for (std::size_t k = 0; k < states.size(); ++k) {
        const EgoState s = states[k];
        visit(transition_with(s, GuidanceAction::left, TransitionBranch::comply));
        visit(transition_with(s, GuidanceAction::right, TransitionBranch::comply));
    }

    struct Branch {
        std::int32_t next = 0;
        double p = 0.0;
        double r = 0.0;
    };
    const double p_drift = (1.0 - mdp.p_comply) / 2.0;
    const std::size_t n = states.size();
    std::vector<double> confirm_reward(n, 0.0);
    std::vector<std::array<Branch, 3>> branches(n);
    std::vector<bool> confirms(n, false);
    for (std::size_t k = 0; k < n; ++k) {
        const EgoState& s = states[k];
        const GuidanceAction a =
            policy != nullptr ? (*policy)(s) : fgs_action(s).value_or(GuidanceAction::confirm);
        if (a == GuidanceAction::confirm) {
            confirms[k] = true;
            confirm_reward[k] = reward(s, a, s, mdp);
            continue;
        }
        const std::array<std::pair<TransitionBranch, double>, 3> bs{
            {{TransitionBranch::comply, mdp.p_comply},
             {TransitionBranch::drift_left, p_drift},
             {TransitionBranch::drift_right, p_drift}}};
        for (std::size_t b = 0; b < 3; ++b) {
            const EgoState next = transition_with(s, a, bs[b].first);
            branches[k][b] = {slot[encode_state(next)], bs[b].second, reward(s, a, next, mdp)};
        }
    }
    std::vector<double> v(n, 0.0);
    std::vector<double> w(n, 0.0);
    for (int t = 0; t < horizon; ++t) {
        for (std::size_t k = 0; k < n; ++k) {
            if (confirms[k]) {
                w[k] = confirm_reward[k];
                continue;
            }
            double x = 0.0;
            for (const auto& b : branches[k]) {
                x += b.p * (b.r + v[static_cast<std::size_t>(b.next)]);
            }
            w[k] = x;
        }
        std::swap(v, w);
    }
    double sum = 0.0;
    for (const auto& s : starts) {
        sum += v[static_cast<std::size_t>(slot[encode_state(s)])];
    }
    return sum / static_cast<double>(starts.size());
}

double evaluate_policy(const GuidancePolicy* policy, const ScenarioConfig& scenario, const MdpConfig& mdp,
                       const EvalConfig& eval) {
    MdpConfig dyn = mdp;
    dyn.p_comply = eval.p_comply;
    return expected_return(policy, evaluation_starts(scenario, eval), dyn, eval.max_steps);
}

CheckpointCurve evaluate_checkpoints(const std::vector<GuidancePolicy>& checkpoints, const ScenarioConfig& scenario,
                                     const MdpConfig& mdp, const EvalConfig& eval) {
    MdpConfig dyn = mdp;
    dyn.p_comply = eval.p_comply;
    const auto starts = evaluation_starts(scenario, eval);
    CheckpointCurve c;
    c.scores.reserve(checkpoints.size());
    for (const auto& p : checkpoints) {
        c.scores.push_back(expected_return(&p, starts, dyn, eval.max_steps));
    }
    c.fgs_reference = expected_return(nullptr, starts, dyn, eval.max_steps);
    return c;
}

void emit_curve_csv(std::ostream& out, const CheckpointCurve& c, int checkpoint_every) {
    out << "checkpoint,episodes,mean_reward,fgs_reward\n";
    for (std::size_t i = 0; i < c.scores.size(); ++i) {
        out << i + 1 << ',' << (static_cast<long long>(i) + 1) * checkpoint_every << ',' << fmt6(c.scores[i]) << ','
            << fmt6(c.fgs_reference) << '\n';
    }
}

}  // namespace ghal
