// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fail.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "ghal/config.hpp"
#include "ghal/harness.hpp"
#include "ghal/intent_filter.hpp"
#include "ghal/qlearning.hpp"
#include "ghal/trace.hpp"

using namespace ghal;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int digits = 1) {
    std::ostringstream ss;
    ss.setf(std::ios::fixed);
    ss.precision(digits);
    ss << v;
    return ss.str();
}

double pooled(double a, double b) { return std::sqrt((a * a + b * b) / 2.0); }

// Table lookup written from the reward specification, independent of reward().
double table_reward(GuidanceAction a, WedgeValue landed) {
    const int v = static_cast<int>(landed);
    if (a == GuidanceAction::confirm) {
        return (v == 2 || v == 3) ? 250.0 : -250.0;
    }
    return (v == 0 || v == 2) ? -3.0 : -15.0;
}

Outcome reward_table() {
    const MdpConfig cfg;
    long checked = 0;
    for (std::uint32_t i = 0; i < kStateCount; ++i) {
        const EgoState s = decode_state(i);
        for (auto a : kAllActions) {
            for (auto b : {TransitionBranch::comply, TransitionBranch::drift_left, TransitionBranch::drift_right}) {
                if (a == GuidanceAction::confirm && b != TransitionBranch::comply) {
                    continue;
                }
                const EgoState next = transition_with(s, a, b);
                // landing wedge from positional digits, not the codec
                const int shift = a == GuidanceAction::confirm      ? 0
                                  : b == TransitionBranch::comply    ? (a == GuidanceAction::left ? 1 : 7)
                                  : b == TransitionBranch::drift_left ? 1
                                                                      : 7;
                const auto landed = static_cast<WedgeValue>((i >> (2 * shift)) & 3U);
                if (next[0] != landed || reward(s, a, next, cfg) != table_reward(a, landed)) {
                    return {false, "mismatch at state " + std::to_string(i)};
                }
                ++checked;
            }
        }
    }
    return {true, std::to_string(checked) + " (state, action, branch) triples"};
}

Outcome codec() {
    for (std::uint32_t i = 0; i < kStateCount; ++i) {
        const EgoState s = decode_state(i);
        std::uint32_t idx = 0;
        for (int k = 7; k >= 0; --k) {
            idx = idx * 4 + static_cast<std::uint32_t>(s[k]);
        }
        if (idx != i || encode_state(s) != i) {
            return {false, "round trip fails at " + std::to_string(i)};
        }
    }
    Rng rng(20200101);
    for (int n = 0; n < 10000; ++n) {
        WedgeVector v;
        for (auto& x : v.values) {
            x = static_cast<WedgeValue>(rng.below(4));
        }
        const int f = rng.below_int(8);
        const EgoState e = to_egocentric(v, WedgeIndex(f));
        for (int k = 0; k < 8; ++k) {
            if (e[k] != v.values[static_cast<std::size_t>((f + k) % 8)]) {
                return {false, "rotation law fails"};
            }
        }
    }
    return {true, "65536 states round-trip; rotation law on 10000 pairs"};
}

// Every state the scenario generator can emit: one target wedge, any clutter.
std::vector<StateIndex> generator_support() {
    std::vector<StateIndex> out;
    for (std::uint32_t i = 0; i < kStateCount; ++i) {
        int targets = 0;
        for (int k = 0; k < 8; ++k) {
            targets += ((i >> (2 * k)) & 2U) != 0 ? 1 : 0;
        }
        if (targets == 1) {
            out.push_back(static_cast<StateIndex>(i));
        }
    }
    return out;
}

Outcome oracle_agreement() {
    const MdpConfig mdp;
    const LearnerConfig base;
    const QTable oracle = solve_value_iteration(mdp, base.gamma, 1e-10);
    const auto support = generator_support();
    std::string detail = std::to_string(support.size()) + " states:";
    bool pass = true;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        LearnerConfig lc = base;
        lc.seed = seed;
        const QTable q = train(mdp, {}, lc).q;
        int agree = 0;
        for (StateIndex s : support) {
            const GuidanceAction a = q.argmax(s);
            agree += oracle.at(s, a) >= oracle.max_value(s) - 1e-6 ? 1 : 0;
        }
        const double frac = static_cast<double>(agree) / static_cast<double>(support.size());
        pass = pass && frac >= 0.95;
        detail += " " + fmt(100.0 * frac, 1) + "%";
    }
    return {pass, detail};
}

Outcome learning_curve() {
    const ExperimentConfig cfg = default_config();
    int late_wins = 0;
    int early_dips = 0;
    std::string detail;
    double fgs = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        LearnerConfig lc = cfg.learner;
        lc.seed = seed;
        const TrainingResult tr = train(cfg.mdp, cfg.scenario, lc);
        const CheckpointCurve c = evaluate_checkpoints(tr.checkpoints, cfg.scenario, cfg.mdp, cfg.eval);
        fgs = c.fgs_reference;
        double first = 0.0;
        double last = 0.0;
        bool all_below = true;
        for (int k = 0; k < 10; ++k) {
            first += c.scores[static_cast<std::size_t>(k)] / 10.0;
            last += c.scores[c.scores.size() - 10 + static_cast<std::size_t>(k)] / 10.0;
            all_below = all_below && c.scores[static_cast<std::size_t>(k)] < c.fgs_reference;
        }
        late_wins += last > c.fgs_reference ? 1 : 0;
        early_dips += all_below ? 1 : 0;
        detail += " s" + std::to_string(seed) + " " + fmt(first) + "/" + fmt(last, 2);
    }
    return {late_wins >= 4 && early_dips >= 4, "FGS " + fmt(fgs, 2) + "; first10/last10:" + detail + "; late wins " +
                                                    std::to_string(late_wins) + "/5, early dips " +
                                                    std::to_string(early_dips) + "/5"};
}

Outcome completion_time(const ExperimentReport& r, const std::vector<std::string>& maps) {
    bool pass = true;
    int growing = 0;
    std::string detail;
    for (const auto& m : maps) {
        auto t = [&](SystemKind s, double d) -> const TimeCell& { return r.time(m, s, d); };
        const TimeCell& g = t(SystemKind::GHAL360, 12);
        const TimeCell& rl = t(SystemKind::RLGS, 12);
        const TimeCell& f = t(SystemKind::FGS, 12);
        const TimeCell& adv = t(SystemKind::ADV, 12);
        const TimeCell& mfo = t(SystemKind::MFO, 12);
        const bool ordered = g.mean_time_s <= rl.mean_time_s + pooled(g.std_time_s, rl.std_time_s) &&
                             rl.mean_time_s <= f.mean_time_s + pooled(rl.std_time_s, f.std_time_s) &&
                             f.mean_time_s < std::min(adv.mean_time_s, mfo.mean_time_s);
        pass = pass && ordered;
        double gaps[3];
        int i = 0;
        for (double d : {4.0, 8.0, 12.0}) {
            gaps[i++] = t(SystemKind::RLGS, d).mean_time_s - t(SystemKind::GHAL360, d).mean_time_s;
        }
        const bool grows = gaps[0] <= gaps[1] && gaps[1] <= gaps[2];
        growing += grows ? 1 : 0;
        detail += " " + m + " " + fmt(g.mean_time_s) + "/" + fmt(rl.mean_time_s) + "/" + fmt(f.mean_time_s) + "/" +
                  fmt(std::min(adv.mean_time_s, mfo.mean_time_s)) + (ordered ? "" : "(order!)") + " gap " +
                  fmt(gaps[0]) + ">" + fmt(gaps[1]) + ">" + fmt(gaps[2]) + (grows ? "" : "(!)") + ";";
    }
    pass = pass && growing >= 2;
    return {pass, "12 m GHAL/RLGS/FGS/min(ADV,MFO) s:" + detail + " gap grows on " + std::to_string(growing) + "/3"};
}

Outcome accuracy(const ExperimentReport& r, const std::vector<std::string>& maps) {
    struct Pooled {
        double mean = 0.0;
        double sd = 0.0;
    };
    auto pool = [&](SystemKind s) {
        const std::size_t runs = r.accuracy_of(maps[0], s).run_values.size();
        RunningStats st;
        for (std::size_t run = 0; run < runs; ++run) {
            double v = 0.0;
            for (const auto& m : maps) {
                v += r.accuracy_of(m, s).run_values[run] / static_cast<double>(maps.size());
            }
            st.add(v);
        }
        return Pooled{st.mean(), st.stddev()};
    };
    const Pooled g = pool(SystemKind::GHAL360);
    const Pooled rl = pool(SystemKind::RLGS);
    const Pooled f = pool(SystemKind::FGS);
    const Pooled adv = pool(SystemKind::ADV);
    const Pooled mfo = pool(SystemKind::MFO);
    const bool c1 = g.mean >= rl.mean;
    const bool c2 = rl.mean > f.mean;
    const bool c3 = f.mean > std::max(adv.mean, mfo.mean);
    const double band = 2.0 * pooled(g.sd, f.sd);
    const bool c4 = g.mean - f.mean > band;
    std::string detail = "GHAL " + fmt(g.mean, 3) + " RLGS " + fmt(rl.mean, 3) + " FGS " + fmt(f.mean, 3) + " ADV " +
                         fmt(adv.mean, 3) + " MFO " + fmt(mfo.mean, 3) + "; GHAL>=RLGS " + (c1 ? "ok" : "FAILS") +
                         ", RLGS>FGS " + (c2 ? "ok" : "FAILS") + ", FGS>max(ADV,MFO) " + (c3 ? "ok" : "FAILS") +
                         ", GHAL-FGS " + fmt(g.mean - f.mean, 3) + " vs 2 pooled sd " + fmt(band, 3) +
                         (c4 ? " ok" : " FAILS");
    return {c1 && c2 && c3 && c4, detail};
}

Outcome filter() {
    for (int k = 0; k < 8; ++k) {
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            IntentFilter f(FilterConfig{}, seed);
            int n = 0;
            while (n < 10 && !f.estimate().decided()) {
                (void)f.observe({HeadMotion::none, WedgeIndex(k)});
                ++n;
            }
            if (!f.estimate().decided() || !(*f.estimate().wedge == WedgeIndex(k))) {
                return {false, "no convergence for wedge " + std::to_string(k) + " seed " + std::to_string(seed)};
            }
        }
    }
    Rng ops(7);
    Rng rng(8);
    const FilterConfig cfg;
    ParticleSet ps = init_particles(cfg.particles);
    double worst = 0.0;
    for (int step = 0; step < 100000; ++step) {
        const Evidence e{static_cast<HeadMotion>(ops.below(3)), WedgeIndex(ops.below_int(8))};
        switch (ops.below(3)) {
            case 0: ps = predict(ps, e.head_motion, cfg, rng); break;
            case 1: ps = update_weights(ps, e, cfg); break;
            default: ps = resample(ps, rng); break;
        }
        worst = std::max(worst, std::abs(ps.total_weight() - 1.0));
        if (worst > 1e-9) {
            return {false, "weight sum off by " + std::to_string(worst) + " at step " + std::to_string(step)};
        }
    }
    std::ostringstream w;
    w << worst;
    return {true, "8 wedges x 100 seeds within 10 updates; max |sum w - 1| over 1e5 ops = " + w.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    const fs::path cli = GHAL_CLI;
    const fs::path config = GHAL_CONFIG_FILE;
    const fs::path map = fs::path(GHAL_MAP_DIR) / "office.map";
    const fs::path root = fs::temp_directory_path() / "ghal_acceptance_determinism";
    fs::remove_all(root);
    struct Verb {
        std::string name;
        std::string args;  // {out} is replaced by the output directory
        std::vector<std::string> files;
    };
    const std::string c = " -c " + config.string();
    const std::vector<Verb> verbs{
        {"train", "train" + c + " -o {out}/q.ghqt --curve {out}/curve.csv", {"q.ghqt", "curve.csv"}},
        {"solve", "solve" + c + " -o {out}/oracle.ghqt", {"oracle.ghqt"}},
        {"eval-checkpoints", "eval-checkpoints" + c + " -o {out}/checkpoints.csv", {"checkpoints.csv"}},
        {"experiment", "experiment" + c + " -o {out}/report", {"report_time.csv", "report_accuracy.csv", "report.json"}},
        {"trial", "trial" + c + " --map " + map.string() + " --distance 12 -o {out}/trial.jsonl", {"trial.jsonl"}},
        {"replay", "replay {out}/trial.jsonl --map " + map.string() + " -o {out}/frames.txt", {"frames.txt"}},
    };
    std::string detail;
    bool pass = true;
    // Both passes write to the same directory so printed paths match too.
    const fs::path out = root / "out";
    for (const char* keep : {"a", "b"}) {
        fs::create_directories(out);
        for (const auto& v : verbs) {
            std::string args = v.args;
            for (std::size_t pos; (pos = args.find("{out}")) != std::string::npos;) {
                args.replace(pos, 5, out.string());
            }
            const std::string cmd = cli.string() + " " + args + " > " + (out / (v.name + ".stdout")).string();
            if (std::system(cmd.c_str()) != 0) {
                return {false, v.name + " exited with an error"};
            }
        }
        fs::rename(out, root / keep);
    }
    std::size_t files = 0;
    for (const auto& v : verbs) {
        bool same = true;
        for (const auto& f : v.files) {
            const std::string a = slurp(root / "a" / f);
            same = same && !a.empty() && a == slurp(root / "b" / f);
            ++files;
        }
        same = same && slurp(root / "a" / (v.name + ".stdout")) == slurp(root / "b" / (v.name + ".stdout"));
        pass = pass && same;
        detail += " " + v.name + (same ? "" : "(DIFFERS)");
    }
    fs::remove_all(root);
    return {pass, std::to_string(files) + " files + stdout identical across two runs:" + detail};
}

Outcome ablation(const GuidancePolicy& policy, const std::vector<fs::path>& maps) {
    TrialConfig off;
    off.filter.enabled = false;
    const auto seeds = paired_seeds(100, 4242);
    int compared = 0;
    for (const auto& path : maps) {
        const World w = load_map_file(path);
        for (std::size_t k = 0; k < seeds.size(); ++k) {
            Rng rng(derive_seed(seeds[k], 99));
            const double d = (k % 3 + 1) * 4.0;
            const RobotPose start = sample_start_poses(w, d, 1, rng).front();
            const TrialSetup s{start, d, seeds[k]};
            const TrialResult g = run_trial(SystemKind::GHAL360, w, &policy, off, s);
            const TrialResult r = run_trial(SystemKind::RLGS, w, &policy, off, s);
            std::ostringstream a;
            std::ostringstream b;
            for (const auto& t : g.trajectory) {
                a << trace_line(t) << '\n';
            }
            for (const auto& t : r.trajectory) {
                b << trace_line(t) << '\n';
            }
            if (a.str() != b.str() || g.ticks != r.ticks || g.success != r.success) {
                return {false, "traces differ on " + w.name() + " seed index " + std::to_string(k)};
            }
            ++compared;
        }
    }
    return {true, std::to_string(compared) + " paired trials tick-identical (100 seeds x " +
                      std::to_string(maps.size()) + " maps)"};
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](const std::string& name, const std::function<Outcome()>& check) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << " (" << fmt(secs, 1) << " s): " << o.detail
                  << std::endl;
    };

    report("reward-table", reward_table);
    report("codec", codec);
    report("oracle-agreement", oracle_agreement);
    report("learning-curve-vs-fgs", learning_curve);

    // One desk-scale experiment feeds both comparison criteria.
    ExperimentConfig cfg = load_config(GHAL_CONFIG_FILE);
    std::vector<std::string> map_names;
    for (const auto& m : cfg.maps) {
        map_names.push_back(load_map_file(m).name());
    }
    const PolicySource policy = obtain_policy(cfg);
    std::optional<ExperimentReport> rep;
    std::string exp_error;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        rep = run_experiment(cfg, policy);
    } catch (const std::exception& e) {
        exp_error = e.what();
    }
    const double exp_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "  (desk-scale experiment: " << cfg.maps.size() << " maps x " << cfg.systems.size()
              << " systems x " << cfg.distances_m.size() << " distances x " << cfg.trials_per_run << " trials x "
              << cfg.runs << " runs in " << fmt(exp_secs, 1) << " s)" << std::endl;
    auto need_report = [&]() -> const ExperimentReport& {
        if (!rep) {
            throw std::runtime_error("experiment failed: " + exp_error);
        }
        return *rep;
    };
    report("completion-time-ordering", [&] { return completion_time(need_report(), map_names); });
    report("accuracy-ordering", [&] { return accuracy(need_report(), map_names); });
    report("filter-convergence-and-normalization", filter);
    report("cli-determinism", determinism);
    report("ablation-identity", [&] { return ablation(policy.policy, cfg.maps); });

    std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criterion(s) failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
