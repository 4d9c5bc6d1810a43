#include <filesystem>

#include "doctest.h"
#include "ghal/harness.hpp"
#include "ghal/qlearning.hpp"
#include "ghal/systems.hpp"

using namespace ghal;

namespace {

const std::filesystem::path kMaps = GHAL_MAP_DIR;

const GuidancePolicy& trained_policy() {
    static const GuidancePolicy p = greedy_policy(train({}, {}, {}).q);
    return p;
}

EgoState target_at(int k, std::initializer_list<int> clutter = {}) {
    EgoState s;
    for (int c : clutter) {
        s[c] = WedgeValue::clutter;
    }
    s[k] = contains_clutter(s[k]) ? WedgeValue::target_clutter : WedgeValue::target;
    return s;
}

TrialSetup setup_at(const World& w, double distance, std::uint64_t seed) {
    Rng rng(seed);
    const RobotPose start = sample_start_poses(w, distance, 1, rng).front();
    return {start, *w.geodesic_to_target(start.cell), seed};
}

}  // namespace

TEST_SUITE("systems") {
    TEST_CASE("fgs_action") {
        CHECK(fgs_action(target_at(0)) == GuidanceAction::confirm);
        CHECK(fgs_action(target_at(1)) == GuidanceAction::left);
        CHECK(fgs_action(target_at(7)) == GuidanceAction::right);
        CHECK(fgs_action(target_at(4)) == GuidanceAction::left);
        CHECK(fgs_action(target_at(3, {1, 2})) == GuidanceAction::left);
        CHECK_FALSE(fgs_action(EgoState{}).has_value());
        // nearest of two targets wins
        EgoState two = target_at(6);
        two[3] = WedgeValue::target;
        CHECK(fgs_action(two) == GuidanceAction::right);
    }

    TEST_CASE("indicator_for") {
        const EgoState s = target_at(2);
        CHECK_FALSE(indicator_for(SystemKind::MFO, s, nullptr).has_value());
        CHECK_FALSE(indicator_for(SystemKind::ADV, s, nullptr).has_value());
        CHECK(indicator_for(SystemKind::FGS, s, nullptr) == GuidanceAction::left);
        CHECK(indicator_for(SystemKind::RLGS, s, &trained_policy()) == trained_policy()(s));
        CHECK_FALSE(indicator_for(SystemKind::GHAL360, EgoState{}, &trained_policy()).has_value());
        CHECK_THROWS_AS((void)indicator_for(SystemKind::RLGS, s, nullptr), std::invalid_argument);
    }

    TEST_CASE("execute translates relative to the view") {
        const World w = load_map(".....\n.....\n.....\n", "name: x\ncell_size: 1\ntarget: cup\nobject: cup 0 0\n");
        const RobotPose p{{1, 2}, Compass::east};
        CHECK(execute(w, p, {ControlCommand::forward, WedgeIndex(0)}) == RobotPose{{1, 3}, Compass::east});
        CHECK(execute(w, p, {ControlCommand::forward, WedgeIndex(2)}) == RobotPose{{0, 2}, Compass::east});
        CHECK(execute(w, p, {ControlCommand::backward, WedgeIndex(2)}) == RobotPose{{2, 2}, Compass::east});
        CHECK(execute(w, p, {ControlCommand::backward, WedgeIndex(0)}) == RobotPose{{1, 1}, Compass::east});
        CHECK(execute(w, p, {ControlCommand::rotate_left, WedgeIndex(5)}) == RobotPose{{1, 2}, Compass::north_east});
        CHECK(execute(w, {{1, 1}, Compass::north}, {ControlCommand::forward, WedgeIndex(1)}) ==
              RobotPose{{1, 1}, Compass::north});
        CHECK(execute(w, p, {}) == p);
    }

    TEST_CASE("target visible at the start") {
        const World w = load_map(".......\n", "name: x\ncell_size: 1\ntarget: cup\nobject: cup 0 5\n");
        TrialConfig cfg;
        cfg.detector = cfg.detector.noise_free();
        for (auto k : kAllSystems) {
            const TrialResult r = run_trial(k, w, &trained_policy(), cfg, {{{0, 2}, Compass::east}, 3.0, 9});
            CHECK(r.success);
            CHECK(r.correct);
            CHECK(r.ticks <= 1);
        }
    }

    TEST_CASE("unreachable target fails at the budget") {
        const World w = load_map("...#...\n...#...\n", "name: x\ncell_size: 1\ntarget: cup\nobject: cup 0 6\n");
        TrialConfig cfg;
        cfg.budget_ticks = 60;
        for (auto k : kAllSystems) {
            const TrialResult r = run_trial(k, w, &trained_policy(), cfg, {{{1, 0}, Compass::east}, 0.0, 4});
            CHECK_FALSE(r.success);
            CHECK_FALSE(r.correct);
            CHECK(r.ticks == 60);
            CHECK(completion_time_s(r, cfg) == 120.0);
        }
    }

    TEST_CASE("trial errors") {
        const World w = load_map_file(kMaps / "home.map");
        CHECK_THROWS_AS((void)run_trial(SystemKind::RLGS, w, nullptr, {}, setup_at(w, 8, 1)), std::invalid_argument);
        CHECK_THROWS_AS((void)run_trial(SystemKind::FGS, w, nullptr, {}, {{{0, 0}, Compass::east}, 1, 1}),
                        std::invalid_argument);
    }

    TEST_CASE("trials are deterministic") {
        const World w = load_map_file(kMaps / "office.map");
        for (auto k : kAllSystems) {
            for (std::uint64_t seed = 1; seed <= 5; ++seed) {
                const TrialSetup s = setup_at(w, 8, seed);
                const TrialResult a = run_trial(k, w, &trained_policy(), {}, s);
                const TrialResult b = run_trial(k, w, &trained_policy(), {}, s);
                CHECK(a.trajectory == b.trajectory);
                CHECK(a.human_stream == b.human_stream);
                CHECK(a.ticks == b.ticks);
            }
        }
    }

    TEST_CASE("trial invariants") {
        const World w = load_map_file(kMaps / "corridor.map");
        for (auto k : kAllSystems) {
            for (std::uint64_t seed = 0; seed < 30; ++seed) {
                const TrialResult r = run_trial(k, w, &trained_policy(), {}, setup_at(w, 8, seed));
                REQUIRE(r.trajectory.size() == static_cast<std::size_t>(r.ticks) + 1);
                CHECK(r.elapsed_s == r.ticks * 2.0);
                CHECK((!r.correct || r.success));
                for (const auto& t : r.trajectory) {
                    REQUIRE(w.passable(t.pose.cell));
                    const bool target_seen = [&] {
                        for (auto v : t.detection.values) {
                            if (contains_target(v)) {
                                return true;
                            }
                        }
                        return false;
                    }();
                    if (!t.move) {
                        continue;  // terminating tick
                    }
                    if (shows_indicators(k)) {
                        REQUIRE(t.indicator.has_value() == target_seen);
                    } else {
                        REQUIRE_FALSE(t.indicator.has_value());
                    }
                    if (k == SystemKind::MFO) {
                        REQUIRE(t.human.focus == WedgeIndex(0));
                    }
                    if (k == SystemKind::ADV) {
                        REQUIRE(t.pose.heading == r.trajectory.front().pose.heading);
                    }
                }
            }
        }
    }

    TEST_CASE("paired seeds") {
        CHECK(paired_seeds(20, 5) == paired_seeds(20, 5));
        const auto a = paired_seeds(50, 5);
        const auto b = paired_seeds(50, 6);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i] != b[i]);
        }
        CHECK_THROWS_AS((void)paired_seeds(0, 1), std::invalid_argument);
    }

    TEST_CASE("paired trials draw identical human streams") {
        const World w = load_map_file(kMaps / "home.map");
        const auto seeds = paired_seeds(25, 77);
        for (std::size_t k = 0; k < seeds.size(); ++k) {
            Rng rng(derive_seed(77, k + 1000));
            const RobotPose start = sample_start_poses(w, 8, 1, rng).front();
            const TrialSetup s{start, 8, seeds[k]};
            const TrialResult mfo = run_trial(SystemKind::MFO, w, nullptr, {}, s);
            const TrialResult ghal = run_trial(SystemKind::GHAL360, w, &trained_policy(), {}, s);
            const std::size_t n = std::min(mfo.human_stream.size(), ghal.human_stream.size());
            REQUIRE(mfo.human_stream.size() == 2 * static_cast<std::size_t>(mfo.ticks));
            REQUIRE(ghal.human_stream.size() == 2 * static_cast<std::size_t>(ghal.ticks));
            Rng reference(derive_seed(seeds[k], TrialStreams::human));
            for (std::size_t i = 0; i < n; ++i) {
                REQUIRE(mfo.human_stream[i] == ghal.human_stream[i]);
                REQUIRE(mfo.human_stream[i] == reference.next_u64());
            }
        }
    }

    TEST_CASE("GHAL360 without the filter is RLGS") {
        const World w = load_map_file(kMaps / "home.map");
        TrialConfig off;
        off.filter.enabled = false;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const TrialSetup s = setup_at(w, 12, seed);
            const TrialResult a = run_trial(SystemKind::GHAL360, w, &trained_policy(), off, s);
            const TrialResult b = run_trial(SystemKind::RLGS, w, &trained_policy(), off, s);
            CHECK(a.trajectory == b.trajectory);
        }
    }

    TEST_CASE("MFO and ADV follow the same path") {
        const World w = load_map_file(kMaps / "office.map");
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const TrialSetup s = setup_at(w, 8, seed);
            const TrialResult mfo = run_trial(SystemKind::MFO, w, nullptr, {}, s);
            const TrialResult adv = run_trial(SystemKind::ADV, w, nullptr, {}, s);
            CHECK(mfo.ticks == adv.ticks);
            CHECK(mfo.success == adv.success);
        }
    }
}
