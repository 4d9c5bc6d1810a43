#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "ghal/config.hpp"

using namespace ghal;

namespace {

const std::filesystem::path kMaps = GHAL_MAP_DIR;
const std::filesystem::path kConfig = GHAL_CONFIG_FILE;

struct EnvGuard {
    explicit EnvGuard(const char* value) {
        if (value != nullptr) {
            setenv("GHAL_SEED", value, 1);
        } else {
            unsetenv("GHAL_SEED");
        }
    }
    ~EnvGuard() { unsetenv("GHAL_SEED"); }
};

}  // namespace

TEST_SUITE("config") {
    TEST_CASE("shipped config equals the built-in defaults") {
        const ExperimentConfig file = load_config(kConfig);
        const ExperimentConfig defaults = default_config((kConfig.parent_path() / "../maps").lexically_normal());
        CHECK(file == defaults);
        CHECK(file.trials_per_run == 100);
        CHECK(file.runs == 5);
        CHECK(file.distances_m == std::vector<double>{4, 8, 12});
        CHECK(file.systems.size() == 5);
        CHECK(file.maps.size() == 3);
        CHECK(file.learner.episodes == 15000);
        CHECK(file.mdp.p_comply == 0.8);
        CHECK(file.trial.budget_ticks == 300);
        CHECK_FALSE(file.scenario.n_clutter_wedges.has_value());
    }

    TEST_CASE("canonical text round trips") {
        ExperimentConfig c = default_config(kMaps);
        c.trials_per_run = 17;
        c.distances_m = {2.5, 6};
        c.systems = {SystemKind::GHAL360, SystemKind::FGS};
        c.trial.detector.p_false_negative = 0.1;
        c.scenario.n_clutter_wedges = 3;
        c.scenario.target_coincides_clutter = false;
        c.learner.mirror_updates = false;
        c.eval.seed = 99;
        c.mdp.c_small = -2.75;
        const std::string text = to_ini(c);
        CHECK(parse_config(text, "") == c);
        CHECK(to_ini(parse_config(text, "")) == text);
    }

    TEST_CASE("partial files keep defaults and resolve paths") {
        const ExperimentConfig c = parse_config("[experiment]\nmaps = a.map, sub/b.map\nruns = 2\n[learner]\nseed = 4\n",
                                                "/data");
        CHECK(c.maps == std::vector<std::filesystem::path>{"/data/a.map", "/data/sub/b.map"});
        CHECK(c.runs == 2);
        CHECK(c.learner.seed == 4);
        CHECK(c.trials_per_run == 100);
        const ExperimentConfig abs = parse_config("[experiment]\npolicy = /x/q.ghqt\n", "/data");
        CHECK(abs.policy == "/x/q.ghqt");
    }

    TEST_CASE("errors") {
        CHECK_THROWS_AS((void)parse_config("[experiment]\nbogus = 1\n", ""), ConfigError);
        CHECK_THROWS_AS((void)parse_config("[nowhere]\nruns = 1\n", ""), ConfigError);
        CHECK_THROWS_AS((void)parse_config("[experiment]\nruns = many\n", ""), ConfigError);
        CHECK_THROWS_AS((void)parse_config("[experiment]\nruns = 0\n", ""), ConfigError);
        CHECK_THROWS_AS((void)parse_config("[experiment]\nsystems = FGS, HAL\n", ""), ConfigError);
        CHECK_THROWS_AS((void)parse_config("[filter]\nenabled = maybe\n", ""), ConfigError);
        CHECK_THROWS_AS((void)parse_config("[mdp]\np_comply = 2\n", ""), ConfigError);
        CHECK_THROWS_AS((void)parse_config("[scenario]\nn_clutter_wedges = 9\n", ""), ConfigError);
        CHECK_THROWS_AS((void)parse_config("[experiment\n", ""), ConfigError);
        CHECK_THROWS_AS((void)load_config("/nonexistent.ini"), ConfigError);
    }

    TEST_CASE("GHAL_SEED overrides the base seed") {
        ExperimentConfig c = default_config(kMaps);
        {
            EnvGuard g(nullptr);
            apply_env_overrides(c);
            CHECK(c.base_seed == 2020);
        }
        {
            EnvGuard g("31337");
            apply_env_overrides(c);
            CHECK(c.base_seed == 31337);
        }
        {
            EnvGuard g("12abc");
            CHECK_THROWS_AS(apply_env_overrides(c), ConfigError);
        }
    }

    TEST_CASE("hash tracks semantic fields only") {
        const ExperimentConfig base = default_config(kMaps);
        const std::uint64_t h = config_hash(base);
        CHECK(config_hash(base) == h);
        CHECK(hex64(h).size() == 16);

        ExperimentConfig w = base;
        w.workers = 7;
        CHECK(config_hash(w) == h);

        // same file reached through a different path
        ExperimentConfig p = base;
        p.maps[0] = kMaps / "../maps" / "home.map";
        CHECK(config_hash(p) == h);

        std::vector<ExperimentConfig> changed(14, base);
        changed[0].base_seed = 1;
        changed[1].trials_per_run = 99;
        changed[2].runs = 4;
        changed[3].distances_m = {4, 8};
        changed[4].systems.pop_back();
        changed[5].trial.budget_ticks = 299;
        changed[6].trial.detector.range_m = 5;
        changed[7].trial.human.p_follow = 0.9;
        changed[8].trial.filter.threshold = 0.75;
        changed[9].mdp.r_confirm_hit = 200;
        changed[10].scenario.n_clutter_wedges = 2;
        changed[11].learner.alpha = 0.2;
        changed[12].eval.episodes = 400;
        changed[13].maps = {kMaps / "office.map", kMaps / "home.map", kMaps / "corridor.map"};
        for (const auto& c : changed) {
            CHECK(config_hash(c) != h);
        }

        const auto tmp = std::filesystem::temp_directory_path() / "ghal_hash_map.map";
        std::filesystem::copy_file(kMaps / "home.map", tmp, std::filesystem::copy_options::overwrite_existing);
        ExperimentConfig copied = base;
        copied.maps[0] = tmp;
        CHECK(config_hash(copied) == h);
        std::ofstream(tmp, std::ios::app) << "# edited\n";
        CHECK(config_hash(copied) != h);
        std::filesystem::remove(tmp);
    }
}
