#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ghal/mdp.hpp"
#include "ghal/qlearning.hpp"
#include "ghal/systems.hpp"

namespace ghal {

/// Checkpoint evaluation: fixed set of guidance episodes under the abstract
/// dynamics with the virtual operator's compliance.
struct EvalConfig {
    int episodes = 500;
    double p_comply = 0.8;
    int max_steps = 100;
    std::uint64_t seed = 7;

    void validate() const;
    friend bool operator==(const EvalConfig&, const EvalConfig&) = default;
};

struct ExperimentConfig {
    std::vector<std::filesystem::path> maps;
    std::vector<SystemKind> systems;
    std::vector<double> distances_m;
    /// Paired trials per (map, distance) in each run.
    int trials_per_run = 100;
    int runs = 5;
    std::uint64_t base_seed = 2020;
    /// 0 = one per hardware thread. Does not affect results.
    int workers = 0;
    /// Q-table file for RLGS/GHAL360; empty = train with `learner`.
    std::filesystem::path policy;

    TrialConfig trial;
    MdpConfig mdp;
    ScenarioConfig scenario;
    LearnerConfig learner;
    EvalConfig eval;

    void validate() const;
    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Desk-scale defaults; map paths are relative to `map_dir`.
[[nodiscard]] ExperimentConfig default_config(const std::filesystem::path& map_dir = "maps");

/// INI text with sections [experiment], [trial], [detector], [human],
/// [filter], [mdp], [scenario], [learner], [eval]. Missing keys keep their
/// defaults; unknown sections or keys are errors. Relative paths resolve
/// against `base_dir`.
[[nodiscard]] ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical INI rendering of every field (parse_config(to_ini(c)) == c).
[[nodiscard]] std::string to_ini(const ExperimentConfig& cfg);

/// GHAL_SEED, when set, replaces base_seed. Throws ConfigError if malformed.
void apply_env_overrides(ExperimentConfig& cfg);

/// 64-bit FNV-1a over every result-relevant field and the contents of the
/// map files (not their paths); `workers` is excluded.
[[nodiscard]] std::uint64_t config_hash(const ExperimentConfig& cfg);
[[nodiscard]] std::string hex64(std::uint64_t v);

}  // namespace ghal
