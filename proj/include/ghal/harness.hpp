#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ghal/config.hpp"
#include "ghal/qtable.hpp"
#include "ghal/systems.hpp"

namespace ghal {

/// No free cell lies within half a cell of the requested geodesic distance.
class EmptyBandError : public std::runtime_error {
public:
    EmptyBandError(double requested_m, std::optional<double> nearest_m);
    [[nodiscard]] std::optional<double> nearest_m() const noexcept { return nearest_; }

private:
    std::optional<double> nearest_;
};

/// Free cells whose geodesic distance to the target is within half a cell of
/// `distance_m`, in row-major order.
[[nodiscard]] std::vector<Cell> start_band(const World& world, double distance_m);

/// n poses drawn uniformly (with replacement) from the band, uniform heading.
[[nodiscard]] std::vector<RobotPose> sample_start_poses(const World& world, double distance_m, int n, Rng& rng);

/// Mean and sample standard deviation (n - 1; 0 for a single value) by
/// Welford's recurrence.
class RunningStats {
public:
    void add(double x) noexcept;
    [[nodiscard]] std::size_t count() const noexcept { return n_; }
    [[nodiscard]] double mean() const noexcept { return mean_; }
    [[nodiscard]] double stddev() const noexcept;

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

struct TimeCell {
    std::string map;
    SystemKind system = SystemKind::ADV;
    double distance_m = 0.0;
    double mean_time_s = 0.0;
    double std_time_s = 0.0;
    std::vector<double> run_means;

    friend bool operator==(const TimeCell&, const TimeCell&) = default;
};

struct AccuracyCell {
    std::string map;
    SystemKind system = SystemKind::ADV;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    std::vector<double> run_values;

    friend bool operator==(const AccuracyCell&, const AccuracyCell&) = default;
};

struct ExperimentReport {
    std::string config_hash;
    std::uint64_t base_seed = 0;
    int trials_per_run = 0;
    int runs = 0;
    std::vector<TimeCell> times;          // map-major, then system, then distance
    std::vector<AccuracyCell> accuracy;   // map-major, then system
    /// Mean training reward per checkpoint block, when a policy was trained.
    std::vector<double> learning_curve;

    [[nodiscard]] const TimeCell& time(const std::string& map, SystemKind s, double distance_m) const;
    [[nodiscard]] const AccuracyCell& accuracy_of(const std::string& map, SystemKind s) const;

    friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

/// Completion time of one trial: elapsed seconds, or the full budget when
/// the target was never found.
[[nodiscard]] double completion_time_s(const TrialResult& r, const TrialConfig& cfg) noexcept;

struct PolicySource {
    GuidancePolicy policy;
    std::vector<double> learning_curve;  // empty when loaded from file
};

/// Loads cfg.policy, or trains with cfg.learner when it is empty.
[[nodiscard]] PolicySource obtain_policy(const ExperimentConfig& cfg);

/// Full factorial maps x systems x distances x runs x paired trials. Trial
/// seeds and start poses depend only on (base_seed, map, distance, run,
/// trial), never on the worker schedule.
[[nodiscard]] ExperimentReport run_experiment(const ExperimentConfig& cfg);
[[nodiscard]] ExperimentReport run_experiment(const ExperimentConfig& cfg, const PolicySource& policy);

/// Values rounded to 6 significant digits, as emitted.
[[nodiscard]] double round6(double v);

void emit_time_csv(std::ostream& out, const ExperimentReport& r);
void emit_accuracy_csv(std::ostream& out, const ExperimentReport& r);
void emit_json(std::ostream& out, const ExperimentReport& r);
[[nodiscard]] ExperimentReport parse_report_json(std::istream& in);

/// Writes <prefix>_time.csv, <prefix>_accuracy.csv and <prefix>.json.
void emit_report(const ExperimentReport& r, const std::filesystem::path& prefix);

struct CheckpointCurve {
    std::vector<double> scores;  // mean cumulative reward per checkpoint
    double fgs_reference = 0.0;
};

/// The fixed evaluation set: `eval.episodes` generator states.
[[nodiscard]] std::vector<EgoState> evaluation_starts(const ScenarioConfig& scenario, const EvalConfig& eval);

/// Exact expected undiscounted return of `policy` (nullptr = FGS) over a
/// horizon of `horizon` indications, averaged over `starts`.
[[nodiscard]] double expected_return(const GuidancePolicy* policy, const std::vector<EgoState>& starts,
                                     const MdpConfig& mdp, int horizon);

[[nodiscard]] double evaluate_policy(const GuidancePolicy* policy, const ScenarioConfig& scenario,
                                     const MdpConfig& mdp, const EvalConfig& eval);

[[nodiscard]] CheckpointCurve evaluate_checkpoints(const std::vector<GuidancePolicy>& checkpoints,
                                                   const ScenarioConfig& scenario, const MdpConfig& mdp,
                                                   const EvalConfig& eval);

void emit_curve_csv(std::ostream& out, const CheckpointCurve& c, int checkpoint_every);

}  // namespace ghal
