#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ghal/intent_filter.hpp"
#include "ghal/qtable.hpp"
#include "ghal/world.hpp"

namespace ghal {

/// Hand-coded greedy guidance: confirm when the target is focused, else turn
/// the short way toward the nearest target wedge (antipodal ties go left).
/// nullopt when the state holds no target.
[[nodiscard]] std::optional<GuidanceAction> fgs_action(const EgoState& s) noexcept;

/// Indicator a system displays for `s`: nullopt for MFO/ADV or when no target
/// is detected; otherwise the FGS or policy action. RLGS and GHAL360 require
/// `policy`.
[[nodiscard]] std::optional<GuidanceAction> indicator_for(SystemKind kind, const EgoState& s,
                                                          const GuidancePolicy* policy);

/// Rotations behave as step_robot; forward/backward move one cell toward/away
/// from the robot-frame wedge `signal.toward` and keep the heading. Blocked
/// moves leave the pose unchanged.
[[nodiscard]] RobotPose execute(const World& world, const RobotPose& pose, const ControlSignal& signal) noexcept;

struct TrialConfig {
    int budget_ticks = 300;
    double seconds_per_tick = 2.0;
    DetectorConfig detector;
    HumanConfig human;
    FilterConfig filter;
    bool record_trace = true;

    void validate() const;
    friend bool operator==(const TrialConfig&, const TrialConfig&) = default;
};

struct TrialSetup {
    RobotPose start;
    double start_distance_m = 0.0;
    std::uint64_t seed = 0;
};

/// Extra per-tick fields of a live session trace.
struct SessionTick {
    std::string event;  // client message type, or "cadence"
    std::string phase;
    int fov_deg = 90;

    friend bool operator==(const SessionTick&, const SessionTick&) = default;
};

/// One tick of a trial: the state observed at the start of the tick and what
/// happened during it.
struct TickRecord {
    int tick = 0;
    RobotPose pose;
    HumanState human;
    WedgeVector detection;
    std::optional<GuidanceAction> indicator;
    IntentEstimate intent;
    std::optional<HumanMove> move;          // empty on the terminating tick
    std::optional<ControlSignal> command;  // base motion executed this tick
    std::optional<SessionTick> session;

    friend bool operator==(const TickRecord&, const TickRecord&) = default;
};

struct TrialResult {
    SystemKind system = SystemKind::ADV;
    std::uint64_t seed = 0;
    double start_distance_m = 0.0;
    int ticks = 0;
    double elapsed_s = 0.0;
    bool success = false;
    bool correct = false;
    std::vector<TickRecord> trajectory;
    /// Raw draws of the virtual-human stream (only with TrialConfig::record_trace).
    std::vector<std::uint64_t> human_stream;
};

/// Independent random streams of one trial, derived from its seed.
struct TrialStreams {
    static constexpr std::uint64_t human = 11;
    static constexpr std::uint64_t detector = 12;
    static constexpr std::uint64_t filter = 13;
};

/// Closed-loop trial of one system. Throws std::invalid_argument when a
/// learning system has no policy or the start pose is not free.
[[nodiscard]] TrialResult run_trial(SystemKind kind, const World& world, const GuidancePolicy* policy,
                                    const TrialConfig& cfg, const TrialSetup& setup);

/// Trial seeds shared by every system so that trial k of each system replays
/// the same randomness.
[[nodiscard]] std::vector<std::uint64_t> paired_seeds(int n_trials, std::uint64_t base_seed);

}  // namespace ghal
