#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ghal/trace.hpp"

namespace ghal {

inline constexpr int kProtocolVersion = 1;

enum class SessionPhase : std::uint8_t { running, found, aborted };

[[nodiscard]] std::string_view to_string(SessionPhase p) noexcept;

struct SessionConfig {
    SystemKind system = SystemKind::GHAL360;
    TrialConfig trial;  // budget, detector, human (unused), filter
    std::uint64_t seed = 1;
    /// Start pose; defaults to the map's 'R' cell facing east.
    std::optional<RobotPose> start;
    int fov_deg = 90;
};

/// Close codes sent with a protocol violation.
inline constexpr int kCloseUnsupportedVersion = 4001;
inline constexpr int kCloseNotText = 4002;

struct SessionReply {
    std::string message;       // exactly one reply per client message
    std::optional<int> close;  // set when the session must be closed
};

/// One operator session: the human replaces the virtual operator. Every
/// accepted client message, and every cadence tick, advances one tick and
/// produces one state broadcast. Deterministic in (world, policy, seed,
/// message and cadence sequence).
class Session {
public:
    /// `policy` is required for RLGS and GHAL360 and must outlive the session.
    Session(const World& world, const GuidancePolicy* policy, SessionConfig cfg);

    /// Handles one client text message.
    SessionReply handle(const std::string& text);
    /// Idle tick: the operator sent nothing for a cadence period.
    std::string cadence();
    /// Current state as a broadcast (used on connect).
    [[nodiscard]] std::string snapshot() const;

    [[nodiscard]] SessionPhase phase() const noexcept { return phase_; }
    [[nodiscard]] const RobotPose& pose() const noexcept { return pose_; }
    [[nodiscard]] const HumanState& human() const noexcept { return human_; }
    [[nodiscard]] int ticks() const noexcept { return static_cast<int>(log_.ticks.size()); }

    /// Trace of every tick so far (post-tick state per record), in the
    /// trial trace schema; outcome set once the phase is terminal.
    [[nodiscard]] TraceLog record() const;

private:
    void reset_state();
    std::string advance(const std::string& event, std::optional<HumanMove> move, int fov);
    void refresh_view();

    const World& world_;
    const GuidancePolicy* policy_;
    SessionConfig cfg_;
    RobotPose start_;
    Rng detector_rng_;
    std::optional<IntentFilter> filter_;
    RobotPose pose_;
    HumanState human_;
    IntentEstimate intent_;
    WedgeVector detection_;
    std::optional<GuidanceAction> indicator_;
    SessionPhase phase_ = SessionPhase::running;
    int fov_deg_;
    int ticks_since_reset_ = 0;
    int resets_ = 0;
    TraceLog log_;
};

/// The state broadcast for a post-tick record (or the initial state when
/// `t.session` is empty).
[[nodiscard]] std::string render_broadcast(const World& world, SystemKind system, double range_m,
                                           const TickRecord& t);

/// Broadcasts reproduced from a session trace, one per tick record.
[[nodiscard]] std::vector<std::string> replay_broadcasts(const World& world, const TraceLog& log);

}  // namespace ghal
