#pragma once

#include <optional>

#include "ghal/rng.hpp"
#include "ghal/wedge.hpp"

namespace ghal {

class QTable;

/// Transition and reward constants of the abstract guidance MDP.
struct MdpConfig {
    double p_comply = 0.8;
    double r_confirm_hit = 250.0;
    double r_confirm_miss = -250.0;
    double c_small = -3.0;
    double c_large = -15.0;
    int max_steps = 100;

    /// Throws std::invalid_argument when an invariant is violated.
    void validate() const;

    friend bool operator==(const MdpConfig&, const MdpConfig&) = default;
};

/// Initial-state distribution. Unset fields are randomized per episode:
/// clutter count uniform in [0, 7], target/clutter coincidence a fair coin.
struct ScenarioConfig {
    std::optional<int> n_clutter_wedges;
    std::optional<bool> target_coincides_clutter;

    void validate() const;

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Which way the focus actually moved after a left/right indication.
enum class TransitionBranch { comply, drift_left, drift_right };

struct StepOutcome {
    EgoState next;
    double reward = 0.0;
    bool terminal = false;
};

/// Random scenario with exactly one target wedge at a uniform position.
[[nodiscard]] EgoState initial_state(const ScenarioConfig& cfg, Rng& rng);

/// Deterministic transition for a fixed branch. `comply` follows the
/// indication; the drift branches move the focus regardless of it.
[[nodiscard]] EgoState transition_with(const EgoState& s, GuidanceAction a, TransitionBranch branch) noexcept;

[[nodiscard]] EgoState transition(const EgoState& s, GuidanceAction a, const MdpConfig& cfg, Rng& rng);

[[nodiscard]] double reward(const EgoState& s, GuidanceAction a, const EgoState& s_next,
                            const MdpConfig& cfg) noexcept;

[[nodiscard]] StepOutcome step(const EgoState& s, GuidanceAction a, const MdpConfig& cfg, Rng& rng);

/// Exact Bellman-optimal action values by synchronous value iteration.
/// Stops when the largest change falls below `tol`; throws
/// std::runtime_error if `max_iterations` is reached first.
[[nodiscard]] QTable solve_value_iteration(const MdpConfig& cfg, double gamma, double tol,
                                           int max_iterations = 10000);

}  // namespace ghal
