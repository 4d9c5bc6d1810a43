#pragma once

#include <cstdint>
#include <vector>

#include "ghal/mdp.hpp"
#include "ghal/qtable.hpp"
#include "ghal/rng.hpp"

namespace ghal {

struct LearnerConfig {
    double alpha = 0.1;
    double gamma = 0.95;
    double epsilon_start = 0.1;
    double epsilon_end = 0.01;
    int episodes = 15000;
    int checkpoint_every = 100;
    std::uint64_t seed = 1;
    /// Also apply every update to the left/right mirror image of the
    /// transition. The abstract MDP is reflection-symmetric, so the mirrored
    /// sample is an exact sample of the same dynamics.
    bool mirror_updates = true;
    /// Keep updating Q while a frozen policy is deployed.
    bool online_updates = false;

    void validate() const;

    /// Linearly decayed exploration rate for episode `e` (0-based).
    [[nodiscard]] double epsilon_at(int e) const noexcept;

    friend bool operator==(const LearnerConfig&, const LearnerConfig&) = default;
};

struct Transition {
    StateIndex state = 0;
    GuidanceAction action = GuidanceAction::confirm;
    double reward = 0.0;
    StateIndex next = 0;
    bool terminal = false;
};

/// One temporal-difference update of Q(s, a); returns the new value.
/// Terminal transitions do not bootstrap. Throws std::invalid_argument for a
/// non-finite reward or Q entry.
double q_update(QTable& q, const Transition& t, double alpha, double gamma);

/// Action with left and right exchanged.
[[nodiscard]] GuidanceAction mirror(GuidanceAction a) noexcept;

/// Epsilon-greedy selection; the greedy branch uses the fixed tie order.
[[nodiscard]] GuidanceAction select_action(const QTable& q, StateIndex s, double epsilon, Rng& rng);

struct TrainingResult {
    QTable q;
    std::vector<GuidancePolicy> checkpoints;
    /// Undiscounted cumulative reward of every training episode.
    std::vector<double> curve;
};

[[nodiscard]] TrainingResult train(const MdpConfig& mdp, const ScenarioConfig& scenario,
                                   const LearnerConfig& learner);

}  // namespace ghal
