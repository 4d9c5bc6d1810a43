#include "ghal/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ghal/qtable.hpp"

namespace ghal {

void MdpConfig::validate() const {
    if (!(p_comply >= 0.0 && p_comply <= 1.0)) {
        throw std::invalid_argument("mdp.p_comply must lie in [0, 1]");
    }
    if (!(r_confirm_hit > 0.0 && r_confirm_miss < 0.0)) {
        throw std::invalid_argument("mdp confirm rewards must satisfy hit > 0 > miss");
    }
    if (!(c_large < c_small && c_small < 0.0)) {
        throw std::invalid_argument("mdp costs must satisfy c_large < c_small < 0");
    }
    if (max_steps < 1) {
        throw std::invalid_argument("mdp.max_steps must be positive");
    }
}

void ScenarioConfig::validate() const {
    if (n_clutter_wedges && (*n_clutter_wedges < 0 || *n_clutter_wedges > kWedgeCount - 1)) {
        throw std::invalid_argument("scenario.n_clutter_wedges must lie in [0, 7]");
    }
}

EgoState initial_state(const ScenarioConfig& cfg, Rng& rng) {
    const int target = rng.below_int(kWedgeCount);
    const int n_clutter = cfg.n_clutter_wedges ? *cfg.n_clutter_wedges : rng.below_int(kWedgeCount);
    const bool coincide = cfg.target_coincides_clutter ? *cfg.target_coincides_clutter : rng.bernoulli(0.5);

    std::array<int, kWedgeCount - 1> others{};
    for (int k = 0, j = 0; k < kWedgeCount; ++k) {
        if (k != target) {
            others[static_cast<std::size_t>(j++)] = k;
        }
    }
    // partial Fisher-Yates: the first n_clutter entries become clutter
    for (int i = 0; i < n_clutter; ++i) {
        const int j = i + rng.below_int(kWedgeCount - 1 - i);
        std::swap(others[static_cast<std::size_t>(i)], others[static_cast<std::size_t>(j)]);
    }

    EgoState s;
    for (int i = 0; i < n_clutter; ++i) {
        s[others[static_cast<std::size_t>(i)]] = WedgeValue::clutter;
    }
    s[target] = coincide ? WedgeValue::target_clutter : WedgeValue::target;
    return s;
}

EgoState transition_with(const EgoState& s, GuidanceAction a, TransitionBranch branch) noexcept {
    if (a == GuidanceAction::confirm) {
        return s;
    }
    int shift = 0;
    switch (branch) {
        case TransitionBranch::comply: shift = a == GuidanceAction::left ? 1 : -1; break;
        case TransitionBranch::drift_left: shift = 1; break;
        case TransitionBranch::drift_right: shift = -1; break;
    }
    return rotate(s, shift);
}

EgoState transition(const EgoState& s, GuidanceAction a, const MdpConfig& cfg, Rng& rng) {
    if (a == GuidanceAction::confirm) {
        return s;
    }
    TransitionBranch branch = TransitionBranch::comply;
    if (!rng.bernoulli(cfg.p_comply)) {
        branch = rng.bernoulli(0.5) ? TransitionBranch::drift_left : TransitionBranch::drift_right;
    }
    return transition_with(s, a, branch);
}

double reward(const EgoState& /*s*/, GuidanceAction a, const EgoState& s_next, const MdpConfig& cfg) noexcept {
    const WedgeValue landed = s_next.focused();
    if (a == GuidanceAction::confirm) {
        return contains_target(landed) ? cfg.r_confirm_hit : cfg.r_confirm_miss;
    }
    return contains_clutter(landed) ? cfg.c_large : cfg.c_small;
}

StepOutcome step(const EgoState& s, GuidanceAction a, const MdpConfig& cfg, Rng& rng) {
    StepOutcome out;
    out.next = transition(s, a, cfg, rng);
    out.reward = reward(s, a, out.next, cfg);
    out.terminal = a == GuidanceAction::confirm;
    return out;
}

QTable solve_value_iteration(const MdpConfig& cfg, double gamma, double tol, int max_iterations) {
    cfg.validate();
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw std::invalid_argument("value iteration requires 0 < gamma < 1");
    }
    if (!(tol > 0.0)) {
        throw std::invalid_argument("value iteration tolerance must be positive");
    }

    // Neighbouring states are fixed, so precompute them once.
    std::vector<StateIndex> ccw(kStateCount);
    std::vector<StateIndex> cw(kStateCount);
    std::vector<double> cost_ccw(kStateCount);
    std::vector<double> cost_cw(kStateCount);
    std::vector<double> confirm(kStateCount);
    for (std::uint32_t i = 0; i < kStateCount; ++i) {
        const EgoState s = decode_state(i);
        const EgoState l = rotate(s, 1);
        const EgoState r = rotate(s, -1);
        ccw[i] = encode_state(l);
        cw[i] = encode_state(r);
        cost_ccw[i] = reward(s, GuidanceAction::left, l, cfg);
        cost_cw[i] = reward(s, GuidanceAction::right, r, cfg);
        confirm[i] = reward(s, GuidanceAction::confirm, s, cfg);
    }

    const double p_same = cfg.p_comply + 0.5 * (1.0 - cfg.p_comply);
    const double p_other = 0.5 * (1.0 - cfg.p_comply);

    std::vector<double> value(kStateCount, 0.0);
    std::vector<double> next_value(kStateCount, 0.0);
    QTable q;
    for (int iter = 0; iter < max_iterations; ++iter) {
        double delta = 0.0;
        for (std::uint32_t i = 0; i < kStateCount; ++i) {
            const double via_ccw = cost_ccw[i] + gamma * value[ccw[i]];
            const double via_cw = cost_cw[i] + gamma * value[cw[i]];
            const double q_left = p_same * via_ccw + p_other * via_cw;
            const double q_right = p_same * via_cw + p_other * via_ccw;
            const auto s = static_cast<StateIndex>(i);
            q.at(s, GuidanceAction::confirm) = confirm[i];
            q.at(s, GuidanceAction::left) = q_left;
            q.at(s, GuidanceAction::right) = q_right;
            next_value[i] = std::max({confirm[i], q_left, q_right});
            delta = std::max(delta, std::abs(next_value[i] - value[i]));
        }
        value.swap(next_value);
        if (delta < tol) {
            return q;
        }
    }
    throw std::runtime_error("value iteration did not converge within " + std::to_string(max_iterations) +
                             " iterations");
}

}  // namespace ghal
