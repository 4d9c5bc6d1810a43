#include "ghal/qlearning.hpp"

#include <cmath>
#include <stdexcept>

namespace ghal {

void LearnerConfig::validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw std::invalid_argument("learner.alpha must lie in (0, 1]");
    }
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw std::invalid_argument("learner.gamma must lie in (0, 1)");
    }
    for (double eps : {epsilon_start, epsilon_end}) {
        if (!(eps >= 0.0 && eps <= 1.0)) {
            throw std::invalid_argument("learner epsilon must lie in [0, 1]");
        }
    }
    if (episodes < 0) {
        throw std::invalid_argument("learner.episodes must be non-negative");
    }
    if (checkpoint_every < 1) {
        throw std::invalid_argument("learner.checkpoint_every must be positive");
    }
}

double LearnerConfig::epsilon_at(int e) const noexcept {
    if (episodes <= 1) {
        return epsilon_start;
    }
    const double frac = static_cast<double>(e) / static_cast<double>(episodes - 1);
    return epsilon_start + (epsilon_end - epsilon_start) * frac;
}

double q_update(QTable& q, const Transition& t, double alpha, double gamma) {
    if (!std::isfinite(t.reward)) {
        throw std::invalid_argument("q_update: non-finite reward");
    }
    double& entry = q.at(t.state, t.action);
    if (!std::isfinite(entry)) {
        throw std::invalid_argument("q_update: non-finite Q entry");
    }
    const double bootstrap = t.terminal ? 0.0 : gamma * q.max_value(t.next);
    entry += alpha * (t.reward + bootstrap - entry);
    q.count_visit(t.state, t.action);
    return entry;
}

GuidanceAction mirror(GuidanceAction a) noexcept {
    switch (a) {
        case GuidanceAction::left: return GuidanceAction::right;
        case GuidanceAction::right: return GuidanceAction::left;
        case GuidanceAction::confirm: break;
    }
    return a;
}

GuidanceAction select_action(const QTable& q, StateIndex s, double epsilon, Rng& rng) {
    // Both draws are always consumed so the stream layout does not depend on Q.
    const bool explore = rng.bernoulli(epsilon);
    const int random_action = rng.below_int(kActionCount);
    if (explore) {
        return static_cast<GuidanceAction>(random_action);
    }
    return q.argmax(s);
}

TrainingResult train(const MdpConfig& mdp, const ScenarioConfig& scenario, const LearnerConfig& learner) {
    mdp.validate();
    scenario.validate();
    learner.validate();

    TrainingResult result;
    result.curve.reserve(static_cast<std::size_t>(learner.episodes));
    Rng scenario_rng(derive_seed(learner.seed, 1));
    Rng policy_rng(derive_seed(learner.seed, 2));
    Rng world_rng(derive_seed(learner.seed, 3));

    for (int episode = 0; episode < learner.episodes; ++episode) {
        const double epsilon = learner.epsilon_at(episode);
        EgoState s = initial_state(scenario, scenario_rng);
        double total = 0.0;
        for (int t = 0; t < mdp.max_steps; ++t) {
            const StateIndex si = encode_state(s);
            const GuidanceAction a = select_action(result.q, si, epsilon, policy_rng);
            const StepOutcome out = step(s, a, mdp, world_rng);
            q_update(result.q, {si, a, out.reward, encode_state(out.next), out.terminal}, learner.alpha,
                     learner.gamma);
            if (learner.mirror_updates) {
                const StateIndex mirrored = encode_state(reflect(s));
                // a symmetric state under confirm would just repeat the update
                if (mirrored != si || a != GuidanceAction::confirm) {
                    q_update(result.q,
                             {mirrored, mirror(a), out.reward, encode_state(reflect(out.next)), out.terminal},
                             learner.alpha, learner.gamma);
                }
            }
            total += out.reward;
            s = out.next;
            if (out.terminal) {
                break;
            }
        }
        result.curve.push_back(total);
        if ((episode + 1) % learner.checkpoint_every == 0) {
            result.checkpoints.push_back(greedy_policy(result.q));
        }
    }
    return result;
}

}  // namespace ghal
