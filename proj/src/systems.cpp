#include "ghal/systems.hpp"

#include <stdexcept>

namespace ghal {

std::optional<GuidanceAction> fgs_action(const EgoState& s) noexcept {
    std::optional<CircularDistance> best;
    for (int k = 0; k < kWedgeCount; ++k) {
        if (!contains_target(s[k])) {
            continue;
        }
        const CircularDistance d = circular_distance(WedgeIndex(0), WedgeIndex(k));
        // prefer shorter; at equal length prefer the left-hand (or tie) option
        if (!best || d.distance < best->distance ||
            (d.distance == best->distance && best->direction == Rotation::right)) {
            best = d;
        }
    }
    if (!best) {
        return std::nullopt;
    }
    switch (best->direction) {
        case Rotation::none: return GuidanceAction::confirm;
        case Rotation::right: return GuidanceAction::right;
        case Rotation::left:
        case Rotation::tie: return GuidanceAction::left;
    }
    return std::nullopt;
}

std::optional<GuidanceAction> indicator_for(SystemKind kind, const EgoState& s, const GuidancePolicy* policy) {
    if (!shows_indicators(kind)) {
        return std::nullopt;
    }
    bool any_target = false;
    for (WedgeValue v : s.values) {
        any_target = any_target || contains_target(v);
    }
    if (!any_target) {
        return std::nullopt;
    }
    if (kind == SystemKind::FGS) {
        return fgs_action(s);
    }
    if (policy == nullptr) {
        throw std::invalid_argument(std::string(to_string(kind)) + " requires a guidance policy");
    }
    return (*policy)(s);
}

RobotPose execute(const World& world, const RobotPose& pose, const ControlSignal& signal) noexcept {
    if (signal.command != ControlCommand::forward && signal.command != ControlCommand::backward) {
        return step_robot(world, pose, signal.command);
    }
    const RobotPose facing{pose.cell, turn(pose.heading, signal.toward.value())};
    return {step_robot(world, facing, signal.command).cell, pose.heading};
}

void TrialConfig::validate() const {
    if (budget_ticks < 1) {
        throw std::invalid_argument("trial.budget_ticks must be positive");
    }
    if (!(seconds_per_tick > 0.0)) {
        throw std::invalid_argument("trial.seconds_per_tick must be positive");
    }
    detector.validate();
    human.validate();
    filter.validate();
}

TrialResult run_trial(SystemKind kind, const World& world, const GuidancePolicy* policy, const TrialConfig& cfg,
                      const TrialSetup& setup) {
    cfg.validate();
    if ((kind == SystemKind::RLGS || kind == SystemKind::GHAL360) && policy == nullptr) {
        throw std::invalid_argument(std::string(to_string(kind)) + " requires a guidance policy");
    }
    if (!world.passable(setup.start.cell)) {
        throw std::invalid_argument("trial start cell is not free");
    }

    TrialResult result;
    result.system = kind;
    result.seed = setup.seed;
    result.start_distance_m = setup.start_distance_m;

    Rng human_rng(derive_seed(setup.seed, TrialStreams::human));
    Rng detector_rng(derive_seed(setup.seed, TrialStreams::detector));
    if (cfg.record_trace) {
        human_rng.set_tap(&result.human_stream);
    }
    const bool use_filter = kind == SystemKind::GHAL360 && cfg.filter.enabled;
    std::optional<IntentFilter> filter;
    if (use_filter) {
        filter.emplace(cfg.filter, derive_seed(setup.seed, TrialStreams::filter));
    }

    RobotPose pose = setup.start;
    HumanState human;
    IntentEstimate intent;
    for (int tick = 0;; ++tick) {
        TickRecord rec;
        rec.tick = tick;
        rec.pose = pose;
        rec.human = human;
        rec.intent = intent;
        rec.detection = detect(world, pose, cfg.detector, detector_rng);

        if (contains_target(rec.detection[human.focus])) {
            result.ticks = tick;
            result.success = true;
            result.correct = target_in_focus(world, pose, human, cfg.detector.range_m);
            if (cfg.record_trace) {
                result.trajectory.push_back(rec);
            }
            break;
        }
        if (tick == cfg.budget_ticks) {
            result.ticks = tick;
            if (cfg.record_trace) {
                result.trajectory.push_back(rec);
            }
            break;
        }

        const EgoState ego = to_egocentric(rec.detection, human.focus);
        rec.indicator = indicator_for(kind, ego, policy);
        const HumanMove move = virtual_human_step(human, rec.indicator, kind, cfg.human, human_rng);
        rec.move = move;

        std::optional<ControlSignal> command;
        if (kind == SystemKind::MFO) {
            // the only way to look around is to turn the robot; the view stays forward
            switch (move) {
                case HumanMove::look_left: command = ControlSignal{ControlCommand::rotate_left, {}}; break;
                case HumanMove::look_right: command = ControlSignal{ControlCommand::rotate_right, {}}; break;
                case HumanMove::move_forward: command = ControlSignal{ControlCommand::forward, {}}; break;
                case HumanMove::move_backward: command = ControlSignal{ControlCommand::backward, {}}; break;
            }
            human = {WedgeIndex(0), HeadMotion::none};
        } else {
            const HumanUpdate update = apply_human_move(human, move);
            human = update.human;
            if (update.command) {
                // the operator drives relative to where they are looking
                command = ControlSignal{*update.command, human.focus};
            }
        }

        if (filter) {
            intent = filter->observe({human.last_motion, human.focus});
            // idle ticks only: no operator drive and no guidance being followed
            if (!command && !rec.indicator) {
                const ControlSignal signal = controller(intent, pose);
                if (signal.command != ControlCommand::stop) {
                    command = signal;
                }
            }
        }

        if (command) {
            pose = execute(world, pose, *command);
        }
        rec.command = command;
        if (cfg.record_trace) {
            result.trajectory.push_back(rec);
        }
    }
    result.elapsed_s = result.ticks * cfg.seconds_per_tick;
    return result;
}

std::vector<std::uint64_t> paired_seeds(int n_trials, std::uint64_t base_seed) {
    if (n_trials < 1) {
        throw std::invalid_argument("paired_seeds needs at least one trial");
    }
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(n_trials));
    for (int k = 0; k < n_trials; ++k) {
        seeds[static_cast<std::size_t>(k)] = derive_seed(base_seed, static_cast<std::uint64_t>(k));
    }
    return seeds;
}

}  // namespace ghal
