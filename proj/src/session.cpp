#include "ghal/session.hpp"

#include "json.hpp"

namespace ghal {

using nlohmann::json;

std::string_view to_string(SessionPhase p) noexcept {
    switch (p) {
        case SessionPhase::running: return "running";
        case SessionPhase::found: return "found";
        case SessionPhase::aborted: return "aborted";
    }
    return "?";
}

namespace {

RobotPose resolve_start(const World& world, const SessionConfig& cfg) {
    if (cfg.start) {
        return *cfg.start;
    }
    if (!world.default_start()) {
        throw std::invalid_argument("map " + world.name() + " has no default start; pass one explicitly");
    }
    return {*world.default_start(), Compass::east};
}

json error_reply(const std::string& code, const std::string& detail) {
    return {{"v", kProtocolVersion}, {"type", "error"}, {"code", code}, {"detail", detail}};
}

}  // namespace

Session::Session(const World& world, const GuidancePolicy* policy, SessionConfig cfg)
    : world_(world),
      policy_(policy),
      cfg_(std::move(cfg)),
      start_(resolve_start(world, cfg_)),
      detector_rng_(derive_seed(cfg_.seed, TrialStreams::detector)),
      fov_deg_(cfg_.fov_deg) {
    cfg_.trial.validate();
    if ((cfg_.system == SystemKind::RLGS || cfg_.system == SystemKind::GHAL360) && policy_ == nullptr) {
        throw std::invalid_argument(std::string(to_string(cfg_.system)) + " requires a guidance policy");
    }
    if (!world_.passable(start_.cell)) {
        throw std::invalid_argument("session start cell is not free");
    }
    log_.header.source = "session";
    log_.header.system = cfg_.system;
    log_.header.map = world_.name();
    log_.header.seed = cfg_.seed;
    log_.header.start = start_;
    log_.header.start_distance_m = world_.geodesic_to_target(start_.cell).value_or(0.0);
    log_.header.budget_ticks = cfg_.trial.budget_ticks;
    log_.header.seconds_per_tick = cfg_.trial.seconds_per_tick;
    log_.header.detector_range_m = cfg_.trial.detector.range_m;
    reset_state();
}

void Session::reset_state() {
    pose_ = start_;
    human_ = {};
    phase_ = SessionPhase::running;
    ticks_since_reset_ = 0;
    if (cfg_.system == SystemKind::GHAL360 && cfg_.trial.filter.enabled) {
        filter_.emplace(cfg_.trial.filter,
                        derive_seed(derive_seed(cfg_.seed, TrialStreams::filter), static_cast<std::uint64_t>(resets_)));
        intent_ = filter_->estimate();
    } else {
        filter_.reset();
        intent_ = {};
    }
    refresh_view();
}

void Session::refresh_view() {
    detection_ = detect(world_, pose_, cfg_.trial.detector, detector_rng_);
    indicator_ = indicator_for(cfg_.system, to_egocentric(detection_, human_.focus), policy_);
    if (phase_ == SessionPhase::running && contains_target(detection_[human_.focus])) {
        phase_ = SessionPhase::found;
    }
}

std::string Session::advance(const std::string& event, std::optional<HumanMove> move, int fov) {
    std::optional<ControlSignal> command;
    if (event == "reset") {
        ++resets_;
        fov_deg_ = fov;
        reset_state();
    } else if (phase_ == SessionPhase::running) {
        fov_deg_ = fov;
        const std::optional<GuidanceAction> shown = indicator_;
        if (move && cfg_.system == SystemKind::MFO) {
            switch (*move) {
                case HumanMove::look_left: command = ControlSignal{ControlCommand::rotate_left, {}}; break;
                case HumanMove::look_right: command = ControlSignal{ControlCommand::rotate_right, {}}; break;
                case HumanMove::move_forward: command = ControlSignal{ControlCommand::forward, {}}; break;
                case HumanMove::move_backward: command = ControlSignal{ControlCommand::backward, {}}; break;
            }
            human_ = {};
        } else if (move) {
            const HumanUpdate u = apply_human_move(human_, *move);
            human_ = u.human;
            if (u.command) {
                command = ControlSignal{*u.command, human_.focus};
            }
        } else {
            human_.last_motion = HeadMotion::none;
        }
        if (filter_) {
            intent_ = filter_->observe({human_.last_motion, human_.focus});
            if (event == "cadence" && !shown) {
                const ControlSignal s = controller(intent_, pose_);
                if (s.command != ControlCommand::stop) {
                    command = s;
                }
            }
        }
        if (command) {
            pose_ = execute(world_, pose_, *command);
        }
        if (event == "confirm" && target_in_focus(world_, pose_, human_, cfg_.trial.detector.range_m)) {
            phase_ = SessionPhase::found;
        }
        ++ticks_since_reset_;
        refresh_view();
        if (phase_ == SessionPhase::running && ticks_since_reset_ >= cfg_.trial.budget_ticks) {
            phase_ = SessionPhase::aborted;
        }
    }

    TickRecord t;
    t.tick = static_cast<int>(log_.ticks.size());
    t.pose = pose_;
    t.human = human_;
    t.detection = detection_;
    t.indicator = indicator_;
    t.intent = intent_;
    t.move = move;
    t.command = command;
    t.session = SessionTick{event, std::string(to_string(phase_)), fov_deg_};
    log_.ticks.push_back(t);
    return render_broadcast(world_, cfg_.system, cfg_.trial.detector.range_m, t);
}

SessionReply Session::handle(const std::string& text) {
    json msg;
    try {
        msg = json::parse(text);
    } catch (const json::parse_error&) {
        return {error_reply("bad_message", "not valid JSON").dump(), std::nullopt};
    }
    if (!msg.is_object()) {
        return {error_reply("bad_message", "message must be an object").dump(), std::nullopt};
    }
    if (!msg.contains("v") || !msg.at("v").is_number_integer() || msg.at("v").get<int>() != kProtocolVersion) {
        return {error_reply("unsupported_version", "expected \"v\": 1").dump(), kCloseUnsupportedVersion};
    }
    if (!msg.contains("type") || !msg.at("type").is_string()) {
        return {error_reply("bad_message", "missing \"type\"").dump(), std::nullopt};
    }
    const std::string type = msg.at("type").get<std::string>();
    if (type == "look_left") {
        return {advance(type, HumanMove::look_left, fov_deg_), std::nullopt};
    }
    if (type == "look_right") {
        return {advance(type, HumanMove::look_right, fov_deg_), std::nullopt};
    }
    if (type == "move_forward") {
        return {advance(type, HumanMove::move_forward, fov_deg_), std::nullopt};
    }
    if (type == "move_backward") {
        return {advance(type, HumanMove::move_backward, fov_deg_), std::nullopt};
    }
    if (type == "confirm" || type == "reset") {
        return {advance(type, std::nullopt, fov_deg_), std::nullopt};
    }
    if (type == "set_fov") {
        const auto it = msg.find("fov_deg");
        if (it == msg.end() || !it->is_number_integer() || it->get<int>() < 30 || it->get<int>() > 360) {
            return {error_reply("bad_message", "set_fov needs integer fov_deg in [30, 360]").dump(), std::nullopt};
        }
        return {advance(type, std::nullopt, it->get<int>()), std::nullopt};
    }
    return {error_reply("bad_message", "unknown type \"" + type + "\"").dump(), std::nullopt};
}

std::string Session::cadence() { return advance("cadence", std::nullopt, fov_deg_); }

std::string Session::snapshot() const {
    TickRecord t;
    t.tick = static_cast<int>(log_.ticks.size());
    t.pose = pose_;
    t.human = human_;
    t.detection = detection_;
    t.indicator = indicator_;
    t.intent = intent_;
    t.session = SessionTick{"hello", std::string(to_string(phase_)), fov_deg_};
    return render_broadcast(world_, cfg_.system, cfg_.trial.detector.range_m, t);
}

TraceLog Session::record() const {
    TraceLog log = log_;
    if (phase_ != SessionPhase::running) {
        const bool found = phase_ == SessionPhase::found;
        log.outcome = TraceOutcome{ticks_since_reset_, ticks_since_reset_ * cfg_.trial.seconds_per_tick, found,
                                   found && target_in_focus(world_, pose_, human_, cfg_.trial.detector.range_m)};
    }
    return log;
}

std::string render_broadcast(const World& world, SystemKind system, double range_m, const TickRecord& t) {
    json panorama = json::array();
    const int heading = static_cast<int>(t.pose.heading);
    for (int k = 0; k < kWedgeCount; ++k) {
        const WedgeValue v = t.detection[WedgeIndex(k)];
        json labels = json::array();
        bool any_clutter = false;
        for (const Sighting& s : world.sightings(t.pose.cell)) {
            if (s.distance_m <= range_m && (s.world_wedge - heading) == WedgeIndex(k)) {
                const bool is_target = s.object == world.target_index();
                if (is_target ? contains_target(v) : contains_clutter(v)) {
                    labels.push_back(world.objects()[s.object].name);
                    any_clutter = any_clutter || !is_target;
                }
            }
        }
        if (contains_clutter(v) && !any_clutter) {
            labels.push_back("unknown");
        }
        panorama.push_back({{"wedge", k}, {"value", to_string(v)}, {"labels", labels}});
    }
    json grid = json::array();
    for (int r = 0; r < world.grid().rows(); ++r) {
        std::string row(static_cast<std::size_t>(world.grid().cols()), '.');
        for (int c = 0; c < world.grid().cols(); ++c) {
            if (world.grid().blocked({r, c})) {
                row[static_cast<std::size_t>(c)] = '#';
            } else if (!world.passable({r, c})) {
                row[static_cast<std::size_t>(c)] = 'o';
            }
        }
        grid.push_back(row);
    }
    json j;
    j["v"] = kProtocolVersion;
    j["type"] = "state";
    j["system"] = to_string(system);
    j["tick"] = t.tick;
    j["event"] = t.session ? t.session->event : "hello";
    j["phase"] = t.session ? t.session->phase : "running";
    j["fov_deg"] = t.session ? t.session->fov_deg : 90;
    j["robot"] = {{"row", t.pose.cell.row}, {"col", t.pose.cell.col}, {"heading", to_string(t.pose.heading)}};
    j["focus"] = t.human.focus.value();
    j["head_motion"] = to_string(t.human.last_motion);
    j["indicator"] = t.indicator ? to_string(*t.indicator) : "none";
    j["panorama"] = panorama;
    j["intent"] = {{"wedge", t.intent.wedge ? json(t.intent.wedge->value()) : json(nullptr)},
                   {"density", t.intent.density}};
    j["command"] = t.command ? json{{"command", to_string(t.command->command)}, {"toward", t.command->toward.value()}}
                             : json(nullptr);
    j["map"] = {{"name", world.name()}, {"rows", world.grid().rows()}, {"cols", world.grid().cols()}, {"grid", grid}};
    return j.dump();
}

std::vector<std::string> replay_broadcasts(const World& world, const TraceLog& log) {
    std::vector<std::string> out;
    out.reserve(log.ticks.size());
    for (const auto& t : log.ticks) {
        out.push_back(render_broadcast(world, log.header.system, log.header.detector_range_m, t));
    }
    return out;
}

}  // namespace ghal
