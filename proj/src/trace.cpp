#include "ghal/trace.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace ghal {

using nlohmann::json;

namespace {

template <typename E, std::size_t N>
E parse_enum(const std::string& s, const std::array<E, N>& all, const char* what) {
    for (E e : all) {
        if (to_string(e) == s) {
            return e;
        }
    }
    throw std::invalid_argument(std::string("unknown ") + what + " '" + s + "'");
}

constexpr std::array kCompass{Compass::east,  Compass::north_east, Compass::north, Compass::north_west,
                              Compass::west,  Compass::south_west, Compass::south, Compass::south_east};
constexpr std::array kMotions{HeadMotion::none, HeadMotion::left, HeadMotion::right};
constexpr std::array kMoves{HumanMove::look_left, HumanMove::look_right, HumanMove::move_forward,
                            HumanMove::move_backward};
constexpr std::array kCommands{ControlCommand::stop, ControlCommand::forward, ControlCommand::backward,
                               ControlCommand::rotate_left, ControlCommand::rotate_right};

json pose_json(const RobotPose& p) {
    return {{"row", p.cell.row}, {"col", p.cell.col}, {"heading", to_string(p.heading)}};
}

RobotPose pose_from(const json& j) {
    return {{j.at("row").get<int>(), j.at("col").get<int>()},
            parse_enum(j.at("heading").get<std::string>(), kCompass, "heading")};
}

json tick_json(const TickRecord& t) {
    json j;
    j["type"] = "tick";
    j["tick"] = t.tick;
    j["pose"] = pose_json(t.pose);
    j["focus"] = t.human.focus.value();
    j["head_motion"] = to_string(t.human.last_motion);
    json wedges = json::array();
    for (WedgeValue v : t.detection.values) {
        wedges.push_back(static_cast<int>(v));
    }
    j["wedges"] = wedges;
    j["indicator"] = t.indicator ? json(to_string(*t.indicator)) : json(nullptr);
    j["intent"] = {{"wedge", t.intent.wedge ? json(t.intent.wedge->value()) : json(nullptr)},
                   {"density", t.intent.density}};
    j["move"] = t.move ? json(to_string(*t.move)) : json(nullptr);
    j["command"] = t.command ? json{{"command", to_string(t.command->command)}, {"toward", t.command->toward.value()}}
                             : json(nullptr);
    if (t.session) {
        j["session"] = {{"event", t.session->event}, {"phase", t.session->phase}, {"fov", t.session->fov_deg}};
    }
    return j;
}

TickRecord tick_from(const json& j) {
    TickRecord t;
    t.tick = j.at("tick").get<int>();
    t.pose = pose_from(j.at("pose"));
    t.human.focus = WedgeIndex(j.at("focus").get<int>());
    t.human.last_motion = parse_enum(j.at("head_motion").get<std::string>(), kMotions, "head motion");
    const auto& w = j.at("wedges");
    if (!w.is_array() || w.size() != kWedgeCount) {
        throw std::invalid_argument("wedges must hold 8 values");
    }
    for (int k = 0; k < kWedgeCount; ++k) {
        const int v = w.at(static_cast<std::size_t>(k)).get<int>();
        if (v < 0 || v > 3) {
            throw std::invalid_argument("wedge value out of range");
        }
        t.detection[WedgeIndex(k)] = static_cast<WedgeValue>(v);
    }
    if (!j.at("indicator").is_null()) {
        t.indicator = parse_enum(j.at("indicator").get<std::string>(), kAllActions, "indicator");
    }
    const auto& in = j.at("intent");
    if (!in.at("wedge").is_null()) {
        t.intent.wedge = WedgeIndex(in.at("wedge").get<int>());
    }
    t.intent.density = in.at("density").get<double>();
    if (!j.at("move").is_null()) {
        t.move = parse_enum(j.at("move").get<std::string>(), kMoves, "move");
    }
    if (!j.at("command").is_null()) {
        const auto& c = j.at("command");
        t.command = ControlSignal{parse_enum(c.at("command").get<std::string>(), kCommands, "command"),
                                  WedgeIndex(c.at("toward").get<int>())};
    }
    if (j.contains("session")) {
        const auto& s = j.at("session");
        t.session = SessionTick{s.at("event").get<std::string>(), s.at("phase").get<std::string>(),
                                s.at("fov").get<int>()};
    }
    return t;
}

json header_json(const TraceHeader& h) {
    return {{"type", "header"},
            {"version", h.version},
            {"source", h.source},
            {"system", to_string(h.system)},
            {"map", h.map},
            {"seed", h.seed},
            {"start", pose_json(h.start)},
            {"start_distance_m", h.start_distance_m},
            {"budget_ticks", h.budget_ticks},
            {"seconds_per_tick", h.seconds_per_tick},
            {"detector_range_m", h.detector_range_m}};
}

TraceHeader header_from(const json& j) {
    TraceHeader h;
    h.version = j.at("version").get<int>();
    if (h.version != kTraceFormatVersion) {
        throw std::invalid_argument("unsupported trace version " + std::to_string(h.version));
    }
    h.source = j.at("source").get<std::string>();
    h.system = parse_system_kind(j.at("system").get<std::string>());
    h.map = j.at("map").get<std::string>();
    h.seed = j.at("seed").get<std::uint64_t>();
    h.start = pose_from(j.at("start"));
    h.start_distance_m = j.at("start_distance_m").get<double>();
    h.budget_ticks = j.at("budget_ticks").get<int>();
    h.seconds_per_tick = j.at("seconds_per_tick").get<double>();
    h.detector_range_m = j.at("detector_range_m").get<double>();
    return h;
}

}  // namespace

TraceFormatError::TraceFormatError(std::size_t line, const std::string& what)
    : std::runtime_error("trace line " + std::to_string(line) + ": " + what), line_(line) {}

TraceLog make_trace(const TrialResult& r, const std::string& map_name, const TrialSetup& setup,
                    const TrialConfig& cfg) {
    TraceLog log;
    log.header.system = r.system;
    log.header.map = map_name;
    log.header.seed = r.seed;
    log.header.start = setup.start;
    log.header.start_distance_m = r.start_distance_m;
    log.header.budget_ticks = cfg.budget_ticks;
    log.header.seconds_per_tick = cfg.seconds_per_tick;
    log.header.detector_range_m = cfg.detector.range_m;
    log.ticks = r.trajectory;
    log.outcome = TraceOutcome{r.ticks, r.elapsed_s, r.success, r.correct};
    return log;
}

std::string trace_line(const TickRecord& t) { return tick_json(t).dump(); }

std::string trace_header_line(const TraceHeader& h) { return header_json(h).dump(); }

void write_trace(std::ostream& out, const TraceLog& log) {
    out << header_json(log.header).dump() << '\n';
    for (const auto& t : log.ticks) {
        out << tick_json(t).dump() << '\n';
    }
    if (log.outcome) {
        const auto& o = *log.outcome;
        out << json{{"type", "result"},
                    {"ticks", o.ticks},
                    {"elapsed_s", o.elapsed_s},
                    {"success", o.success},
                    {"correct", o.correct}}
                   .dump()
            << '\n';
    }
}

void write_trace(const std::filesystem::path& path, const TraceLog& log) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write trace " + path.string());
    }
    write_trace(out, log);
    if (!out) {
        throw std::runtime_error("failed writing trace " + path.string());
    }
}

TraceLog read_trace(std::istream& in) {
    TraceLog log;
    std::string line;
    std::size_t n = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) {
            continue;
        }
        try {
            const json j = json::parse(line);
            const std::string type = j.at("type").get<std::string>();
            if (type == "header") {
                if (have_header) {
                    throw std::invalid_argument("duplicate header");
                }
                log.header = header_from(j);
                have_header = true;
            } else if (!have_header) {
                throw std::invalid_argument("record before header");
            } else if (log.outcome) {
                throw std::invalid_argument("record after result");
            } else if (type == "tick") {
                log.ticks.push_back(tick_from(j));
            } else if (type == "result") {
                log.outcome = TraceOutcome{j.at("ticks").get<int>(), j.at("elapsed_s").get<double>(),
                                           j.at("success").get<bool>(), j.at("correct").get<bool>()};
            } else {
                throw std::invalid_argument("unknown record type '" + type + "'");
            }
        } catch (const TraceFormatError&) {
            throw;
        } catch (const std::exception& e) {
            throw TraceFormatError(n, e.what());
        }
    }
    if (!have_header) {
        throw TraceFormatError(n, "missing header");
    }
    return log;
}

TraceLog read_trace(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read trace " + path.string());
    }
    return read_trace(in);
}

namespace {

char heading_glyph(Compass h) {
    constexpr std::array<char, 8> g{'>', '/', '^', '\\', '<', '/', 'v', '\\'};
    return g[static_cast<std::size_t>(h)];
}

char wedge_glyph(WedgeValue v) {
    switch (v) {
        case WedgeValue::empty: return '.';
        case WedgeValue::clutter: return 'c';
        case WedgeValue::target: return 'T';
        case WedgeValue::target_clutter: return 'X';
    }
    return '?';
}

}  // namespace

void render_trace(std::ostream& out, const World& world, const TraceLog& log) {
    const auto& h = log.header;
    out << h.source << ' ' << to_string(h.system) << " on " << h.map << "  seed " << h.seed << "  start "
        << std::fixed << std::setprecision(1) << h.start_distance_m << " m\n";
    const auto& grid = world.grid();
    for (const auto& t : log.ticks) {
        out << "\ntick " << t.tick << "  t=" << std::setprecision(1) << t.tick * h.seconds_per_tick << " s\n";
        for (int r = 0; r < grid.rows(); ++r) {
            std::string row(static_cast<std::size_t>(grid.cols()), '.');
            for (int c = 0; c < grid.cols(); ++c) {
                if (grid.blocked({r, c})) {
                    row[static_cast<std::size_t>(c)] = '#';
                }
            }
            for (std::size_t i = 0; i < world.objects().size(); ++i) {
                const Cell oc = world.objects()[i].cell;
                if (oc.row == r) {
                    row[static_cast<std::size_t>(oc.col)] = i == world.target_index() ? 'T' : 'o';
                }
            }
            if (t.pose.cell.row == r) {
                row[static_cast<std::size_t>(t.pose.cell.col)] = heading_glyph(t.pose.heading);
            }
            out << row << '\n';
        }
        out << "wedges ";
        for (int k = 0; k < kWedgeCount; ++k) {
            const bool focused = WedgeIndex(k) == t.human.focus;
            out << (focused ? '[' : ' ') << wedge_glyph(t.detection[WedgeIndex(k)]) << (focused ? ']' : ' ');
        }
        out << "\nindicator " << (t.indicator ? to_string(*t.indicator) : "none") << "  intent ";
        if (t.intent.wedge) {
            out << t.intent.wedge->value();
        } else {
            out << '-';
        }
        out << " (" << std::setprecision(2) << t.intent.density << ")  move "
            << (t.move ? to_string(*t.move) : "-") << "  command "
            << (t.command ? to_string(t.command->command) : "-");
        if (t.command && (t.command->command == ControlCommand::forward ||
                          t.command->command == ControlCommand::backward)) {
            out << " @" << t.command->toward.value();
        }
        if (t.session) {
            out << "  event " << t.session->event << "  phase " << t.session->phase;
        }
        out << '\n';
    }
    if (log.outcome) {
        const auto& o = *log.outcome;
        out << "\nresult: " << (o.success ? (o.correct ? "found" : "false positive") : "budget exhausted")
            << " after " << o.ticks << " ticks (" << std::setprecision(1) << o.elapsed_s << " s)\n";
    }
}

}  // namespace ghal
