#include "ghal/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>

namespace ghal {

namespace {

constexpr std::array<Cell, 8> kOffsets{{
    {0, 1},    // east
    {-1, 1},   // north-east
    {-1, 0},   // north
    {-1, -1},  // north-west
    {0, -1},   // west
    {1, -1},   // south-west
    {1, 0},    // south
    {1, 1},    // south-east
}};

std::string cell_str(Cell c) { return "(" + std::to_string(c.row) + ", " + std::to_string(c.col) + ")"; }

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            if (pos < text.size()) {
                lines.push_back(text.substr(pos));
            }
            break;
        }
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    return lines;
}

}  // namespace

Cell step_offset(Compass h) noexcept { return kOffsets[static_cast<std::size_t>(h)]; }

std::string_view to_string(Compass h) noexcept {
    static constexpr std::array<std::string_view, 8> names{"E", "NE", "N", "NW", "W", "SW", "S", "SE"};
    return names[static_cast<std::size_t>(h)];
}

OccupancyGrid::OccupancyGrid(int rows, int cols, std::vector<std::uint8_t> blocked)
    : rows_(rows), cols_(cols), blocked_(std::move(blocked)) {
    if (rows_ <= 0 || cols_ <= 0 || blocked_.size() != static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_)) {
        throw MapError("occupancy grid dimensions do not match its data");
    }
}

World::World(std::string name, OccupancyGrid grid, double cell_size_m, std::vector<ObjectPlacement> objects,
             std::string target_name, std::optional<Cell> default_start)
    : name_(std::move(name)),
      grid_(std::move(grid)),
      cell_size_(cell_size_m),
      objects_(std::move(objects)),
      target_name_(std::move(target_name)),
      default_start_(default_start) {
    if (!(cell_size_ > 0.0)) {
        throw MapError("cell_size must be positive");
    }
    object_cells_.assign(static_cast<std::size_t>(grid_.rows()) * static_cast<std::size_t>(grid_.cols()), 0);
    std::size_t targets = 0;
    for (std::size_t i = 0; i < objects_.size(); ++i) {
        const auto& o = objects_[i];
        if (!grid_.in_bounds(o.cell)) {
            throw MapError("object '" + o.name + "' at " + cell_str(o.cell) + " lies outside the grid");
        }
        if (grid_.blocked(o.cell)) {
            throw MapError("object '" + o.name + "' placed on blocked cell " + cell_str(o.cell));
        }
        if (object_cells_[grid_.index(o.cell)] != 0) {
            throw MapError("two objects share cell " + cell_str(o.cell));
        }
        object_cells_[grid_.index(o.cell)] = 1;
        if (o.name == target_name_) {
            ++targets;
            target_index_ = i;
        }
    }
    if (targets == 0) {
        throw MapError("no object carries the target name '" + target_name_ + "'");
    }
    if (targets > 1) {
        throw MapError("target '" + target_name_ + "' is not unique in the environment (" +
                       std::to_string(targets) + " placements)");
    }
    if (default_start_ && !passable(*default_start_)) {
        throw MapError("default start " + cell_str(*default_start_) + " is not a free cell");
    }

    const std::size_t n_cells = object_cells_.size();
    sightings_.resize(n_cells);
    for (int r = 0; r < grid_.rows(); ++r) {
        for (int c = 0; c < grid_.cols(); ++c) {
            const Cell from{r, c};
            if (grid_.blocked(from)) {
                continue;
            }
            auto& seen = sightings_[grid_.index(from)];
            for (std::size_t i = 0; i < objects_.size(); ++i) {
                const Cell to = objects_[i].cell;
                if (to == from || !line_of_sight(from, to)) {
                    continue;
                }
                const double dr = to.row - from.row;
                const double dc = to.col - from.col;
                const double bearing = std::atan2(-dr, dc);
                seen.push_back({static_cast<std::uint32_t>(i), std::hypot(dr, dc) * cell_size_, wedge_of_bearing(bearing)});
            }
        }
    }

    // Dijkstra from the target cell over passable cells, no corner cutting.
    geodesic_.assign(n_cells, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    const Cell target = target_cell();
    geodesic_[grid_.index(target)] = 0.0;
    open.emplace(0.0, grid_.index(target));
    while (!open.empty()) {
        const auto [d, idx] = open.top();
        open.pop();
        if (d > geodesic_[idx]) {
            continue;
        }
        const Cell cur{static_cast<int>(idx / static_cast<std::size_t>(grid_.cols())),
                       static_cast<int>(idx % static_cast<std::size_t>(grid_.cols()))};
        for (const Cell off : kOffsets) {
            const Cell next{cur.row + off.row, cur.col + off.col};
            if (!passable(next)) {
                continue;
            }
            const bool diagonal = off.row != 0 && off.col != 0;
            if (diagonal && (!passable({cur.row + off.row, cur.col}) || !passable({cur.row, cur.col + off.col}))) {
                continue;
            }
            const double nd = d + (diagonal ? std::sqrt(2.0) : 1.0);
            const std::size_t nidx = grid_.index(next);
            if (nd < geodesic_[nidx]) {
                geodesic_[nidx] = nd;
                open.emplace(nd, nidx);
            }
        }
    }
}

bool World::passable(Cell c) const noexcept {
    return grid_.in_bounds(c) && !grid_.blocked(c) && object_cells_[grid_.index(c)] == 0;
}

bool World::line_of_sight(Cell a, Cell b) const noexcept {
    // Walk from the lexicographically smaller end so that the traversed cells
    // do not depend on argument order.
    if (std::tie(b.row, b.col) < std::tie(a.row, a.col)) {
        std::swap(a, b);
    }
    const int dr = std::abs(b.row - a.row);
    const int dc = std::abs(b.col - a.col);
    const int sr = a.row < b.row ? 1 : -1;
    const int sc = a.col < b.col ? 1 : -1;
    int err = dc - dr;
    Cell cur = a;
    while (!(cur == b)) {
        const int e2 = 2 * err;
        if (e2 > -dr) {
            err -= dr;
            cur.col += sc;
        }
        if (e2 < dc) {
            err += dc;
            cur.row += sr;
        }
        if (!(cur == b) && grid_.blocked(cur)) {
            return false;
        }
    }
    return true;
}

std::optional<double> World::geodesic_to_target(Cell c) const noexcept {
    if (!grid_.in_bounds(c)) {
        return std::nullopt;
    }
    const double d = geodesic_[grid_.index(c)];
    if (!std::isfinite(d)) {
        return std::nullopt;
    }
    return d * cell_size_;
}

World load_map(std::string_view text_grid, std::string_view metadata) {
    std::vector<std::string_view> rows;
    for (auto line : split_lines(text_grid)) {
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.empty()) {
            continue;
        }
        rows.push_back(line);
    }
    if (rows.empty()) {
        throw MapError("map grid is empty");
    }
    const std::size_t width = rows.front().size();
    std::vector<std::uint8_t> blocked;
    blocked.reserve(rows.size() * width);
    std::optional<Cell> start;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != width) {
            throw MapError("ragged grid: row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                           " cells, expected " + std::to_string(width));
        }
        for (std::size_t c = 0; c < width; ++c) {
            switch (rows[r][c]) {
                case '#': blocked.push_back(1); break;
                case '.': blocked.push_back(0); break;
                case 'R':
                    if (start) {
                        throw MapError("more than one 'R' start cell");
                    }
                    start = Cell{static_cast<int>(r), static_cast<int>(c)};
                    blocked.push_back(0);
                    break;
                default:
                    throw MapError("unexpected character '" + std::string(1, rows[r][c]) + "' at " +
                                   cell_str({static_cast<int>(r), static_cast<int>(c)}));
            }
        }
    }
    OccupancyGrid grid(static_cast<int>(rows.size()), static_cast<int>(width), std::move(blocked));

    std::string name = "map";
    std::string target;
    double cell_size = 0.5;
    std::vector<ObjectPlacement> objects;
    int line_no = 0;
    for (auto raw : split_lines(metadata)) {
        ++line_no;
        auto line = trim(raw);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto colon = line.find(':');
        if (colon == std::string_view::npos) {
            throw MapError("metadata line " + std::to_string(line_no) + ": expected 'key: value'");
        }
        const auto key = trim(line.substr(0, colon));
        const std::string value(trim(line.substr(colon + 1)));
        if (key == "name") {
            name = value;
        } else if (key == "target") {
            if (!target.empty()) {
                throw MapError("metadata line " + std::to_string(line_no) + ": target named twice");
            }
            target = value;
        } else if (key == "cell_size") {
            try {
                cell_size = std::stod(value);
            } catch (const std::exception&) {
                throw MapError("metadata line " + std::to_string(line_no) + ": bad cell_size '" + value + "'");
            }
        } else if (key == "object") {
            std::istringstream in(value);
            ObjectPlacement o;
            if (!(in >> o.name >> o.cell.row >> o.cell.col) || !(in >> std::ws).eof()) {
                throw MapError("metadata line " + std::to_string(line_no) + ": expected 'object: <name> <row> <col>'");
            }
            objects.push_back(std::move(o));
        } else {
            throw MapError("metadata line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
        }
    }
    if (target.empty()) {
        throw MapError("metadata does not name a target");
    }
    return World(std::move(name), std::move(grid), cell_size, std::move(objects), std::move(target), start);
}

World parse_map_file(std::string_view text) {
    std::size_t pos = 0;
    for (auto line : split_lines(text)) {
        if (trim(line) == "---") {
            const auto split = pos;
            const auto rest = split + line.size() + 1;
            return load_map(text.substr(0, split), rest <= text.size() ? text.substr(rest) : std::string_view{});
        }
        pos += line.size() + 1;
    }
    throw MapError("map file lacks the '---' separator between grid and metadata");
}

World load_map_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw MapError("cannot open map file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_map_file(buf.str());
    } catch (const MapError& e) {
        throw MapError(path.string() + ": " + e.what());
    }
}

void DetectorConfig::validate() const {
    if (!(range_m > 0.0)) {
        throw std::invalid_argument("detector.range_m must be positive");
    }
    for (double p : {p_false_negative, p_false_positive}) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("detector probabilities must lie in [0, 1]");
        }
    }
}

Scene detect_scene(const World& w, const RobotPose& pose, const DetectorConfig& cfg, Rng& rng) {
    const std::size_t n = w.objects().size();
    // Draw every variate up front: fn per object, fp per wedge.
    std::vector<double> u(n + kWedgeCount);
    for (double& x : u) {
        x = rng.uniform();
    }

    Scene scene;
    std::array<bool, kWedgeCount> target{};
    std::array<bool, kWedgeCount> clutter{};
    const int heading = static_cast<int>(pose.heading);
    for (const Sighting& s : w.sightings(pose.cell)) {
        if (s.distance_m > cfg.range_m) {
            continue;
        }
        if (u[s.object] < cfg.p_false_negative) {
            continue;
        }
        const auto& obj = w.objects()[s.object];
        const bool is_target = s.object == w.target_index();
        const WedgeIndex wedge = s.world_wedge - heading;
        (is_target ? target : clutter)[static_cast<std::size_t>(wedge.value())] = true;
        scene.objects[static_cast<std::size_t>(wedge.value())].push_back({obj.name, is_target, false});
    }
    for (int k = 0; k < kWedgeCount; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        if (!target[ku] && !clutter[ku] && u[n + ku] < cfg.p_false_positive) {
            clutter[ku] = true;
            scene.objects[ku].push_back({"unknown", false, true});
        }
        scene.values[WedgeIndex(k)] = make_wedge_value(target[ku], clutter[ku]);
    }
    return scene;
}

WedgeVector detect(const World& w, const RobotPose& pose, const DetectorConfig& cfg, Rng& rng) {
    return detect_scene(w, pose, cfg, rng).values;
}

WedgeVector detect_noise_free(const World& w, const RobotPose& pose, double range_m) {
    WedgeVector v;
    const int heading = static_cast<int>(pose.heading);
    for (const Sighting& s : w.sightings(pose.cell)) {
        if (s.distance_m > range_m) {
            continue;
        }
        const WedgeIndex wedge = s.world_wedge - heading;
        const bool is_target = s.object == w.target_index();
        const WedgeValue old = v[wedge];
        v[wedge] = make_wedge_value(contains_target(old) || is_target, contains_clutter(old) || !is_target);
    }
    return v;
}

std::string_view to_string(ControlCommand c) noexcept {
    switch (c) {
        case ControlCommand::stop: return "stop";
        case ControlCommand::forward: return "forward";
        case ControlCommand::backward: return "backward";
        case ControlCommand::rotate_left: return "rotate_left";
        case ControlCommand::rotate_right: return "rotate_right";
    }
    return "?";
}

RobotPose step_robot(const World& w, const RobotPose& pose, ControlCommand c) noexcept {
    switch (c) {
        case ControlCommand::stop: return pose;
        case ControlCommand::rotate_left: return {pose.cell, turn(pose.heading, 1)};
        case ControlCommand::rotate_right: return {pose.cell, turn(pose.heading, -1)};
        case ControlCommand::forward:
        case ControlCommand::backward: {
            Cell off = step_offset(pose.heading);
            if (c == ControlCommand::backward) {
                off = {-off.row, -off.col};
            }
            const Cell next{pose.cell.row + off.row, pose.cell.col + off.col};
            if (!w.passable(next)) {
                return pose;
            }
            if (off.row != 0 && off.col != 0 &&
                (!w.passable({pose.cell.row + off.row, pose.cell.col}) ||
                 !w.passable({pose.cell.row, pose.cell.col + off.col}))) {
                return pose;
            }
            return {next, pose.heading};
        }
    }
    return pose;
}

std::string_view to_string(HeadMotion m) noexcept {
    switch (m) {
        case HeadMotion::none: return "none";
        case HeadMotion::left: return "left";
        case HeadMotion::right: return "right";
    }
    return "?";
}

std::string_view to_string(HumanMove m) noexcept {
    switch (m) {
        case HumanMove::look_left: return "look_left";
        case HumanMove::look_right: return "look_right";
        case HumanMove::move_forward: return "move_forward";
        case HumanMove::move_backward: return "move_backward";
    }
    return "?";
}

std::string_view to_string(SystemKind k) noexcept {
    switch (k) {
        case SystemKind::MFO: return "MFO";
        case SystemKind::ADV: return "ADV";
        case SystemKind::FGS: return "FGS";
        case SystemKind::RLGS: return "RLGS";
        case SystemKind::GHAL360: return "GHAL360";
    }
    return "?";
}

SystemKind parse_system_kind(std::string_view name) {
    for (SystemKind k : kAllSystems) {
        if (to_string(k) == name) {
            return k;
        }
    }
    throw std::invalid_argument("unknown system '" + std::string(name) + "'");
}

void HumanConfig::validate() const {
    if (!(p_follow >= 0.0 && p_follow <= 1.0)) {
        throw std::invalid_argument("human.p_follow must lie in [0, 1]");
    }
}

HumanMove virtual_human_step(const HumanState& /*h*/, std::optional<GuidanceAction> indicator, SystemKind mode,
                             const HumanConfig& cfg, Rng& rng) {
    const bool follow = rng.bernoulli(cfg.p_follow);
    const auto random_move = static_cast<HumanMove>(rng.below_int(4));
    if (!shows_indicators(mode) || !indicator || *indicator == GuidanceAction::confirm) {
        return random_move;
    }
    if (!follow) {
        return random_move;
    }
    return *indicator == GuidanceAction::left ? HumanMove::look_left : HumanMove::look_right;
}

HumanUpdate apply_human_move(const HumanState& h, HumanMove m) noexcept {
    switch (m) {
        case HumanMove::look_left: return {{h.focus + 1, HeadMotion::left}, std::nullopt};
        case HumanMove::look_right: return {{h.focus - 1, HeadMotion::right}, std::nullopt};
        case HumanMove::move_forward: return {{h.focus, HeadMotion::none}, ControlCommand::forward};
        case HumanMove::move_backward: return {{h.focus, HeadMotion::none}, ControlCommand::backward};
    }
    return {h, std::nullopt};
}

bool target_in_focus(const World& w, const RobotPose& pose, const HumanState& h, double range_m) {
    return contains_target(detect_noise_free(w, pose, range_m)[h.focus]);
}

}  // namespace ghal
