#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ghal/rng.hpp"
#include "ghal/wedge.hpp"

namespace ghal {

struct Cell {
    int row = 0;
    int col = 0;

    friend constexpr bool operator==(const Cell&, const Cell&) noexcept = default;
};

/// Robot heading, 45 degree steps counterclockwise from east (+col).
enum class Compass : std::uint8_t {
    east = 0,
    north_east,
    north,
    north_west,
    west,
    south_west,
    south,
    south_east,
};

[[nodiscard]] constexpr Compass turn(Compass h, int steps) noexcept {
    return static_cast<Compass>(((static_cast<int>(h) + steps) % 8 + 8) % 8);
}

/// Grid offset of one step along `h` (rows grow southward).
[[nodiscard]] Cell step_offset(Compass h) noexcept;

[[nodiscard]] std::string_view to_string(Compass h) noexcept;

struct RobotPose {
    Cell cell;
    Compass heading = Compass::east;

    friend constexpr bool operator==(const RobotPose&, const RobotPose&) noexcept = default;
};

struct ObjectPlacement {
    std::string name;
    Cell cell;
};

class MapError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class OccupancyGrid {
public:
    OccupancyGrid() = default;
    OccupancyGrid(int rows, int cols, std::vector<std::uint8_t> blocked);

    [[nodiscard]] int rows() const noexcept { return rows_; }
    [[nodiscard]] int cols() const noexcept { return cols_; }
    [[nodiscard]] bool in_bounds(Cell c) const noexcept {
        return c.row >= 0 && c.row < rows_ && c.col >= 0 && c.col < cols_;
    }
    [[nodiscard]] bool blocked(Cell c) const noexcept { return blocked_[index(c)] != 0; }
    [[nodiscard]] std::size_t index(Cell c) const noexcept {
        return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(c.col);
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<std::uint8_t> blocked_;
};

/// An object seen from some cell: which object, how far, in which world-frame
/// wedge (wedge 0 = east).
struct Sighting {
    std::uint32_t object = 0;
    double distance_m = 0.0;
    WedgeIndex world_wedge;
};

/// Immutable grid world with object placements. Object cells are obstacles
/// for the robot; walls occlude sight lines, objects do not.
class World {
public:
    World(std::string name, OccupancyGrid grid, double cell_size_m, std::vector<ObjectPlacement> objects,
          std::string target_name, std::optional<Cell> default_start);

    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] const OccupancyGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] double cell_size() const noexcept { return cell_size_; }
    [[nodiscard]] const std::vector<ObjectPlacement>& objects() const noexcept { return objects_; }
    [[nodiscard]] const std::string& target_name() const noexcept { return target_name_; }
    [[nodiscard]] std::size_t target_index() const noexcept { return target_index_; }
    [[nodiscard]] Cell target_cell() const noexcept { return objects_[target_index_].cell; }
    [[nodiscard]] const std::optional<Cell>& default_start() const noexcept { return default_start_; }

    /// In bounds, not a wall, and not occupied by an object.
    [[nodiscard]] bool passable(Cell c) const noexcept;

    /// Straight-line visibility between two cells; symmetric in its arguments.
    [[nodiscard]] bool line_of_sight(Cell a, Cell b) const noexcept;

    /// Objects with an unobstructed sight line from `c`, any distance.
    [[nodiscard]] const std::vector<Sighting>& sightings(Cell c) const noexcept { return sightings_[grid_.index(c)]; }

    /// Shortest 8-connected free-cell path length to the target, in meters;
    /// nullopt when the target is unreachable from `c`.
    [[nodiscard]] std::optional<double> geodesic_to_target(Cell c) const noexcept;

private:
    std::string name_;
    OccupancyGrid grid_;
    double cell_size_;
    std::vector<ObjectPlacement> objects_;
    std::string target_name_;
    std::size_t target_index_ = 0;
    std::optional<Cell> default_start_;
    std::vector<std::uint8_t> object_cells_;
    std::vector<std::vector<Sighting>> sightings_;
    std::vector<double> geodesic_;
};

/// Builds a World from a character grid ('#' blocked, '.' free, 'R' free
/// default start) and a metadata document of `key: value` lines:
///   name: <label>        cell_size: <meters>      target: <object name>
///   object: <name> <row> <col>   (repeatable)
[[nodiscard]] World load_map(std::string_view text_grid, std::string_view metadata);

/// A map file is the grid, a line holding `---`, then the metadata.
[[nodiscard]] World parse_map_file(std::string_view text);
[[nodiscard]] World load_map_file(const std::filesystem::path& path);

struct DetectorConfig {
    double range_m = 6.0;
    double p_false_negative = 0.05;
    /// Phantom clutter per empty wedge; phantom targets are never produced.
    double p_false_positive = 0.05;

    void validate() const;
    [[nodiscard]] DetectorConfig noise_free() const noexcept { return {range_m, 0.0, 0.0}; }

    friend bool operator==(const DetectorConfig&, const DetectorConfig&) = default;
};

struct DetectedObject {
    std::string name;
    bool labeled_target = false;
    bool phantom = false;
};

/// Detector output: per-wedge values plus the labels behind them.
struct Scene {
    WedgeVector values;
    std::array<std::vector<DetectedObject>, kWedgeCount> objects;
};

/// Simulated detector. Consumes exactly objects + 8 draws from `rng`
/// regardless of geometry, so parallel streams stay aligned.
[[nodiscard]] Scene detect_scene(const World& w, const RobotPose& pose, const DetectorConfig& cfg, Rng& rng);
[[nodiscard]] WedgeVector detect(const World& w, const RobotPose& pose, const DetectorConfig& cfg, Rng& rng);
[[nodiscard]] WedgeVector detect_noise_free(const World& w, const RobotPose& pose, double range_m);

enum class ControlCommand : std::uint8_t { stop, forward, backward, rotate_left, rotate_right };

[[nodiscard]] std::string_view to_string(ControlCommand c) noexcept;

[[nodiscard]] RobotPose step_robot(const World& w, const RobotPose& pose, ControlCommand c) noexcept;

enum class HeadMotion : std::uint8_t { none, left, right };

[[nodiscard]] std::string_view to_string(HeadMotion m) noexcept;

/// Head orientation quantized to a robot-frame wedge.
struct HumanState {
    WedgeIndex focus;
    HeadMotion last_motion = HeadMotion::none;

    friend constexpr bool operator==(const HumanState&, const HumanState&) noexcept = default;
};

enum class HumanMove : std::uint8_t { look_left, look_right, move_forward, move_backward };

[[nodiscard]] std::string_view to_string(HumanMove m) noexcept;

enum class SystemKind : std::uint8_t { MFO, ADV, FGS, RLGS, GHAL360 };

inline constexpr std::array<SystemKind, 5> kAllSystems{SystemKind::MFO, SystemKind::ADV, SystemKind::FGS,
                                                       SystemKind::RLGS, SystemKind::GHAL360};

[[nodiscard]] std::string_view to_string(SystemKind k) noexcept;
/// Throws std::invalid_argument for unknown names.
[[nodiscard]] SystemKind parse_system_kind(std::string_view name);

/// Systems that draw guidance indicators.
[[nodiscard]] constexpr bool shows_indicators(SystemKind k) noexcept {
    return k == SystemKind::FGS || k == SystemKind::RLGS || k == SystemKind::GHAL360;
}

struct HumanConfig {
    double p_follow = 0.95;

    void validate() const;
    friend bool operator==(const HumanConfig&, const HumanConfig&) = default;
};

/// Virtual operator: one action per tick. Uniformly random without an
/// indicator; with a left/right indicator it follows with probability
/// p_follow. Always consumes two draws from `rng`.
[[nodiscard]] HumanMove virtual_human_step(const HumanState& h, std::optional<GuidanceAction> indicator,
                                           SystemKind mode, const HumanConfig& cfg, Rng& rng);

struct HumanUpdate {
    HumanState human;
    std::optional<ControlCommand> command;
};

[[nodiscard]] HumanUpdate apply_human_move(const HumanState& h, HumanMove m) noexcept;

/// Noise-free check that the target lies in the focused wedge.
[[nodiscard]] bool target_in_focus(const World& w, const RobotPose& pose, const HumanState& h, double range_m);

}  // namespace ghal
