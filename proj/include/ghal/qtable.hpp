#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "ghal/wedge.hpp"

namespace ghal {

/// Dense action-value table over all 4^8 ego states and the three guidance
/// actions, with per-entry visit counters.
class QTable {
public:
    QTable() : values_(kStateCount * kActionCount, 0.0), visits_(kStateCount * kActionCount, 0) {}

    [[nodiscard]] double at(StateIndex s, GuidanceAction a) const noexcept { return values_[slot(s, a)]; }
    [[nodiscard]] double& at(StateIndex s, GuidanceAction a) noexcept { return values_[slot(s, a)]; }

    [[nodiscard]] std::uint32_t visits(StateIndex s, GuidanceAction a) const noexcept { return visits_[slot(s, a)]; }
    void count_visit(StateIndex s, GuidanceAction a) noexcept { ++visits_[slot(s, a)]; }

    [[nodiscard]] double max_value(StateIndex s) const noexcept;

    /// Greedy action with ties broken in the order confirm, left, right.
    [[nodiscard]] GuidanceAction argmax(StateIndex s) const noexcept;

    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
    [[nodiscard]] std::vector<double>& values() noexcept { return values_; }

    /// Compares values only; visit counts are bookkeeping.
    friend bool operator==(const QTable& a, const QTable& b) noexcept { return a.values_ == b.values_; }

private:
    static std::size_t slot(StateIndex s, GuidanceAction a) noexcept {
        return static_cast<std::size_t>(s) * kActionCount + static_cast<std::size_t>(a);
    }

    std::vector<double> values_;
    std::vector<std::uint32_t> visits_;
};

/// Frozen greedy action per state.
class GuidancePolicy {
public:
    GuidancePolicy() : actions_(kStateCount, GuidanceAction::confirm) {}
    explicit GuidancePolicy(std::vector<GuidanceAction> actions);

    [[nodiscard]] GuidanceAction operator()(StateIndex s) const noexcept { return actions_[s]; }
    [[nodiscard]] GuidanceAction operator()(const EgoState& s) const noexcept { return actions_[encode_state(s)]; }

    [[nodiscard]] const std::vector<GuidanceAction>& actions() const noexcept { return actions_; }

    friend bool operator==(const GuidancePolicy&, const GuidancePolicy&) = default;

private:
    std::vector<GuidanceAction> actions_;
};

[[nodiscard]] GuidancePolicy greedy_policy(const QTable& q);

/// Raised for malformed Q-table files; `offset` is the byte position where
/// reading failed.
class QTableFormatError : public std::runtime_error {
public:
    QTableFormatError(const std::string& what, std::uint64_t offset)
        : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

    [[nodiscard]] std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

class QTableVersionError : public QTableFormatError {
public:
    QTableVersionError(std::uint16_t found, std::uint64_t offset)
        : QTableFormatError("unsupported Q-table format version " + std::to_string(found), offset), found_(found) {}

    [[nodiscard]] std::uint16_t found() const noexcept { return found_; }

private:
    std::uint16_t found_;
};

inline constexpr std::uint16_t kQTableFormatVersion = 1;

// File layout (little-endian): "GHQT", u16 version, 65536*3 f64 in
// state-major / action-minor order, u64 sum of payload bytes.
void save_qtable(const QTable& q, std::ostream& out);
void save_qtable(const QTable& q, const std::filesystem::path& path);
[[nodiscard]] QTable load_qtable(std::istream& in);
[[nodiscard]] QTable load_qtable(const std::filesystem::path& path);

}  // namespace ghal
