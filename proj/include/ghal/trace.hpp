#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ghal/systems.hpp"

namespace ghal {

inline constexpr int kTraceFormatVersion = 1;

struct TraceHeader {
    int version = kTraceFormatVersion;
    std::string source = "trial";  // "trial" or "session"
    SystemKind system = SystemKind::ADV;
    std::string map;
    std::uint64_t seed = 0;
    RobotPose start;
    double start_distance_m = 0.0;
    int budget_ticks = 0;
    double seconds_per_tick = 0.0;
    double detector_range_m = 0.0;

    friend bool operator==(const TraceHeader&, const TraceHeader&) = default;
};

struct TraceOutcome {
    int ticks = 0;
    double elapsed_s = 0.0;
    bool success = false;
    bool correct = false;

    friend bool operator==(const TraceOutcome&, const TraceOutcome&) = default;
};

/// A trace log: header line, one line per tick, then an optional result line
/// (absent while a live session is still open).
struct TraceLog {
    TraceHeader header;
    std::vector<TickRecord> ticks;
    std::optional<TraceOutcome> outcome;

    friend bool operator==(const TraceLog&, const TraceLog&) = default;
};

class TraceFormatError : public std::runtime_error {
public:
    TraceFormatError(std::size_t line, const std::string& what);
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

[[nodiscard]] TraceLog make_trace(const TrialResult& r, const std::string& map_name, const TrialSetup& setup,
                                  const TrialConfig& cfg);

/// JSON Lines; each record is one compact object with a "type" key.
void write_trace(std::ostream& out, const TraceLog& log);
void write_trace(const std::filesystem::path& path, const TraceLog& log);
[[nodiscard]] std::string trace_line(const TickRecord& t);
[[nodiscard]] std::string trace_header_line(const TraceHeader& h);

[[nodiscard]] TraceLog read_trace(std::istream& in);
[[nodiscard]] TraceLog read_trace(const std::filesystem::path& path);

/// Text frames of a trace over `world`: map with robot marker, wedge strip,
/// indicator, intent and command per tick.
void render_trace(std::ostream& out, const World& world, const TraceLog& log);

}  // namespace ghal
