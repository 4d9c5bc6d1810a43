#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace ghal {

inline constexpr int kWedgeCount = 8;
inline constexpr std::uint32_t kStateCount = 65536;  // 4^8
inline constexpr int kActionCount = 3;

/// Content class of one 45 degree wedge of the panorama.
enum class WedgeValue : std::uint8_t {
    empty = 0,           // w0
    clutter = 1,         // w1
    target = 2,          // w2
    target_clutter = 3,  // w3
};

[[nodiscard]] constexpr bool contains_target(WedgeValue v) noexcept {
    return (static_cast<std::uint8_t>(v) & 2U) != 0;
}

[[nodiscard]] constexpr bool contains_clutter(WedgeValue v) noexcept {
    return (static_cast<std::uint8_t>(v) & 1U) != 0;
}

[[nodiscard]] constexpr WedgeValue make_wedge_value(bool target, bool clutter) noexcept {
    return static_cast<WedgeValue>((target ? 2U : 0U) | (clutter ? 1U : 0U));
}

[[nodiscard]] std::string_view to_string(WedgeValue v) noexcept;

/// Index into an 8-wedge ring; arithmetic wraps modulo 8.
class WedgeIndex {
public:
    constexpr WedgeIndex() noexcept = default;
    constexpr explicit WedgeIndex(int raw) noexcept : value_(wrap(raw)) {}

    [[nodiscard]] constexpr int value() const noexcept { return value_; }

    [[nodiscard]] constexpr WedgeIndex operator+(int k) const noexcept { return WedgeIndex(value_ + k); }
    [[nodiscard]] constexpr WedgeIndex operator-(int k) const noexcept { return WedgeIndex(value_ - k); }

    friend constexpr bool operator==(WedgeIndex, WedgeIndex) noexcept = default;

private:
    static constexpr int wrap(int raw) noexcept { return ((raw % kWedgeCount) + kWedgeCount) % kWedgeCount; }
    int value_ = 0;
};

using WedgeArray = std::array<WedgeValue, kWedgeCount>;

/// Scene abstraction in the robot frame. Index 0 is the forward wedge and
/// indices grow counterclockwise.
struct WedgeVector {
    WedgeArray values{};

    [[nodiscard]] constexpr WedgeValue operator[](WedgeIndex i) const noexcept { return values[i.value()]; }
    [[nodiscard]] constexpr WedgeValue& operator[](WedgeIndex i) noexcept { return values[i.value()]; }

    friend constexpr bool operator==(const WedgeVector&, const WedgeVector&) noexcept = default;
};

/// Scene abstraction relative to the human's focus: index 0 is the focused
/// wedge, index k is k wedges counterclockwise from it.
struct EgoState {
    WedgeArray values{};

    [[nodiscard]] constexpr WedgeValue operator[](int k) const noexcept { return values[static_cast<std::size_t>(k)]; }
    [[nodiscard]] constexpr WedgeValue& operator[](int k) noexcept { return values[static_cast<std::size_t>(k)]; }

    [[nodiscard]] constexpr WedgeValue focused() const noexcept { return values[0]; }

    friend constexpr bool operator==(const EgoState&, const EgoState&) noexcept = default;
};

/// Dense state index in [0, 65536).
using StateIndex = std::uint16_t;

enum class GuidanceAction : std::uint8_t {
    confirm = 0,
    left = 1,
    right = 2,
};

inline constexpr std::array<GuidanceAction, kActionCount> kAllActions{
    GuidanceAction::confirm, GuidanceAction::left, GuidanceAction::right};

[[nodiscard]] std::string_view to_string(GuidanceAction a) noexcept;

/// Rotation sense between two wedges. `left` is counterclockwise (index +1).
enum class Rotation : std::uint8_t { none, left, right, tie };

struct CircularDistance {
    int distance = 0;
    Rotation direction = Rotation::none;

    friend constexpr bool operator==(const CircularDistance&, const CircularDistance&) noexcept = default;
};

/// Base-4 positional encoding, ego index 0 least significant.
[[nodiscard]] StateIndex encode_state(const EgoState& s) noexcept;

/// Inverse of encode_state. Throws std::out_of_range for indices >= 65536.
[[nodiscard]] EgoState decode_state(std::uint32_t index);

/// result[k] = v[(focus + k) mod 8]
[[nodiscard]] EgoState to_egocentric(const WedgeVector& v, WedgeIndex focus) noexcept;

/// Robot-frame vector shifted so that result[k] = v[(k + shift) mod 8].
[[nodiscard]] WedgeVector rotate(const WedgeVector& v, int shift) noexcept;

/// Ego state seen after the focus moves `shift` wedges counterclockwise.
[[nodiscard]] EgoState rotate(const EgoState& s, int shift) noexcept;

/// Mirror image across the focus axis; swaps the meaning of left and right.
[[nodiscard]] EgoState reflect(const EgoState& s) noexcept;

/// Shortest rotation taking `from` onto `to`.
[[nodiscard]] CircularDistance circular_distance(WedgeIndex from, WedgeIndex to) noexcept;

/// Wedge containing a robot-frame bearing. Wedge 0 is centered on the forward
/// axis and covers [-pi/8, pi/8). Throws std::invalid_argument for NaN/inf.
[[nodiscard]] WedgeIndex wedge_of_bearing(double angle_rad);

}  // namespace ghal
