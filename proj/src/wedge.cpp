#include "ghal/wedge.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ghal {

std::string_view to_string(WedgeValue v) noexcept {
    switch (v) {
        case WedgeValue::empty: return "w0";
        case WedgeValue::clutter: return "w1";
        case WedgeValue::target: return "w2";
        case WedgeValue::target_clutter: return "w3";
    }
    return "?";
}

std::string_view to_string(GuidanceAction a) noexcept {
    switch (a) {
        case GuidanceAction::confirm: return "confirm";
        case GuidanceAction::left: return "left";
        case GuidanceAction::right: return "right";
    }
    return "?";
}

StateIndex encode_state(const EgoState& s) noexcept {
    std::uint32_t index = 0;
    for (int k = kWedgeCount - 1; k >= 0; --k) {
        index = index * 4U + static_cast<std::uint32_t>(s[k]);
    }
    return static_cast<StateIndex>(index);
}

EgoState decode_state(std::uint32_t index) {
    if (index >= kStateCount) {
        throw std::out_of_range("state index " + std::to_string(index) + " outside [0, 65536)");
    }
    EgoState s;
    for (int k = 0; k < kWedgeCount; ++k) {
        s[k] = static_cast<WedgeValue>(index & 3U);
        index >>= 2U;
    }
    return s;
}

EgoState to_egocentric(const WedgeVector& v, WedgeIndex focus) noexcept {
    EgoState s;
    for (int k = 0; k < kWedgeCount; ++k) {
        s[k] = v[focus + k];
    }
    return s;
}

WedgeVector rotate(const WedgeVector& v, int shift) noexcept {
    WedgeVector out;
    for (int k = 0; k < kWedgeCount; ++k) {
        out[WedgeIndex(k)] = v[WedgeIndex(k + shift)];
    }
    return out;
}

EgoState rotate(const EgoState& s, int shift) noexcept {
    EgoState out;
    for (int k = 0; k < kWedgeCount; ++k) {
        out[k] = s[WedgeIndex(k + shift).value()];
    }
    return out;
}

EgoState reflect(const EgoState& s) noexcept {
    EgoState out;
    for (int k = 0; k < kWedgeCount; ++k) {
        out[k] = s[WedgeIndex(-k).value()];
    }
    return out;
}

CircularDistance circular_distance(WedgeIndex from, WedgeIndex to) noexcept {
    const int ccw = (to - from.value()).value();
    if (ccw == 0) {
        return {0, Rotation::none};
    }
    if (ccw == kWedgeCount / 2) {
        return {ccw, Rotation::tie};
    }
    if (ccw < kWedgeCount / 2) {
        return {ccw, Rotation::left};
    }
    return {kWedgeCount - ccw, Rotation::right};
}

WedgeIndex wedge_of_bearing(double angle_rad) {
    if (!std::isfinite(angle_rad)) {
        throw std::invalid_argument("bearing must be finite");
    }
    constexpr double kWidth = std::numbers::pi / 4.0;
    constexpr double kTwoPi = 2.0 * std::numbers::pi;
    double a = std::fmod(angle_rad + kWidth / 2.0, kTwoPi);
    if (a < 0.0) {
        a += kTwoPi;
    }
    auto bucket = static_cast<int>(std::floor(a / kWidth));
    return WedgeIndex(bucket);
}

}  // namespace ghal
