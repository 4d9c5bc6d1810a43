#include "ghal/qtable.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace ghal {

namespace {

constexpr std::array<char, 4> kMagic{'G', 'H', 'Q', 'T'};
constexpr std::size_t kPayloadBytes = static_cast<std::size_t>(kStateCount) * kActionCount * 8;

template <typename T>
void put_le(std::string& buf, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        buf.push_back(static_cast<char>((value >> (8 * i)) & 0xFFU));
    }
}

template <typename T>
T get_le(const unsigned char* p) {
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        value |= static_cast<T>(p[i]) << (8 * i);
    }
    return value;
}

}  // namespace

double QTable::max_value(StateIndex s) const noexcept {
    const std::size_t base = slot(s, GuidanceAction::confirm);
    return std::max({values_[base], values_[base + 1], values_[base + 2]});
}

GuidanceAction QTable::argmax(StateIndex s) const noexcept {
    GuidanceAction best = GuidanceAction::confirm;
    double best_value = at(s, best);
    for (GuidanceAction a : {GuidanceAction::left, GuidanceAction::right}) {
        if (at(s, a) > best_value) {
            best = a;
            best_value = at(s, a);
        }
    }
    return best;
}

GuidancePolicy::GuidancePolicy(std::vector<GuidanceAction> actions) : actions_(std::move(actions)) {
    if (actions_.size() != kStateCount) {
        throw std::invalid_argument("a guidance policy must cover all 65536 states");
    }
}

GuidancePolicy greedy_policy(const QTable& q) {
    std::vector<GuidanceAction> actions(kStateCount);
    for (std::uint32_t s = 0; s < kStateCount; ++s) {
        actions[s] = q.argmax(static_cast<StateIndex>(s));
    }
    return GuidancePolicy(std::move(actions));
}

void save_qtable(const QTable& q, std::ostream& out) {
    std::string buf;
    buf.reserve(4 + 2 + kPayloadBytes + 8);
    buf.append(kMagic.data(), kMagic.size());
    put_le<std::uint16_t>(buf, kQTableFormatVersion);
    std::uint64_t checksum = 0;
    for (double v : q.values()) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (std::size_t i = 0; i < 8; ++i) {
            const auto byte = static_cast<unsigned char>((bits >> (8 * i)) & 0xFFU);
            buf.push_back(static_cast<char>(byte));
            checksum += byte;
        }
    }
    put_le<std::uint64_t>(buf, checksum);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) {
        throw std::runtime_error("failed to write Q-table");
    }
}

void save_qtable(const QTable& q, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    save_qtable(q, out);
}

QTable load_qtable(std::istream& in) {
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    if (in.gcount() != static_cast<std::streamsize>(magic.size())) {
        throw QTableFormatError("truncated header", static_cast<std::uint64_t>(in.gcount()));
    }
    if (magic != kMagic) {
        throw QTableFormatError("bad magic bytes, expected GHQT", 0);
    }
    std::array<unsigned char, 2> version_bytes{};
    in.read(reinterpret_cast<char*>(version_bytes.data()), 2);
    if (in.gcount() != 2) {
        throw QTableFormatError("truncated header", 4 + static_cast<std::uint64_t>(in.gcount()));
    }
    const auto version = get_le<std::uint16_t>(version_bytes.data());
    if (version != kQTableFormatVersion) {
        throw QTableVersionError(version, 4);
    }

    std::vector<unsigned char> payload(kPayloadBytes);
    in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
    if (in.gcount() != static_cast<std::streamsize>(payload.size())) {
        throw QTableFormatError("truncated payload", 6 + static_cast<std::uint64_t>(in.gcount()));
    }
    std::array<unsigned char, 8> trailer{};
    in.read(reinterpret_cast<char*>(trailer.data()), 8);
    if (in.gcount() != 8) {
        throw QTableFormatError("truncated checksum", 6 + kPayloadBytes + static_cast<std::uint64_t>(in.gcount()));
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw QTableFormatError("trailing bytes after checksum", 6 + kPayloadBytes + 8);
    }

    std::uint64_t checksum = 0;
    for (unsigned char b : payload) {
        checksum += b;
    }
    if (checksum != get_le<std::uint64_t>(trailer.data())) {
        throw QTableFormatError("checksum mismatch", 6 + kPayloadBytes);
    }

    QTable q;
    auto& values = q.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = std::bit_cast<double>(get_le<std::uint64_t>(payload.data() + 8 * i));
        if (!std::isfinite(v)) {
            throw QTableFormatError("non-finite Q value", 6 + 8 * i);
        }
        values[i] = v;
    }
    return q;
}

QTable load_qtable(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    return load_qtable(in);
}

}  // namespace ghal
