#pragma once

#include <optional>
#include <vector>

#include "ghal/rng.hpp"
#include "ghal/wedge.hpp"
#include "ghal/world.hpp"

namespace ghal {

struct FilterConfig {
    int particles = 200;
    /// Probability a particle keeps its wedge during prediction.
    double p_stay = 0.7;
    /// Observation likelihood is likelihood_base ^ circular distance.
    double likelihood_base = 0.1;
    /// Inclusive density threshold for a decided estimate.
    double threshold = 0.7;
    bool enabled = true;

    void validate() const;
    friend bool operator==(const FilterConfig&, const FilterConfig&) = default;
};

struct Particle {
    WedgeIndex wedge;
    double weight = 0.0;
};

/// Fixed-size weighted particle set over the human's intended wedge.
class ParticleSet {
public:
    explicit ParticleSet(std::vector<Particle> particles) : particles_(std::move(particles)) {}

    [[nodiscard]] const std::vector<Particle>& particles() const noexcept { return particles_; }
    [[nodiscard]] std::vector<Particle>& particles() noexcept { return particles_; }
    [[nodiscard]] std::size_t size() const noexcept { return particles_.size(); }

    [[nodiscard]] double total_weight() const noexcept;
    /// Weight mass on each wedge.
    [[nodiscard]] std::array<double, kWedgeCount> density() const noexcept;
    /// 1 / sum of squared weights.
    [[nodiscard]] double effective_sample_size() const noexcept;

private:
    std::vector<Particle> particles_;
};

struct Evidence {
    HeadMotion head_motion = HeadMotion::none;
    WedgeIndex focused;
};

struct IntentEstimate {
    std::optional<WedgeIndex> wedge;  // empty when undecided
    double density = 0.0;             // mass on the most likely wedge

    [[nodiscard]] bool decided() const noexcept { return wedge.has_value(); }
    friend bool operator==(const IntentEstimate&, const IntentEstimate&) = default;
};

/// Round-robin wedge assignment with uniform weights. Throws for M < 8.
[[nodiscard]] ParticleSet init_particles(int m);

/// Motion model: stay with p_stay, otherwise step one wedge in the observed
/// head-motion direction (either direction with equal odds when none).
/// Consumes one draw per particle.
[[nodiscard]] ParticleSet predict(const ParticleSet& ps, HeadMotion motion, const FilterConfig& cfg, Rng& rng);

/// Reweights by likelihood_base^distance to the focused wedge, then normalizes.
[[nodiscard]] ParticleSet update_weights(const ParticleSet& ps, const Evidence& e, const FilterConfig& cfg);

/// Systematic resampling when ESS < M/2; otherwise returns the set unchanged.
/// Always consumes one draw.
[[nodiscard]] ParticleSet resample(const ParticleSet& ps, Rng& rng);

[[nodiscard]] IntentEstimate estimate_intent(const ParticleSet& ps, double threshold);

/// Relabels every particle by `shift` wedges, e.g. after the robot frame turns.
[[nodiscard]] ParticleSet shift_frame(const ParticleSet& ps, int shift);

/// One tick of base motion: a rotation, or a one-cell translation toward
/// (forward) or away from (backward) the robot-frame wedge `toward`. The
/// heading is unchanged by translations.
struct ControlSignal {
    ControlCommand command = ControlCommand::stop;
    WedgeIndex toward;

    friend constexpr bool operator==(const ControlSignal&, const ControlSignal&) noexcept = default;
};

/// Undecided: stop. Wedge 4: backward. Otherwise drive toward the intended
/// wedge (wedge 0 is plain forward).
[[nodiscard]] ControlSignal controller(const IntentEstimate& intent, const RobotPose& pose) noexcept;

/// Filter instance owning its set and random stream; one per trial or session.
class IntentFilter {
public:
    IntentFilter(FilterConfig cfg, std::uint64_t seed);

    /// predict, weight, resample; returns the new estimate.
    IntentEstimate observe(const Evidence& e);

    [[nodiscard]] const ParticleSet& particles() const noexcept { return set_; }
    [[nodiscard]] const IntentEstimate& estimate() const noexcept { return estimate_; }
    [[nodiscard]] const FilterConfig& config() const noexcept { return cfg_; }

private:
    FilterConfig cfg_;
    Rng rng_;
    ParticleSet set_;
    IntentEstimate estimate_;
};

}  // namespace ghal
