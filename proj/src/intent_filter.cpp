#include "ghal/intent_filter.hpp"

#include <cmath>
#include <stdexcept>

namespace ghal {

void FilterConfig::validate() const {
    if (particles < kWedgeCount) {
        throw std::invalid_argument("filter.particles must be at least 8");
    }
    if (!(p_stay >= 0.0 && p_stay <= 1.0)) {
        throw std::invalid_argument("filter.p_stay must lie in [0, 1]");
    }
    if (!(likelihood_base > 0.0 && likelihood_base <= 1.0)) {
        throw std::invalid_argument("filter.likelihood_base must lie in (0, 1]");
    }
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw std::invalid_argument("filter.threshold must lie in (0, 1]");
    }
}

double ParticleSet::total_weight() const noexcept {
    double total = 0.0;
    for (const auto& p : particles_) {
        total += p.weight;
    }
    return total;
}

std::array<double, kWedgeCount> ParticleSet::density() const noexcept {
    std::array<double, kWedgeCount> mass{};
    for (const auto& p : particles_) {
        mass[static_cast<std::size_t>(p.wedge.value())] += p.weight;
    }
    return mass;
}

double ParticleSet::effective_sample_size() const noexcept {
    double sq = 0.0;
    for (const auto& p : particles_) {
        sq += p.weight * p.weight;
    }
    return sq > 0.0 ? 1.0 / sq : 0.0;
}

ParticleSet init_particles(int m) {
    if (m < kWedgeCount) {
        throw std::invalid_argument("particle filter needs at least 8 particles, got " + std::to_string(m));
    }
    std::vector<Particle> particles(static_cast<std::size_t>(m));
    const double w = 1.0 / static_cast<double>(m);
    for (int i = 0; i < m; ++i) {
        particles[static_cast<std::size_t>(i)] = {WedgeIndex(i), w};
    }
    return ParticleSet(std::move(particles));
}

ParticleSet predict(const ParticleSet& ps, HeadMotion motion, const FilterConfig& cfg, Rng& rng) {
    ParticleSet out = ps;
    const double p_move = 1.0 - cfg.p_stay;
    for (auto& p : out.particles()) {
        const double u = rng.uniform();
        if (u < cfg.p_stay) {
            continue;
        }
        switch (motion) {
            case HeadMotion::left: p.wedge = p.wedge + 1; break;
            case HeadMotion::right: p.wedge = p.wedge - 1; break;
            case HeadMotion::none: p.wedge = u < cfg.p_stay + 0.5 * p_move ? p.wedge + 1 : p.wedge - 1; break;
        }
    }
    return out;
}

ParticleSet update_weights(const ParticleSet& ps, const Evidence& e, const FilterConfig& cfg) {
    ParticleSet out = ps;
    std::array<double, kWedgeCount / 2 + 1> likelihood{};
    for (std::size_t d = 0; d < likelihood.size(); ++d) {
        likelihood[d] = std::pow(cfg.likelihood_base, static_cast<double>(d));
    }
    double total = 0.0;
    for (auto& p : out.particles()) {
        p.weight *= likelihood[static_cast<std::size_t>(circular_distance(p.wedge, e.focused).distance)];
        total += p.weight;
    }
    const double m = static_cast<double>(out.size());
    for (auto& p : out.particles()) {
        p.weight = total > 0.0 ? p.weight / total : 1.0 / m;
    }
    return out;
}

ParticleSet resample(const ParticleSet& ps, Rng& rng) {
    const double u0 = rng.uniform();
    const std::size_t m = ps.size();
    if (ps.effective_sample_size() >= static_cast<double>(m) / 2.0) {
        return ps;
    }
    std::vector<Particle> out;
    out.reserve(m);
    const double step = 1.0 / static_cast<double>(m);
    const auto& in = ps.particles();
    double cumulative = in[0].weight;
    std::size_t j = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double pointer = (u0 + static_cast<double>(i)) * step;
        while (pointer > cumulative && j + 1 < m) {
            ++j;
            cumulative += in[j].weight;
        }
        out.push_back({in[j].wedge, step});
    }
    return ParticleSet(std::move(out));
}

IntentEstimate estimate_intent(const ParticleSet& ps, double threshold) {
    const auto mass = ps.density();
    std::size_t best = 0;
    for (std::size_t k = 1; k < mass.size(); ++k) {
        if (mass[k] > mass[best]) {
            best = k;
        }
    }
    IntentEstimate est;
    est.density = mass[best];
    // tolerance absorbs rounding in sums of equal weights (e.g. 140 * 1/200)
    if (mass[best] >= threshold - 1e-12) {
        est.wedge = WedgeIndex(static_cast<int>(best));
    }
    return est;
}

ParticleSet shift_frame(const ParticleSet& ps, int shift) {
    ParticleSet out = ps;
    for (auto& p : out.particles()) {
        p.wedge = p.wedge + shift;
    }
    return out;
}

ControlSignal controller(const IntentEstimate& intent, const RobotPose& /*pose*/) noexcept {
    if (!intent.wedge) {
        return {};
    }
    if (intent.wedge->value() == kWedgeCount / 2) {
        return {ControlCommand::backward, WedgeIndex(0)};
    }
    return {ControlCommand::forward, *intent.wedge};
}

IntentFilter::IntentFilter(FilterConfig cfg, std::uint64_t seed)
    : cfg_(cfg), rng_(seed), set_(init_particles(cfg.particles)) {
    cfg_.validate();
    estimate_ = estimate_intent(set_, cfg_.threshold);
}

IntentEstimate IntentFilter::observe(const Evidence& e) {
    set_ = predict(set_, e.head_motion, cfg_, rng_);
    set_ = update_weights(set_, e, cfg_);
    set_ = resample(set_, rng_);
    estimate_ = estimate_intent(set_, cfg_.threshold);
    return estimate_;
}

}  // namespace ghal
