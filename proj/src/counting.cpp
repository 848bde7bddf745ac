#include "qmem/counting.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "qmem/errors.hpp"

namespace qmem::counting {

using dualrail::Rail;

void DetectorParams::validate() const {
    for (double p : efficiency) {
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("detector efficiency " + std::to_string(p) + " outside [0, 1]");
    }
    for (double p : dark_count) {
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("dark-count probability " + std::to_string(p) + " outside [0, 1]");
    }
}

ClickProbabilities click_probabilities(const dualrail::TwoModeFockState& state, const MeasurementSetting& setting,
                                       const DetectorParams& det) {
    det.validate();
    auto s = dualrail::apply_phase(state, setting.phase, Rail::L);
    s = dualrail::apply_waveplate(s, setting.waveplate_angle);
    s = dualrail::apply_loss(s, det.efficiency[0], Rail::L);
    s = dualrail::apply_loss(s, det.efficiency[1], Rail::R);

    // Probability that photons reach (D1?, D2?).
    std::array<std::array<double, 2>, 2> hit{};
    for (std::size_t i = 0; i < dualrail::kDim; ++i) {
        const auto [l, r] = dualrail::kBasis[i];
        hit[l > 0][r > 0] += std::max(s.matrix()(i, i).real(), 0.0);
    }

    ClickProbabilities out{};
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            const double c1 = a ? 1.0 : det.dark_count[0];
            const double c2 = b ? 1.0 : det.dark_count[1];
            out[kNone] += hit[a][b] * (1.0 - c1) * (1.0 - c2);
            out[kD1] += hit[a][b] * c1 * (1.0 - c2);
            out[kD2] += hit[a][b] * (1.0 - c1) * c2;
            out[kBoth] += hit[a][b] * c1 * c2;
        }
    }
    return out;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    // splitmix64 finalizer over a combination of both words
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

CountsTable sample_trials(const ClickProbabilities& probabilities, std::uint64_t n, std::uint64_t seed) {
    double sum = 0.0;
    for (double p : probabilities) {
        if (!(p >= -1e-15 && p <= 1.0 + 1e-15)) throw ValidationError("click probability outside [0, 1]");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("click probabilities sum to " + std::to_string(sum));

    std::mt19937_64 rng(seed);
    CountsTable table;
    table.n_trials = n;
    std::uint64_t remaining = n;
    double mass = 1.0;
    for (std::size_t k = 0; k + 1 < probabilities.size(); ++k) {
        const double p = std::clamp(probabilities[k], 0.0, 1.0);
        const double q = mass > 0.0 ? std::clamp(p / mass, 0.0, 1.0) : 0.0;
        std::uint64_t draw = 0;
        if (remaining > 0 && q > 0.0) {
            std::binomial_distribution<std::uint64_t> dist(remaining, q);
            draw = dist(rng);
        }
        table.counts[k] = draw;
        remaining -= draw;
        mass -= p;
    }
    table.counts.back() = remaining;
    return table;
}

std::vector<double> fringe_phases(std::size_t n) {
    std::vector<double> phases(n);
    for (std::size_t k = 0; k < n; ++k) phases[k] = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    return phases;
}

std::vector<FringePoint> fringe_scan(const dualrail::TwoModeFockState& state, std::span<const double> phases,
                                     const DetectorParams& det, std::uint64_t n_per_point, std::uint64_t seed) {
    std::vector<FringePoint> out;
    out.reserve(phases.size());
    for (std::size_t k = 0; k < phases.size(); ++k) {
        const auto probs = click_probabilities(state, {.waveplate_angle = kInterferenceAngle, .phase = phases[k]}, det);
        out.push_back({phases[k], sample_trials(probs, n_per_point, derive_seed(seed, k))});
    }
    return out;
}

}  // namespace qmem::counting
