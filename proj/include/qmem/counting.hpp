#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "qmem/dualrail.hpp"

namespace qmem::counting {

/// Non-number-resolving detectors. Detector 1 sits behind rail L when the
/// verification waveplate is at 0, detector 2 behind rail R.
struct DetectorParams {
    std::array<double, 2> efficiency{1.0, 1.0};
    std::array<double, 2> dark_count{0.0, 0.0};  ///< probability per gate

    void validate() const;
};

inline constexpr double kInterferenceAngle = 0.39269908169872414;  // 22.5 deg

struct MeasurementSetting {
    double waveplate_angle = 0.0;  ///< radians
    double phase = 0.0;            ///< relative phase on rail L, radians
};

/// Click-pattern order: none, D1 only, D2 only, both.
enum Pattern : std::size_t { kNone = 0, kD1 = 1, kD2 = 2, kBoth = 3 };

using ClickProbabilities = std::array<double, 4>;

struct CountsTable {
    std::uint64_t n_trials = 0;
    std::array<std::uint64_t, 4> counts{};

    std::uint64_t operator[](Pattern p) const { return counts[p]; }
};

ClickProbabilities click_probabilities(const dualrail::TwoModeFockState& state, const MeasurementSetting& setting,
                                       const DetectorParams& det);

/// Deterministic 64-bit stream seed for sub-task `stream` of a run seeded with `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Multinomial draw of n trials. Identical for identical (probabilities, n, seed).
CountsTable sample_trials(const ClickProbabilities& probabilities, std::uint64_t n, std::uint64_t seed);

struct FringePoint {
    double phase = 0.0;
    CountsTable counts;
};

/// n evenly spaced phases over [0, 2 pi).
std::vector<double> fringe_phases(std::size_t n);

/// Click statistics at the interference setting for each phase; point k uses
/// stream derive_seed(seed, k).
std::vector<FringePoint> fringe_scan(const dualrail::TwoModeFockState& state, std::span<const double> phases,
                                     const DetectorParams& det, std::uint64_t n_per_point, std::uint64_t seed);

}  // namespace qmem::counting
