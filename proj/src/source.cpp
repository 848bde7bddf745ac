#include "qmem/source.hpp"

#include <cmath>
#include <string>

#include "qmem/errors.hpp"

namespace qmem::source {

void SourceParams::validate() const {
    if (!(p1_at_face >= 0.0 && p1_at_face <= 1.0)) {
        throw ValidationError("source.p1_at_face = " + std::to_string(p1_at_face) + " outside [0, 1]");
    }
    if (!(w >= 0.0) || !std::isfinite(w)) {
        throw ValidationError("source.w = " + std::to_string(w) + " must be finite and >= 0");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw ValidationError("source.alpha = " + std::to_string(alpha) + " outside [0, 1]");
    }
}

dualrail::SingleModePhotonStats build_heralded_state(const SourceParams& params) {
    params.validate();
    const double p1 = params.p1_at_face;
    // 2 p2^2 - 2 (1 - p1) p2 + w p1^2 = 0
    const double b = 1.0 - p1;
    const double disc = b * b - 2.0 * params.w * p1 * p1;
    if (disc < 0.0) {
        throw ValidationError("no valid two-photon probability for p1 = " + std::to_string(p1) +
                              ", w = " + std::to_string(params.w));
    }
    // Stable form of (b - sqrt(disc)) / 2.
    const double p2 = b > 0.0 ? params.w * p1 * p1 / (b + std::sqrt(disc)) : 0.0;
    const double p0 = 1.0 - p1 - p2;
    if (p0 < 0.0 || p2 < 0.0) {
        throw ValidationError("source parameters imply negative photon-number probability");
    }
    return {p0, p1, p2};
}

double estimate_w(const dualrail::SingleModePhotonStats& stats) {
    if (stats.p1() <= 0.0) throw DataInsufficientError("two-photon suppression undefined for p1 = 0");
    return 2.0 * stats.p0() * stats.p2() / (stats.p1() * stats.p1());
}

}  // namespace qmem::source
