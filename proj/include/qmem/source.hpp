#pragma once

#include "qmem/dualrail.hpp"

namespace qmem::source {

/// Heralded single-photon source as seen at the memory faces.
struct SourceParams {
    double p1_at_face = 0.15;  ///< single-photon probability per herald
    double w = 0.09;           ///< two-photon suppression, 1 for a coherent state
    double alpha = 0.15;       ///< source-to-entangler transmission

    void validate() const;
};

/// Photon statistics with p1 fixed and p2 chosen so that 2*p0*p2/p1^2 = w,
/// p0 = 1 - p1 - p2 (smaller root of the resulting quadratic).
dualrail::SingleModePhotonStats build_heralded_state(const SourceParams& params);

/// Two-photon suppression 2*p0*p2/p1^2. Throws DataInsufficientError if p1 = 0.
double estimate_w(const dualrail::SingleModePhotonStats& stats);

}  // namespace qmem::source
