#pragma once

#include "qmem/dualrail.hpp"

namespace qmem::memory {

enum class DecayForm { Exponential, Gaussian };

struct MemoryChannelParams {
    double eta_r0 = 0.195;        ///< retrieval efficiency extrapolated to zero storage time
    double tau_m = 8e-6;          ///< memory lifetime, s
    double tau = 1.1e-6;          ///< storage duration, s
    double rail_factor_l = 1.0;
    double rail_factor_r = 1.0;
    DecayForm decay = DecayForm::Exponential;
    /// Residual which-rail coherence kept through storage (1 = no dephasing).
    double coherence_retention = 1.0;

    void validate() const;
};

/// eta_r0 * exp(-tau/tau_m), or eta_r0 * exp(-(tau/tau_m)^2) for Gaussian decay.
double efficiency_at(const MemoryChannelParams& params);

/// Independent loss channels on both rails with eta = efficiency_at * rail factor,
/// followed by the optional coherence_retention dephasing.
dualrail::TwoModeFockState apply_memory(const dualrail::TwoModeFockState& state, const MemoryChannelParams& params);

/// eta_r0 that yields `eta` after storage time tau.
double eta_r0_for(double eta, double tau, double tau_m, DecayForm decay = DecayForm::Exponential);

}  // namespace qmem::memory
