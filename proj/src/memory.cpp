#include "qmem/memory.hpp"

#include <cmath>
#include <string>

#include "qmem/errors.hpp"

namespace qmem::memory {

namespace {

double decay_factor(double tau, double tau_m, DecayForm decay) {
    const double x = tau / tau_m;
    return decay == DecayForm::Exponential ? std::exp(-x) : std::exp(-x * x);
}

}  // namespace

void MemoryChannelParams::validate() const {
    if (!(eta_r0 >= 0.0 && eta_r0 <= 1.0)) throw ValidationError("memory.eta_r0 outside [0, 1]");
    if (!(tau_m > 0.0)) throw ValidationError("memory.tau_m must be > 0");
    if (!(tau >= 0.0)) throw ValidationError("memory.tau must be >= 0");
    if (!(coherence_retention >= 0.0 && coherence_retention <= 1.0)) {
        throw ValidationError("memory.coherence_retention outside [0, 1]");
    }
    const double eta = eta_r0 * decay_factor(tau, tau_m, decay);
    for (double f : {rail_factor_l, rail_factor_r}) {
        if (!(f >= 0.0) || !(eta * f <= 1.0)) {
            throw ValidationError("memory rail factor " + std::to_string(f) + " gives transmission outside [0, 1]");
        }
    }
}

double efficiency_at(const MemoryChannelParams& params) {
    params.validate();
    return params.eta_r0 * decay_factor(params.tau, params.tau_m, params.decay);
}

double eta_r0_for(double eta, double tau, double tau_m, DecayForm decay) {
    return eta / decay_factor(tau, tau_m, decay);
}

dualrail::TwoModeFockState apply_memory(const dualrail::TwoModeFockState& state, const MemoryChannelParams& params) {
    params.validate();
    const double eta = efficiency_at(params);
    auto out = dualrail::apply_loss(state, eta * params.rail_factor_l, dualrail::Rail::L);
    out = dualrail::apply_loss(out, eta * params.rail_factor_r, dualrail::Rail::R);
    if (params.coherence_retention < 1.0) out = dualrail::apply_coherence_factor(out, params.coherence_retention);
    return out;
}

}  // namespace qmem::memory
