#pragma once

// Propagation, storage and retrieval of a weak signal pulse in a Lambda-type
// EIT medium, in the frame co-moving with the signal at c (t is retarded time).
//
//   dE/dz = i kappa P
//   dP/dt = -(Gamma/2) P + i g E + i Omega(t) S
//   dS/dt = -gamma_s S + i Omega(t) P
//
// with g = g*sqrt(N) and kappa = g/c. E is normalized so that |E|^2 is the
// photon flux (the input pulse carries one excitation); the excitation held
// by the medium is (1/c) * integral(|P|^2 + |S|^2) dz.
//
// Optical-depth normalization: with the control off, a resonant, spectrally
// narrow pulse is transmitted with intensity fraction exp(-d0). This fixes
// g^2 = d0 * c * Gamma / (4 L).

#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace qmem::eit {

using cplx = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0;

struct MediumParams {
    double optical_depth = 15.0;
    double length = 3e-3;                 ///< m
    double gamma_excited = 0.0;           ///< Gamma, rad/s (population decay of the excited state)
    double gamma_spin = 0.0;              ///< gamma_s, rad/s (amplitude decay of the spin coherence)
    double coupling = 0.0;                ///< g*sqrt(N), rad/s

    /// Derives the coupling from d0, L and Gamma.
    static MediumParams from_optical_depth(double d0, double length, double gamma_excited, double gamma_spin);

    /// Same coupling with both decay channels switched off.
    MediumParams lossless() const;

    /// Amplitude attenuation rate per unit length with the control off, d0 / (2L).
    double absorption_coefficient() const;

    void validate() const;
};

/// Raised-cosine switch-off, flat zero, raised-cosine switch-on.
struct ControlWaveform {
    double omega0 = 0.0;  ///< rad/s
    double off_start = std::numeric_limits<double>::infinity();
    double ramp_off = 20e-9;
    double off_duration = 0.0;
    double ramp_on = 20e-9;

    static ControlWaveform constant(double omega0);

    double off_end() const { return off_start + ramp_off; }
    double on_start() const { return off_end() + off_duration; }
    double on_end() const { return on_start() + ramp_on; }
    bool switches() const;

    double operator()(double t) const;

    void validate() const;
};

/// Omega_c(t).
double control_waveform_eval(const ControlWaveform& control, double t);

/// Input amplitude e_in(t) with integral |e_in|^2 dt = 1.
class PulseEnvelope {
public:
    /// Gaussian whose probability density falls to 1/e at center +- width/2.
    static PulseEnvelope gaussian(double full_width_1e, double center);

    /// Linear interpolation of sampled amplitudes, zero outside the samples.
    /// Throws ValidationError unless the samples are normalized within 1e-9.
    static PulseEnvelope from_samples(std::vector<double> times, std::vector<double> amplitudes);

    double amplitude(double t) const { return shape_(t); }
    double support_begin() const { return begin_; }
    double support_end() const { return end_; }
    double peak_amplitude() const { return peak_; }

    /// Numerical integral of |e|^2 over the support.
    double norm() const;

private:
    PulseEnvelope(std::function<double(double)> shape, double begin, double end, double peak);

    std::function<double(double)> shape_;
    double begin_;
    double end_;
    double peak_;
};

/// Solver resolution. Storage intervals may be skipped: after the switch-off
/// ramp plus `settle`, time-stepping pauses until switch-on and the spin
/// coherence is advanced with its exact decay factor.
struct GridSpec {
    std::size_t nz = 200;
    double dt = 0.2e-9;
    double t_start = -150e-9;
    double t_end = 400e-9;
    double settle = 300e-9;
    bool skip_storage = true;
    std::size_t snapshot_stride = 5;  ///< store fields every n-th step; 0 disables snapshots
};

/// Efficiency partition of a solve, relative to the input excitation.
struct EfficiencyPartition {
    double leakage = 0.0;
    double loss = 0.0;
    double retrieved = 0.0;
    double residual = 0.0;  ///< excitation still in the medium at the end
};

struct FieldSolution {
    std::vector<double> z;        ///< cell centers, nz
    std::vector<double> z_faces;  ///< nz + 1
    std::vector<double> t;        ///< snapshot times

    /// Row-major [snapshot][face] and [snapshot][cell].
    std::vector<cplx> field;
    std::vector<cplx> polarization;
    std::vector<cplx> spin;

    /// Output flux |E(L,t)|^2 at step midpoints, with step widths.
    std::vector<double> output_times;
    std::vector<double> output_flux;
    std::vector<double> input_flux;
    std::vector<double> step_widths;

    double input_energy = 0.0;
    double final_medium_energy = 0.0;
    /// Medium excitation `settle` after the switch-off ramp, and just before switch-on.
    double stored_energy = 0.0;
    double energy_at_switch_on = 0.0;
    double skipped_loss = 0.0;

    /// Default partition: storage and retrieval boundaries at control switch-on.
    EfficiencyPartition efficiencies;

    std::size_t nz() const { return z.size(); }
    cplx field_at(std::size_t snap, std::size_t face) const { return field[snap * (nz() + 1) + face]; }
    cplx polarization_at(std::size_t snap, std::size_t cell) const { return polarization[snap * nz() + cell]; }
    cplx spin_at(std::size_t snap, std::size_t cell) const { return spin[snap * nz() + cell]; }
};

/// Crank-Nicolson (implicit midpoint) in time; in z, P and S live on cell
/// centers and E on faces, integrated cell by cell in one forward sweep per
/// step. The scheme conserves the excitation number exactly when
/// Gamma = gamma_s = 0, so input = output + medium to round-off.
///
/// Accuracy bounds enforced before solving (UnstableGridError otherwise):
/// optical depth per cell <= 0.5, omega0 * dt <= 0.5, each control ramp
/// spans >= 4 steps, the input pulse fits inside [t_start, t_end].
FieldSolution solve_maxwell_bloch(const MediumParams& medium, const ControlWaveform& control,
                                  const PulseEnvelope& input, const GridSpec& grid);

/// Leakage: output before t_store. Retrieved: output after t_retrieve.
/// Loss: everything else not left in the medium.
EfficiencyPartition partition_efficiencies(const FieldSolution& sol, double t_store, double t_retrieve);

/// cos^2(theta) = Omega^2 / (Omega^2 + g^2 N), also v_g / c.
double polariton_mixing_angle(double omega, double coupling);

/// Difference of the output and input flux centroids.
double centroid_delay(const FieldSolution& sol);

}  // namespace qmem::eit
