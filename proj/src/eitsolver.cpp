#include "qmem/eitsolver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "qmem/errors.hpp"

namespace qmem::eit {

namespace {

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

struct Segment {
    double begin;
    double end;
};

}  // namespace

MediumParams MediumParams::from_optical_depth(double d0, double length, double gamma_excited, double gamma_spin) {
    MediumParams m;
    m.optical_depth = d0;
    m.length = length;
    m.gamma_excited = gamma_excited;
    m.gamma_spin = gamma_spin;
    m.coupling = std::sqrt(d0 * kSpeedOfLight * gamma_excited / (4.0 * length));
    m.validate();
    return m;
}

MediumParams MediumParams::lossless() const {
    MediumParams m = *this;
    m.gamma_excited = 0.0;
    m.gamma_spin = 0.0;
    return m;
}

double MediumParams::absorption_coefficient() const { return optical_depth / (2.0 * length); }

void MediumParams::validate() const {
    if (!(optical_depth > 0.0)) throw ValidationError("medium optical depth must be > 0, got " + num(optical_depth));
    if (!(length > 0.0)) throw ValidationError("medium length must be > 0, got " + num(length));
    if (!(gamma_excited >= 0.0)) throw ValidationError("excited-state decay must be >= 0");
    if (!(gamma_spin >= 0.0)) throw ValidationError("spin decoherence rate must be >= 0");
    if (!(coupling > 0.0)) throw ValidationError("coupling g*sqrt(N) must be > 0");
    // A lossless copy keeps the coupling of its parent, so the optical-depth
    // identity only applies while Gamma is set.
    if (gamma_excited > 0.0) {
        const double expected = optical_depth * kSpeedOfLight * gamma_excited / (4.0 * length);
        const double g2 = coupling * coupling;
        if (std::abs(g2 - expected) > 1e-12 * expected) {
            throw ValidationError("coupling inconsistent with optical depth normalization");
        }
    }
}

ControlWaveform ControlWaveform::constant(double omega0) {
    ControlWaveform c;
    c.omega0 = omega0;
    return c;
}

bool ControlWaveform::switches() const { return std::isfinite(off_start); }

double ControlWaveform::operator()(double t) const {
    if (!switches() || t <= off_start) return omega0;
    if (t < off_end()) {
        const double s = (t - off_start) / ramp_off;
        return omega0 * 0.5 * (1.0 + std::cos(std::numbers::pi * s));
    }
    if (t <= on_start()) return 0.0;
    if (t < on_end()) {
        const double s = (t - on_start()) / ramp_on;
        return omega0 * 0.5 * (1.0 - std::cos(std::numbers::pi * s));
    }
    return omega0;
}

void ControlWaveform::validate() const {
    if (!(omega0 >= 0.0) || !std::isfinite(omega0)) throw ValidationError("control omega0 must be finite and >= 0");
    if (switches()) {
        if (!(ramp_off > 0.0) || !(ramp_on > 0.0)) throw ValidationError("control ramps must be > 0");
        if (!(off_duration >= 0.0)) throw ValidationError("control off duration must be >= 0");
    }
}

double control_waveform_eval(const ControlWaveform& control, double t) { return control(t); }

PulseEnvelope::PulseEnvelope(std::function<double(double)> shape, double begin, double end, double peak)
    : shape_(std::move(shape)), begin_(begin), end_(end), peak_(peak) {}

PulseEnvelope PulseEnvelope::gaussian(double full_width_1e, double center) {
    if (!(full_width_1e > 0.0)) throw ValidationError("pulse width must be > 0");
    // density ~ exp(-(t - center)^2 / T^2), T = full_width / 2
    const double half = full_width_1e / 2.0;
    const double amp0 = std::pow(std::numbers::pi * half * half, -0.25);
    auto shape = [=](double t) {
        const double x = (t - center) / half;
        return amp0 * std::exp(-0.5 * x * x);
    };
    // density below 1e-16 of its peak outside +-6 half-widths
    return PulseEnvelope(shape, center - 6.0 * half, center + 6.0 * half, amp0);
}

PulseEnvelope PulseEnvelope::from_samples(std::vector<double> times, std::vector<double> amplitudes) {
    if (times.size() != amplitudes.size() || times.size() < 2) {
        throw ValidationError("pulse samples need >= 2 matching time/amplitude entries");
    }
    if (!std::is_sorted(times.begin(), times.end()) ||
        std::adjacent_find(times.begin(), times.end()) != times.end()) {
        throw ValidationError("pulse sample times must be strictly increasing");
    }
    const double peak = *std::max_element(amplitudes.begin(), amplitudes.end(),
                                          [](double a, double b) { return std::abs(a) < std::abs(b); });
    auto shape = [t = times, a = amplitudes](double x) {
        if (x < t.front() || x > t.back()) return 0.0;
        auto it = std::upper_bound(t.begin(), t.end(), x);
        if (it == t.end()) return a.back();
        const auto i = static_cast<std::size_t>(it - t.begin());
        const double s = (x - t[i - 1]) / (t[i] - t[i - 1]);
        return a[i - 1] + s * (a[i] - a[i - 1]);
    };
    PulseEnvelope pulse(shape, times.front(), times.back(), std::abs(peak));
    const double n = pulse.norm();
    if (std::abs(n - 1.0) > 1e-9) throw ValidationError("input pulse is not normalized (integral " + num(n) + ")");
    return pulse;
}

double PulseEnvelope::norm() const {
    // Composite Simpson; the densities handled here are smooth or piecewise
    // quadratic, so 2^16 panels are far below the 1e-9 tolerance.
    const std::size_t n = 1 << 16;
    const double h = (end_ - begin_) / static_cast<double>(n);
    double sum = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        const double a = shape_(begin_ + h * static_cast<double>(i));
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        sum += w * a * a;
    }
    return sum * h / 3.0;
}

FieldSolution solve_maxwell_bloch(const MediumParams& medium, const ControlWaveform& control,
                                  const PulseEnvelope& input, const GridSpec& grid) {
    medium.validate();
    control.validate();
    if (grid.nz == 0) throw UnstableGridError("grid needs at least one spatial cell");
    if (!(grid.dt > 0.0)) throw UnstableGridError("time step must be > 0");
    if (!(grid.t_end > grid.t_start)) throw UnstableGridError("t_end must exceed t_start");

    const double nz = static_cast<double>(grid.nz);
    const double depth_per_cell = medium.optical_depth / nz;
    if (depth_per_cell > 0.5) {
        throw UnstableGridError("optical depth per cell " + num(depth_per_cell) + " exceeds 0.5; need nz >= " +
                                num(std::ceil(2.0 * medium.optical_depth)));
    }
    if (control.omega0 * grid.dt > 0.5) {
        throw UnstableGridError("omega0 * dt = " + num(control.omega0 * grid.dt) + " exceeds 0.5");
    }
    if (control.switches() && std::min(control.ramp_off, control.ramp_on) < 4.0 * grid.dt) {
        throw UnstableGridError("control ramps must span at least 4 time steps");
    }
    if (input.support_begin() < grid.t_start || input.support_end() > grid.t_end) {
        throw UnstableGridError("input pulse support [" + num(input.support_begin()) + ", " +
                                num(input.support_end()) + "] s not inside the time window");
    }

    std::vector<Segment> segments;
    const bool skip = grid.skip_storage && control.switches() && control.off_end() + grid.settle < control.on_start() &&
                      control.on_start() < grid.t_end && control.off_end() + grid.settle > grid.t_start;
    if (skip) {
        const double pause = control.off_end() + grid.settle;
        if (input.support_end() > pause) {
            throw UnstableGridError("input pulse still arriving when storage skipping begins");
        }
        segments.push_back({grid.t_start, pause});
        segments.push_back({control.on_start(), grid.t_end});
    } else {
        segments.push_back({grid.t_start, grid.t_end});
    }

    const double dz = medium.length / nz;
    const double g = medium.coupling;
    const double kappa = g / kSpeedOfLight;
    const double half_gamma = 0.5 * medium.gamma_excited;
    const double gamma_s = medium.gamma_spin;
    const double self = g * kappa * dz / 2.0;  // local field reaction of a cell on its own polarization

    FieldSolution sol;
    sol.z.resize(grid.nz);
    sol.z_faces.resize(grid.nz + 1);
    for (std::size_t j = 0; j <= grid.nz; ++j) sol.z_faces[j] = dz * static_cast<double>(j);
    for (std::size_t j = 0; j < grid.nz; ++j) sol.z[j] = dz * (static_cast<double>(j) + 0.5);

    std::vector<cplx> pol(grid.nz), spin(grid.nz), pbar(grid.nz), sbar(grid.nz);

    auto medium_energy = [&] {
        double e = 0.0;
        for (std::size_t j = 0; j < grid.nz; ++j) e += std::norm(pol[j]) + std::norm(spin[j]);
        return e * dz / kSpeedOfLight;
    };

    std::size_t step_count = 0;
    const double t_stored = control.switches() ? control.off_end() + grid.settle : grid.t_end + 1.0;
    const double t_switch_on = control.switches() ? control.on_start() : grid.t_end + 1.0;
    bool have_stored = false;
    bool have_switch_on = false;
    auto record_energies = [&](double t) {
        if (!have_stored && t >= t_stored - 1e-15) {
            sol.stored_energy = medium_energy();
            have_stored = true;
        }
        if (!have_switch_on && t >= t_switch_on - 1e-15) {
            sol.energy_at_switch_on = medium_energy();
            have_switch_on = true;
        }
    };
    auto snapshot = [&](double t) {
        if (grid.snapshot_stride == 0 || step_count % grid.snapshot_stride != 0) return;
        sol.t.push_back(t);
        cplx e = input.amplitude(t);
        sol.field.push_back(e);
        for (std::size_t j = 0; j < grid.nz; ++j) {
            e += cplx{0.0, kappa * dz} * pol[j];
            sol.field.push_back(e);
        }
        sol.polarization.insert(sol.polarization.end(), pol.begin(), pol.end());
        sol.spin.insert(sol.spin.end(), spin.begin(), spin.end());
    };

    for (std::size_t si = 0; si < segments.size(); ++si) {
        const auto [begin, end] = segments[si];
        if (si > 0) {
            // Control is off: S evolves independently of P and E.
            const double gap = begin - segments[si - 1].end;
            const double before = medium_energy();
            const double spin_decay = std::exp(-gamma_s * gap);
            const double pol_decay = std::exp(-half_gamma * gap);
            for (std::size_t j = 0; j < grid.nz; ++j) {
                spin[j] *= spin_decay;
                pol[j] *= pol_decay;
            }
            sol.skipped_loss += before - medium_energy();
        }
        record_energies(begin);
        const auto steps = static_cast<std::size_t>(std::ceil((end - begin) / grid.dt - 1e-9));
        const double dt = (end - begin) / static_cast<double>(steps);
        const double h = dt / 2.0;
        if (si == 0) snapshot(begin);

        for (std::size_t n = 0; n < steps; ++n) {
            const double t_mid = begin + (static_cast<double>(n) + 0.5) * dt;
            const double omega = control(t_mid);
            const double e_in = input.amplitude(t_mid);

            const cplx a11 = 1.0 + h * (half_gamma + self);
            const cplx a12{0.0, -h * omega};
            const cplx a22 = 1.0 + h * gamma_s;
            const cplx det = a11 * a22 - a12 * a12;

            cplx e = e_in;
            for (std::size_t j = 0; j < grid.nz; ++j) {
                const cplx r1 = pol[j] + cplx{0.0, h * g} * e;
                const cplx r2 = spin[j];
                const cplx p = (r1 * a22 - a12 * r2) / det;
                const cplx s = (a11 * r2 - a12 * r1) / det;
                pbar[j] = p;
                sbar[j] = s;
                e += cplx{0.0, kappa * dz} * p;
            }
            for (std::size_t j = 0; j < grid.nz; ++j) {
                pol[j] = 2.0 * pbar[j] - pol[j];
                spin[j] = 2.0 * sbar[j] - spin[j];
            }

            sol.output_times.push_back(t_mid);
            sol.output_flux.push_back(std::norm(e));
            sol.input_flux.push_back(e_in * e_in);
            sol.step_widths.push_back(dt);
            sol.input_energy += dt * e_in * e_in;

            ++step_count;
            record_energies(begin + static_cast<double>(n + 1) * dt);
            snapshot(begin + static_cast<double>(n + 1) * dt);
        }
    }
    sol.final_medium_energy = medium_energy();

    const double boundary = control.switches() ? std::clamp(control.on_start(), grid.t_start, grid.t_end) : grid.t_end;
    sol.efficiencies = partition_efficiencies(sol, boundary, boundary);
    return sol;
}

EfficiencyPartition partition_efficiencies(const FieldSolution& sol, double t_store, double t_retrieve) {
    if (sol.output_times.empty()) throw ValidationError("empty field solution");
    const double lo = sol.output_times.front() - sol.step_widths.front();
    const double hi = sol.output_times.back() + sol.step_widths.back();
    if (t_store < lo || t_store > hi || t_retrieve < lo || t_retrieve > hi) {
        throw ValidationError("partition times outside the simulated window");
    }
    if (t_retrieve < t_store) throw ValidationError("retrieval boundary precedes storage boundary");
    if (!(sol.input_energy > 0.0)) throw ValidationError("solution carries no input energy");

    EfficiencyPartition part;
    for (std::size_t i = 0; i < sol.output_times.size(); ++i) {
        const double e = sol.step_widths[i] * sol.output_flux[i];
        if (sol.output_times[i] < t_store) part.leakage += e;
        if (sol.output_times[i] >= t_retrieve) part.retrieved += e;
    }
    part.leakage /= sol.input_energy;
    part.retrieved /= sol.input_energy;
    part.residual = sol.final_medium_energy / sol.input_energy;
    part.loss = 1.0 - part.leakage - part.retrieved - part.residual;
    return part;
}

double polariton_mixing_angle(double omega, double coupling) {
    if (!(coupling > 0.0)) throw ValidationError("coupling must be > 0");
    if (std::isinf(omega)) return 1.0;
    const double o2 = omega * omega;
    return o2 / (o2 + coupling * coupling);
}

double centroid_delay(const FieldSolution& sol) {
    double in_w = 0.0, in_t = 0.0, out_w = 0.0, out_t = 0.0;
    for (std::size_t i = 0; i < sol.output_times.size(); ++i) {
        const double dt = sol.step_widths[i];
        in_w += dt * sol.input_flux[i];
        in_t += dt * sol.input_flux[i] * sol.output_times[i];
        out_w += dt * sol.output_flux[i];
        out_t += dt * sol.output_flux[i] * sol.output_times[i];
    }
    if (!(out_w > 0.0) || !(in_w > 0.0)) throw ValidationError("no transmitted flux for a centroid");
    return out_t / out_w - in_t / in_w;
}

}  // namespace qmem::eit
