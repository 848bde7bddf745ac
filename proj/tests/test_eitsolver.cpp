#include <cmath>
#include <numbers>

#include "doctest.h"
#include "qmem/eitsolver.hpp"
#include "qmem/errors.hpp"

using namespace qmem;
using namespace qmem::eit;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGamma = 2 * kPi * 5.2e6;
constexpr double kSpinDecay = 1.0 / (2 * 8e-6);

MediumParams paper_medium() { return MediumParams::from_optical_depth(15.0, 3e-3, kGamma, kSpinDecay); }

ControlWaveform store_retrieve(double omega0, double storage = 1.1e-6) {
    ControlWaveform c;
    c.omega0 = omega0;
    c.off_start = 0.0;
    c.ramp_off = 20e-9;
    c.ramp_on = 20e-9;
    c.off_duration = storage - c.ramp_off;
    return c;
}

GridSpec window_for(const ControlWaveform& c) {
    GridSpec g;
    g.t_end = c.on_end() + 500e-9;
    g.snapshot_stride = 0;
    return g;
}

constexpr double kCalibratedOmega = 2 * kPi * 27.16711691e6;

}  // namespace

TEST_CASE("coupling follows the optical-depth normalization") {
    const auto m = paper_medium();
    CHECK(m.coupling * m.coupling == doctest::Approx(15.0 * kSpeedOfLight * kGamma / (4 * 3e-3)).epsilon(1e-14));
    CHECK(m.absorption_coefficient() == doctest::Approx(15.0 / 6e-3));
    auto bad = m;
    bad.coupling *= 1.01;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    CHECK_NOTHROW(m.lossless().validate());
    CHECK(m.lossless().coupling == m.coupling);
    CHECK_THROWS_AS(MediumParams::from_optical_depth(0.0, 3e-3, kGamma, 0.0), ValidationError);
    CHECK_THROWS_AS(MediumParams::from_optical_depth(15.0, -1.0, kGamma, 0.0), ValidationError);
    CHECK_THROWS_AS(MediumParams::from_optical_depth(15.0, 3e-3, kGamma, -1.0), ValidationError);
}

TEST_CASE("control waveform") {
    const auto c = store_retrieve(1e8);
    CHECK(control_waveform_eval(c, -50e-9) == 1e8);
    CHECK(control_waveform_eval(c, 500e-9) == 0.0);
    CHECK(control_waveform_eval(c, 10e-9) == doctest::Approx(0.5e8).epsilon(1e-12));
    CHECK(control_waveform_eval(c, c.on_start() + 10e-9) == doctest::Approx(0.5e8).epsilon(1e-12));
    CHECK(control_waveform_eval(c, c.on_end() + 1e-9) == 1e8);
    // continuous and non-negative across both ramps
    double prev = c(-1e-9), worst_jump = 0.0;
    for (double t = -1e-9; t < c.on_end() + 5e-9; t += 0.05e-9) {
        const double v = c(t);
        CHECK(v >= 0.0);
        worst_jump = std::max(worst_jump, std::abs(v - prev));
        prev = v;
    }
    CHECK(worst_jump < 1e8 * 0.05 / 20 * kPi / 2 * 1.01);
    CHECK(ControlWaveform::constant(3.0)(1.0) == 3.0);
    CHECK_FALSE(ControlWaveform::constant(3.0).switches());

    auto bad = c;
    bad.ramp_off = 0.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("pulse envelopes") {
    const auto p = PulseEnvelope::gaussian(28e-9, 5e-9);
    CHECK(std::abs(p.norm() - 1.0) < 1e-9);
    const double peak = p.amplitude(5e-9);
    CHECK(peak == doctest::Approx(p.peak_amplitude()));
    // probability density falls to 1/e at +- half the width
    CHECK(std::pow(p.amplitude(5e-9 + 14e-9) / peak, 2) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(std::pow(p.amplitude(5e-9 - 14e-9) / peak, 2) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

    const double len = 40e-9;
    const auto flat = PulseEnvelope::from_samples({0.0, len}, {1 / std::sqrt(len), 1 / std::sqrt(len)});
    CHECK(flat.amplitude(20e-9) == doctest::Approx(1 / std::sqrt(len)));
    CHECK(flat.amplitude(41e-9) == 0.0);
    CHECK_THROWS_AS(PulseEnvelope::from_samples({0.0, len}, {1.0, 1.0}), ValidationError);
    CHECK_THROWS_AS(PulseEnvelope::from_samples({0.0}, {1.0}), ValidationError);
    CHECK_THROWS_AS(PulseEnvelope::from_samples({1.0, 0.0}, {1.0, 1.0}), ValidationError);
    CHECK_THROWS_AS(PulseEnvelope::gaussian(0.0, 0.0), ValidationError);
}

TEST_CASE("mixing angle") {
    CHECK(polariton_mixing_angle(std::numeric_limits<double>::infinity(), 1e9) == 1.0);
    CHECK(polariton_mixing_angle(1e9, 1e9) == doctest::Approx(0.5));
    CHECK(polariton_mixing_angle(0.0, 1e9) == 0.0);
    CHECK_THROWS_AS(polariton_mixing_angle(1.0, 0.0), ValidationError);
}

TEST_CASE("grid refusals") {
    const auto m = paper_medium();
    const auto pulse = PulseEnvelope::gaussian(28e-9, 0.0);
    const auto c = store_retrieve(kCalibratedOmega);
    auto g = window_for(c);

    auto coarse = g;
    coarse.nz = 20;  // optical depth 0.75 per cell
    CHECK_THROWS_AS(solve_maxwell_bloch(m, c, pulse, coarse), UnstableGridError);

    auto slow = g;
    slow.dt = 5e-9;  // omega0 * dt > 0.5
    CHECK_THROWS_AS(solve_maxwell_bloch(m, c, pulse, slow), UnstableGridError);

    auto sharp = c;
    sharp.ramp_off = 0.5e-9;
    CHECK_THROWS_AS(solve_maxwell_bloch(m, sharp, pulse, g), UnstableGridError);

    auto late = g;
    late.t_start = -50e-9;
    CHECK_THROWS_AS(solve_maxwell_bloch(m, c, pulse, late), UnstableGridError);

    // refusal is a validation failure for callers that only know the base type
    CHECK_THROWS_AS(solve_maxwell_bloch(m, c, pulse, coarse), ValidationError);
}

TEST_CASE("Beer absorption with the control off") {
    const auto m = paper_medium();
    const auto pulse = PulseEnvelope::gaussian(4e-6, 0.0);
    GridSpec g;
    g.t_start = -12.5e-6;
    g.t_end = 12.5e-6;
    g.snapshot_stride = 0;
    const auto s = solve_maxwell_bloch(m, ControlWaveform::constant(0.0), pulse, g);
    CHECK(s.efficiencies.leakage / std::exp(-15.0) == doctest::Approx(1.0).epsilon(0.01));
    CHECK(s.efficiencies.retrieved == 0.0);
}

TEST_CASE("slow light at constant control") {
    const auto m = paper_medium();
    const auto pulse = PulseEnvelope::gaussian(200e-9, 0.0);
    for (double mhz : {27.0, 40.0}) {
        const double omega = 2 * kPi * mhz * 1e6;
        GridSpec g;
        g.t_start = -700e-9;
        g.t_end = 1500e-9;
        g.snapshot_stride = 0;
        const auto s = solve_maxwell_bloch(m, ControlWaveform::constant(omega), pulse, g);
        // never switched off: everything is leakage, nothing is retrieved
        CHECK(s.efficiencies.leakage > 0.99);
        CHECK(s.efficiencies.retrieved == 0.0);
        const double vg = kSpeedOfLight * polariton_mixing_angle(omega, m.coupling);
        const double expected = m.length / vg - m.length / kSpeedOfLight;  // retarded frame
        CHECK(centroid_delay(s) == doctest::Approx(expected).epsilon(0.05));
    }
}

TEST_CASE("field-to-spin ratio of the dark-state polariton") {
    // |E|^2 / |S|^2 = cos^2 / sin^2 = Omega^2 / g^2 N in the bulk.
    const auto m = paper_medium();
    const double omega = 2 * kPi * 27e6;
    GridSpec g;
    g.t_start = -700e-9;
    g.t_end = 700e-9;
    g.snapshot_stride = 50;
    const auto s = solve_maxwell_bloch(m, ControlWaveform::constant(omega), PulseEnvelope::gaussian(200e-9, 0.0), g);
    std::size_t snap = 0;
    while (s.t[snap] < 150e-9) ++snap;
    const double expected = omega * omega / (m.coupling * m.coupling);
    for (std::size_t j = 20; j < s.nz() - 20; j += 40) {
        const auto e = 0.5 * (s.field_at(snap, j) + s.field_at(snap, j + 1));
        CHECK(std::norm(e) / std::norm(s.spin_at(snap, j)) == doctest::Approx(expected).epsilon(0.05));
    }
}

TEST_CASE("lossless store and retrieve conserves excitation") {
    const auto m = paper_medium().lossless();
    const auto c = store_retrieve(kCalibratedOmega);
    auto g = window_for(c);
    g.skip_storage = false;
    const auto s = solve_maxwell_bloch(m, c, PulseEnvelope::gaussian(28e-9, 0.0), g);
    const auto& e = s.efficiencies;
    CHECK(std::abs(e.leakage + e.retrieved + e.residual - 1.0) < 1e-6);
    CHECK(std::abs(e.loss) < 1e-6);
    CHECK(s.input_energy == doctest::Approx(1.0).epsilon(1e-6));

    // the storage skip loses nothing either when nothing decays
    g.skip_storage = true;
    const auto k = solve_maxwell_bloch(m, c, PulseEnvelope::gaussian(28e-9, 0.0), g);
    CHECK(std::abs(k.skipped_loss) < 1e-12);
    CHECK(std::abs(k.efficiencies.loss) < 1e-6);
}

TEST_CASE("storage and retrieval with the calibrated control") {
    const auto m = paper_medium();
    const auto c = store_retrieve(kCalibratedOmega);
    const auto g = window_for(c);
    const auto s = solve_maxwell_bloch(m, c, PulseEnvelope::gaussian(28e-9, 0.0), g);
    const auto& e = s.efficiencies;
    CHECK(e.retrieved >= 0.12);
    CHECK(e.retrieved <= 0.22);
    CHECK(e.retrieved == doctest::Approx(0.17).epsilon(0.002 / 0.17));
    CHECK(e.leakage > 0.0);
    CHECK(e.loss >= -1e-6);
    CHECK(e.leakage + e.loss + e.retrieved + e.residual == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e.leakage + e.retrieved <= 1.0 + 1e-6);

    // leakage peaks near t = 0, retrieval after the storage time
    std::size_t leak_peak = 0, ret_peak = 0;
    for (std::size_t i = 0; i < s.output_times.size(); ++i) {
        if (s.output_times[i] < c.on_start()) {
            if (s.output_flux[i] > s.output_flux[leak_peak]) leak_peak = i;
        } else if (ret_peak == 0 || s.output_flux[i] > s.output_flux[ret_peak]) {
            ret_peak = i;
        }
    }
    CHECK(std::abs(s.output_times[leak_peak]) < 30e-9);
    CHECK(s.output_times[ret_peak] > 1.1e-6);
    CHECK(s.output_times[ret_peak] < 1.2e-6);

    // stepping through the storage interval instead of skipping it
    auto full = g;
    full.skip_storage = false;
    const auto f = solve_maxwell_bloch(m, c, PulseEnvelope::gaussian(28e-9, 0.0), full);
    CHECK(f.efficiencies.retrieved == doctest::Approx(e.retrieved).epsilon(1e-3));
}

TEST_CASE("custom partition boundaries") {
    const auto m = paper_medium();
    const auto c = store_retrieve(kCalibratedOmega);
    const auto s = solve_maxwell_bloch(m, c, PulseEnvelope::gaussian(28e-9, 0.0), window_for(c));
    const auto same = partition_efficiencies(s, c.on_start(), c.on_start());
    CHECK(same.retrieved == doctest::Approx(s.efficiencies.retrieved).epsilon(1e-14));
    const auto wide = partition_efficiencies(s, 0.0, c.on_start());
    CHECK(wide.leakage < same.leakage);
    CHECK(wide.loss > same.loss);
    CHECK_THROWS_AS(partition_efficiencies(s, -1e-3, 0.0), ValidationError);
    CHECK_THROWS_AS(partition_efficiencies(s, 0.0, 1.0), ValidationError);
    CHECK_THROWS_AS(partition_efficiencies(s, 1e-6, 0.5e-6), ValidationError);
}

TEST_CASE("grid halving barely moves the retrieval efficiency") {
    const auto m = paper_medium();
    const auto c = store_retrieve(kCalibratedOmega);
    auto g = window_for(c);
    const auto a = solve_maxwell_bloch(m, c, PulseEnvelope::gaussian(28e-9, 0.0), g);
    g.nz *= 2;
    g.dt /= 2;
    const auto b = solve_maxwell_bloch(m, c, PulseEnvelope::gaussian(28e-9, 0.0), g);
    CHECK(std::abs(b.efficiencies.retrieved / a.efficiencies.retrieved - 1.0) < 0.01);
}

TEST_CASE("adiabatic limit: retrieval follows the spin decay") {
    // Dense medium, slow light with the pulse fully inside before the switch-off,
    // and a spin decay that matters over the storage time but not during
    // the ~0.3 us write and read.
    const double spin_decay = 2e4;
    const double width = 100e-9;
    const double d0 = 1000.0;
    const auto m = MediumParams::from_optical_depth(d0, 3e-3, kGamma, spin_decay);
    const double delay = 2 * width;
    ControlWaveform c;
    c.omega0 = std::sqrt(d0 * kGamma / (4 * delay));
    c.off_start = width;
    c.ramp_off = c.ramp_on = width / 2;
    c.off_duration = 20e-6;
    GridSpec g;
    g.nz = 2500;
    g.dt = 0.5e-9;
    g.t_start = -4 * width;
    g.settle = 3 * width;
    g.t_end = c.on_end() + 6 * delay + 6 * width;
    g.snapshot_stride = 0;
    const auto s = solve_maxwell_bloch(m, c, PulseEnvelope::gaussian(width, 0.0), g);
    const double tau = c.on_start() - (c.off_end() + g.settle);
    CHECK(s.energy_at_switch_on == doctest::Approx(s.stored_energy * std::exp(-2 * spin_decay * tau)).epsilon(1e-6));
    CHECK(s.efficiencies.retrieved == doctest::Approx(s.stored_energy * std::exp(-2 * spin_decay * tau)).epsilon(0.05));
}
