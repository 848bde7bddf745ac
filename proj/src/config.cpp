#include "qmem/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "qmem/errors.hpp"

namespace qmem {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Calls f(section, key, member) for every configuration entry, in file order.
template <class Cfg, class F>
void visit_fields(Cfg& c, F&& f) {
    f("scenario", "seed", c.scenario.seed);
    f("scenario", "fidelity", c.scenario.fidelity);
    f("scenario", "output_dir", c.scenario.output_dir);
    f("scenario", "heralds_in", c.scenario.heralds_in);
    f("scenario", "heralds_out", c.scenario.heralds_out);
    f("scenario", "stats_heralds_in", c.scenario.stats_heralds_in);
    f("scenario", "stats_heralds_out", c.scenario.stats_heralds_out);
    f("scenario", "fringe_points", c.scenario.fringe_points);
    f("scenario", "bootstrap_resamples", c.scenario.bootstrap_resamples);
    f("scenario", "trial_period_ns", c.scenario.trial_period_ns);
    f("scenario", "duty_cycle_ms", c.scenario.duty_cycle_ms);

    f("source", "p1_at_face", c.source.p1_at_face);
    f("source", "w", c.source.w);
    f("source", "alpha", c.source.alpha);
    f("source", "visibility", c.source.visibility);

    f("medium", "optical_depth", c.medium.optical_depth);
    f("medium", "length_mm", c.medium.length_mm);
    f("medium", "gamma_excited_2pi_mhz", c.medium.gamma_excited_2pi_mhz);
    f("medium", "spin_decay_per_us", c.medium.spin_decay_per_us);

    f("control", "omega0_2pi_mhz", c.control.omega0_2pi_mhz);
    f("control", "switch_off_start_ns", c.control.switch_off_start_ns);
    f("control", "ramp_off_ns", c.control.ramp_off_ns);
    f("control", "ramp_on_ns", c.control.ramp_on_ns);

    f("pulse", "width_1e_ns", c.pulse.width_1e_ns);
    f("pulse", "center_ns", c.pulse.center_ns);

    f("grid", "nz", c.grid.nz);
    f("grid", "dt_ns", c.grid.dt_ns);
    f("grid", "t_start_ns", c.grid.t_start_ns);
    f("grid", "retrieve_window_ns", c.grid.retrieve_window_ns);
    f("grid", "settle_ns", c.grid.settle_ns);
    f("grid", "skip_storage", c.grid.skip_storage);

    f("memory", "derive_from_solver", c.memory.derive_from_solver);
    f("memory", "eta_r0", c.memory.eta_r0);
    f("memory", "tau_m_us", c.memory.tau_m_us);
    f("memory", "tau_storage_us", c.memory.tau_storage_us);
    f("memory", "decay_form", c.memory.decay_form);
    f("memory", "rail_factor_l", c.memory.rail_factor_l);
    f("memory", "rail_factor_r", c.memory.rail_factor_r);
    f("memory", "coherence_retention", c.memory.coherence_retention);

    f("detectors", "efficiency_d1", c.detectors.efficiency_d1);
    f("detectors", "efficiency_d2", c.detectors.efficiency_d2);
    f("detectors", "dark_count_d1", c.detectors.dark_count_d1);
    f("detectors", "dark_count_d2", c.detectors.dark_count_d2);
    f("detectors", "path_efficiency_in_l", c.detectors.path_efficiency_in_l);
    f("detectors", "path_efficiency_in_r", c.detectors.path_efficiency_in_r);
    f("detectors", "path_efficiency_out_l", c.detectors.path_efficiency_out_l);
    f("detectors", "path_efficiency_out_r", c.detectors.path_efficiency_out_r);
}

std::string format(double x) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, end);
}
std::string format(std::uint64_t x) { return std::to_string(x); }
std::string format(bool x) { return x ? "true" : "false"; }
std::string format(const std::string& x) { return x; }
std::string format(Fidelity f) { return f == Fidelity::Analytic ? "analytic" : "sampled"; }
std::string format(memory::DecayForm d) { return d == memory::DecayForm::Exponential ? "exponential" : "gaussian"; }

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
    throw ValidationError("config " + key + " = '" + value + "': expected " + expected);
}

void parse_into(const std::string& key, const std::string& v, double& out) {
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) bad_value(key, v, "a finite number");
}
void parse_into(const std::string& key, const std::string& v, std::uint64_t& out) {
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
}
void parse_into(const std::string& key, const std::string& v, bool& out) {
    if (v == "true") out = true;
    else if (v == "false") out = false;
    else bad_value(key, v, "true or false");
}
void parse_into(const std::string&, const std::string& v, std::string& out) { out = v; }
void parse_into(const std::string& key, const std::string& v, Fidelity& out) {
    if (v == "analytic") out = Fidelity::Analytic;
    else if (v == "sampled") out = Fidelity::Sampled;
    else bad_value(key, v, "analytic or sampled");
}
void parse_into(const std::string& key, const std::string& v, memory::DecayForm& out) {
    if (v == "exponential") out = memory::DecayForm::Exponential;
    else if (v == "gaussian") out = memory::DecayForm::Gaussian;
    else bad_value(key, v, "exponential or gaussian");
}

void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ValidationError("config " + key + ": " + what);
}

}  // namespace

void ExperimentConfig::validate() const {
    require(scenario.fringe_points >= 4, "scenario.fringe_points", "must be >= 4");
    require(scenario.bootstrap_resamples >= 2, "scenario.bootstrap_resamples", "must be >= 2");
    require(source.visibility >= 0.0 && source.visibility <= 1.0, "source.visibility", "must lie in [0, 1]");
    require(medium.optical_depth > 0.0, "medium.optical_depth", "must be > 0");
    require(medium.length_mm > 0.0, "medium.length_mm", "must be > 0");
    require(medium.gamma_excited_2pi_mhz > 0.0, "medium.gamma_excited_2pi_mhz", "must be > 0");
    require(medium.spin_decay_per_us >= 0.0, "medium.spin_decay_per_us", "must be >= 0");
    require(control.omega0_2pi_mhz > 0.0, "control.omega0_2pi_mhz", "must be > 0");
    require(control.ramp_off_ns > 0.0, "control.ramp_off_ns", "must be > 0");
    require(control.ramp_on_ns > 0.0, "control.ramp_on_ns", "must be > 0");
    require(pulse.width_1e_ns > 0.0, "pulse.width_1e_ns", "must be > 0");
    require(grid.nz > 0, "grid.nz", "must be > 0");
    require(grid.dt_ns > 0.0, "grid.dt_ns", "must be > 0");
    require(grid.retrieve_window_ns > 0.0, "grid.retrieve_window_ns", "must be > 0");
    require(grid.settle_ns >= 0.0, "grid.settle_ns", "must be >= 0");
    require(memory.tau_storage_us * 1e3 >= control.ramp_off_ns, "memory.tau_storage_us",
            "must be at least the switch-off ramp");
    require(memory.tau_m_us > 0.0, "memory.tau_m_us", "must be > 0");
    require(memory.rail_factor_l >= 0.0, "memory.rail_factor_l", "must be >= 0");
    require(memory.rail_factor_r >= 0.0, "memory.rail_factor_r", "must be >= 0");
    for (auto [key, v] : {std::pair{"detectors.path_efficiency_in_l", detectors.path_efficiency_in_l},
                          std::pair{"detectors.path_efficiency_in_r", detectors.path_efficiency_in_r},
                          std::pair{"detectors.path_efficiency_out_l", detectors.path_efficiency_out_l},
                          std::pair{"detectors.path_efficiency_out_r", detectors.path_efficiency_out_r},
                          std::pair{"detectors.efficiency_d1", detectors.efficiency_d1},
                          std::pair{"detectors.efficiency_d2", detectors.efficiency_d2},
                          std::pair{"detectors.dark_count_d1", detectors.dark_count_d1},
                          std::pair{"detectors.dark_count_d2", detectors.dark_count_d2},
                          std::pair{"memory.eta_r0", memory.eta_r0},
                          std::pair{"memory.coherence_retention", memory.coherence_retention}}) {
        require(v >= 0.0 && v <= 1.0, key, "must lie in [0, 1]");
    }
    source_params().validate();
    memory_params().validate();
    detector_params().validate();
}

source::SourceParams ExperimentConfig::source_params() const {
    return {.p1_at_face = source.p1_at_face, .w = source.w, .alpha = source.alpha};
}

eit::MediumParams ExperimentConfig::medium_params() const {
    return eit::MediumParams::from_optical_depth(medium.optical_depth, medium.length_mm * 1e-3,
                                                 kTwoPi * medium.gamma_excited_2pi_mhz * 1e6,
                                                 medium.spin_decay_per_us * 1e6);
}

eit::ControlWaveform ExperimentConfig::control_waveform() const {
    eit::ControlWaveform c;
    c.omega0 = kTwoPi * control.omega0_2pi_mhz * 1e6;
    c.off_start = control.switch_off_start_ns * 1e-9;
    c.ramp_off = control.ramp_off_ns * 1e-9;
    // storage time runs from the start of the switch-off to the start of the switch-on
    c.off_duration = memory.tau_storage_us * 1e-6 - c.ramp_off;
    c.ramp_on = control.ramp_on_ns * 1e-9;
    return c;
}

eit::PulseEnvelope ExperimentConfig::pulse_envelope() const {
    return eit::PulseEnvelope::gaussian(pulse.width_1e_ns * 1e-9, pulse.center_ns * 1e-9);
}

eit::GridSpec ExperimentConfig::grid_spec() const {
    eit::GridSpec g;
    g.nz = grid.nz;
    g.dt = grid.dt_ns * 1e-9;
    g.t_start = grid.t_start_ns * 1e-9;
    g.t_end = control_waveform().on_end() + grid.retrieve_window_ns * 1e-9;
    g.settle = grid.settle_ns * 1e-9;
    g.skip_storage = grid.skip_storage;
    g.snapshot_stride = 0;
    return g;
}

memory::MemoryChannelParams ExperimentConfig::memory_params() const {
    memory::MemoryChannelParams m;
    m.eta_r0 = memory.eta_r0;
    m.tau_m = memory.tau_m_us * 1e-6;
    m.tau = memory.tau_storage_us * 1e-6;
    m.rail_factor_l = memory.rail_factor_l;
    m.rail_factor_r = memory.rail_factor_r;
    m.decay = memory.decay_form;
    m.coherence_retention = memory.coherence_retention;
    return m;
}

counting::DetectorParams ExperimentConfig::detector_params() const {
    counting::DetectorParams d;
    d.efficiency = {detectors.efficiency_d1, detectors.efficiency_d2};
    d.dark_count = {detectors.dark_count_d1, detectors.dark_count_d2};
    return d;
}

ExperimentConfig parse_config(const std::string& text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ValidationError(std::string("config syntax: ") + e.what());
    }

    ExperimentConfig cfg;
    std::set<std::string> known;
    visit_fields(cfg, [&](const std::string& section, const std::string& key, auto& member) {
        const std::string path = section + "." + key;
        known.insert(path);
        if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.'))) parse_into(path, *v, member);
    });
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ValidationError("config entry '" + section + "' outside any section");
        for (const auto& [key, value] : body) {
            if (!known.contains(section + "." + key)) throw ValidationError("config: unknown key " + section + "." + key);
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    std::string current;
    visit_fields(cfg, [&](const std::string& section, const std::string& key, const auto& member) {
        if (section != current) {
            if (!current.empty()) out << '\n';
            out << '[' << section << "]\n";
            current = section;
        }
        out << key << " = " << format(member) << '\n';
    });
    return out.str();
}

}  // namespace qmem
