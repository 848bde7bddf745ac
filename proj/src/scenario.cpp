#include "qmem/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "qmem/errors.hpp"
#include "qmem/memory.hpp"
#include "qmem/source.hpp"

namespace qmem {

namespace {

using counting::Pattern;
using dualrail::Rail;

// Stream ids under the master seed.
constexpr std::uint64_t kStreamStageIn = 1;
constexpr std::uint64_t kStreamStageOut = 2;
constexpr std::uint64_t kStreamBootstrap = 100;

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

class ReportWriter {
public:
    void section(const std::string& name) {
        if (!empty_) out_ << '\n';
        out_ << '[' << name << "]\n";
        empty_ = false;
    }
    void put(const std::string& key, double value) { out_ << key << " = " << num(value) << '\n'; }
    void put(const std::string& key, const std::string& value) { out_ << key << " = " << value << '\n'; }
    std::string str() const { return out_.str(); }

private:
    std::ostringstream out_;
    bool empty_ = true;
};

void write_file(const std::filesystem::path& path, const std::string& text, std::vector<std::filesystem::path>& files) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    files.push_back(path);
}

std::array<double, 2> stage_path_efficiency(const ExperimentConfig& cfg, Stage stage) {
    const auto& d = cfg.detectors;
    return stage == Stage::In ? std::array{d.path_efficiency_in_l, d.path_efficiency_in_r}
                              : std::array{d.path_efficiency_out_l, d.path_efficiency_out_r};
}

void put_estimate(ReportWriter& w, const tomography::DensityMatrixEstimate& e, bool clamped) {
    w.put("p00", e.p00);
    w.put("p00_err", e.err00);
    w.put("p01", e.p01);
    w.put("p01_err", e.err01);
    w.put("p10", e.p10);
    w.put("p10_err", e.err10);
    w.put("p11", e.p11);
    w.put("p11_err", e.err11);
    w.put("visibility", e.visibility);
    w.put("visibility_err", e.err_visibility);
    w.put("d", std::abs(e.d));
    w.put("d_err", e.err_d);
    w.put("norm_P", e.norm);
    w.put("concurrence", e.concurrence);
    w.put("concurrence_err", e.err_concurrence);
    w.put("clamped_negative", clamped ? "true" : "false");
}

std::string counts_csv(const StageResult& st) {
    std::ostringstream out;
    out << "setting_id,phase_radians,n_trials,n_none,n_d1,n_d2,n_both\n";
    auto row = [&](const std::string& id, double phase, double n, const std::array<double, 4>& f) {
        out << id << ',' << num(phase) << ',' << num(n);
        for (double x : f) out << ',' << num(x * n);
        out << '\n';
    };
    if (!st.tables.empty()) {
        for (std::size_t i = 0; i < st.tables.size(); ++i) {
            const auto& t = st.tables[i];
            const double phase = i == 0 ? 0.0 : st.fringe[i - 1].phase;
            out << (i == 0 ? std::string("statistics") : "fringe_" + std::to_string(i - 1)) << ',' << num(phase) << ','
                << t.n_trials;
            for (auto c : t.counts) out << ',' << c;
            out << '\n';
        }
        return out.str();
    }
    // Analytic fidelity: expected counts.
    row("statistics", 0.0, st.statistics.n_trials, st.statistics.freq);
    for (std::size_t k = 0; k < st.fringe.size(); ++k) {
        row("fringe_" + std::to_string(k), st.fringe[k].phase, st.fringe[k].stats.n_trials, st.fringe[k].stats.freq);
    }
    return out.str();
}

std::string fringe_csv(const StageResult& st) {
    std::ostringstream out;
    out << "phase,fraction,error\n";
    for (const auto& pt : st.fringe) {
        const double singles = pt.stats.n_trials * (pt.stats.freq[Pattern::kD1] + pt.stats.freq[Pattern::kD2]);
        if (!(singles > 0.0)) {
            out << num(pt.phase) << ",nan,nan\n";
            continue;
        }
        const double f = pt.stats.n_trials * pt.stats.freq[Pattern::kD1] / singles;
        out << num(pt.phase) << ',' << num(f) << ',' << num(std::sqrt(f * (1.0 - f) / singles)) << '\n';
    }
    return out.str();
}

void put_stage(ReportWriter& w, const std::string& prefix, const StageResult& st, const ExperimentConfig& cfg,
               bool include_corrected) {
    std::optional<std::pair<double, double>> boot;
    if (st.fidelity == Fidelity::Sampled) boot = bootstrap_concurrence_errors(cfg, st);

    w.section(prefix + ".raw");
    put_estimate(w, st.raw, st.raw_p.clamped);
    if (boot) w.put("concurrence_err_bootstrap", boot->first);
    if (!include_corrected) return;
    w.section(prefix + ".corrected");
    w.put("path_efficiency_l", st.path_efficiency[0]);
    w.put("path_efficiency_r", st.path_efficiency[1]);
    put_estimate(w, st.corrected, st.corrected_p.clamped);
    if (boot) w.put("concurrence_err_bootstrap", boot->second);
}

}  // namespace

Scenario parse_scenario(const std::string& name) {
    if (name == "fig2") return Scenario::Fig2;
    if (name == "fringe_in") return Scenario::FringeIn;
    if (name == "fringe_out") return Scenario::FringeOut;
    if (name == "table1") return Scenario::Table1;
    if (name == "full_report") return Scenario::FullReport;
    throw ValidationError("unknown scenario '" + name + "'");
}

std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::Fig2: return "fig2";
        case Scenario::FringeIn: return "fringe_in";
        case Scenario::FringeOut: return "fringe_out";
        case Scenario::Table1: return "table1";
        case Scenario::FullReport: return "full_report";
    }
    return "?";
}

std::string to_string(Stage s) { return s == Stage::In ? "in" : "out"; }

EitResult simulate_eit(const ExperimentConfig& cfg) {
    cfg.validate();
    EitResult r;
    r.control = cfg.control_waveform();
    const auto medium = cfg.medium_params();
    r.coupling = medium.coupling;
    r.solution = eit::solve_maxwell_bloch(medium, r.control, cfg.pulse_envelope(), cfg.grid_spec());
    r.partition = r.solution.efficiencies;
    return r;
}

double memory_efficiency(const ExperimentConfig& cfg) {
    if (cfg.memory.derive_from_solver) return simulate_eit(cfg).partition.retrieved;
    return memory::efficiency_at(cfg.memory_params());
}

dualrail::TwoModeFockState stage_state(const ExperimentConfig& cfg, Stage stage) {
    cfg.validate();
    const auto photon = source::build_heralded_state(cfg.source_params());
    auto state = dualrail::split_single_photon(photon, 0.0);
    state = dualrail::apply_coherence_factor(state, cfg.source.visibility);
    if (stage == Stage::In) return state;

    auto params = cfg.memory_params();
    if (cfg.memory.derive_from_solver) {
        params.eta_r0 = memory::eta_r0_for(memory_efficiency(cfg), params.tau, params.tau_m, params.decay);
    }
    return memory::apply_memory(state, params);
}

StageResult collect_stage(const ExperimentConfig& cfg, Stage stage, Fidelity fidelity) {
    const auto det = cfg.detector_params();
    const auto path = stage_path_efficiency(cfg, stage);

    auto state = stage_state(cfg, stage);
    state = dualrail::apply_loss(state, path[0], Rail::L);
    state = dualrail::apply_loss(state, path[1], Rail::R);

    StageResult st;
    st.stage = stage;
    st.fidelity = fidelity;
    st.path_efficiency = {path[0] * det.efficiency[0], path[1] * det.efficiency[1]};

    const auto n_stats = stage == Stage::In ? cfg.scenario.stats_heralds_in : cfg.scenario.stats_heralds_out;
    const auto n_fringe = stage == Stage::In ? cfg.scenario.heralds_in : cfg.scenario.heralds_out;
    const auto phases = counting::fringe_phases(cfg.scenario.fringe_points);
    const auto stats_probs = counting::click_probabilities(state, {.waveplate_angle = 0.0, .phase = 0.0}, det);

    if (fidelity == Fidelity::Analytic) {
        st.statistics = tomography::PatternStats::from_probabilities(stats_probs, static_cast<double>(n_stats));
        for (double phase : phases) {
            const auto p = counting::click_probabilities(
                state, {.waveplate_angle = counting::kInterferenceAngle, .phase = phase}, det);
            st.fringe.push_back({phase, tomography::PatternStats::from_probabilities(p, static_cast<double>(n_fringe))});
        }
        return st;
    }

    const auto stage_seed = counting::derive_seed(cfg.scenario.seed, stage == Stage::In ? kStreamStageIn : kStreamStageOut);
    const auto stats = counting::sample_trials(stats_probs, n_stats, counting::derive_seed(stage_seed, 0));
    const auto points = counting::fringe_scan(state, phases, det, n_fringe, counting::derive_seed(stage_seed, 1));
    st.statistics = tomography::PatternStats::from_counts(stats);
    st.fringe = tomography::to_fringe_stats(points);
    st.tables.push_back(stats);
    for (const auto& p : points) st.tables.push_back(p.counts);
    return st;
}

void estimate_stage(StageResult& st) {
    st.visibility = tomography::fit_visibility(st.fringe);
    const double v = std::clamp(st.visibility.visibility, 0.0, 1.0);
    st.visibility_clamped = v != st.visibility.visibility;
    st.raw_p = tomography::estimate_pij(st.statistics, st.path_efficiency, false);
    st.corrected_p = tomography::estimate_pij(st.statistics, st.path_efficiency, true);
    st.raw = tomography::assemble_rho(st.raw_p, v, st.visibility.sigma);
    st.corrected = tomography::assemble_rho(st.corrected_p, v, st.visibility.sigma);
}

StageResult run_stage(const ExperimentConfig& cfg, Stage stage, Fidelity fidelity) {
    auto st = collect_stage(cfg, stage, fidelity);
    estimate_stage(st);
    return st;
}

std::pair<double, double> bootstrap_concurrence_errors(const ExperimentConfig& cfg, const StageResult& stage) {
    if (stage.tables.empty()) throw ValidationError("bootstrap needs sampled counts");
    auto estimator = [&](bool corrected) {
        return [&, corrected](std::span<const counting::CountsTable> tables) {
            StageResult st;
            st.path_efficiency = stage.path_efficiency;
            st.statistics = tomography::PatternStats::from_counts(tables[0]);
            for (std::size_t k = 1; k < tables.size(); ++k) {
                st.fringe.push_back({stage.fringe[k - 1].phase, tomography::PatternStats::from_counts(tables[k])});
            }
            estimate_stage(st);
            return corrected ? st.corrected.concurrence : st.raw.concurrence;
        };
    };
    const auto seed = counting::derive_seed(cfg.scenario.seed, kStreamBootstrap + (stage.stage == Stage::In ? 0 : 1));
    const auto n = cfg.scenario.bootstrap_resamples;
    return {tomography::bootstrap_errors(stage.tables, estimator(false), n, seed).stddev,
            tomography::bootstrap_errors(stage.tables, estimator(true), n, seed).stddev};
}

CalibrationResult calibrate(const ExperimentConfig& cfg, double target, double tolerance) {
    cfg.validate();
    CalibrationResult res;
    res.config = cfg;
    auto eval = [&](double mhz) {
        auto c = cfg;
        c.control.omega0_2pi_mhz = mhz;
        const double eta = simulate_eit(c).partition.retrieved;
        res.trace.emplace_back(mhz, eta);
        return eta;
    };
    auto finish = [&](double mhz, double eta) {
        res.omega0_2pi_mhz = mhz;
        res.eta_r = eta;
        res.config.control.omega0_2pi_mhz = mhz;
        return res;
    };

    const double start = cfg.control.omega0_2pi_mhz;
    const double eta_start = eval(start);
    if (std::abs(eta_start - target) <= tolerance) return finish(start, eta_start);

    // Log-spaced scan; the bracket nearest (in log omega) to the start is refined.
    std::vector<std::pair<double, double>> scan;
    constexpr int kScan = 12;
    for (int i = 0; i < kScan; ++i) {
        const double mhz = start * std::pow(10.0, std::log10(0.25) + (std::log10(2.5) - std::log10(0.25)) * i / (kScan - 1));
        scan.emplace_back(mhz, eval(mhz));
    }
    scan.emplace_back(start, eta_start);
    std::sort(scan.begin(), scan.end());

    std::optional<std::pair<std::size_t, double>> best;
    for (std::size_t i = 0; i + 1 < scan.size(); ++i) {
        const double a = scan[i].second - target;
        const double b = scan[i + 1].second - target;
        if (a * b > 0.0) continue;
        const double mid = 0.5 * (std::log(scan[i].first) + std::log(scan[i + 1].first));
        const double dist = std::abs(mid - std::log(start));
        if (!best || dist < best->second) best = std::pair{i, dist};
    }
    if (!best) {
        std::ostringstream msg;
        msg << "retrieval efficiency " << target << " not bracketed by the omega0 scan:";
        for (const auto& [mhz, eta] : res.trace) msg << " (" << num(mhz) << " MHz, " << num(eta) << ")";
        throw CalibrationError(msg.str());
    }

    double lo = scan[best->first].first, f_lo = scan[best->first].second - target;
    double hi = scan[best->first + 1].first;
    for (int it = 0; it < 60; ++it) {
        const double mid = std::sqrt(lo * hi);
        const double eta = eval(mid);
        if (std::abs(eta - target) <= tolerance || hi / lo - 1.0 < 1e-9) return finish(mid, eta);
        if ((eta - target) * f_lo > 0.0) {
            lo = mid;
            f_lo = eta - target;
        } else {
            hi = mid;
        }
    }
    throw CalibrationError("bisection did not converge");
}

ScenarioResult run_scenario(const ExperimentConfig& cfg, Scenario scenario, const std::filesystem::path& out_dir) {
    cfg.validate();
    std::filesystem::create_directories(out_dir);
    ScenarioResult res;
    const auto fidelity = cfg.scenario.fidelity;

    const bool want_eit = scenario == Scenario::Fig2 || scenario == Scenario::FullReport;
    const bool want_in = scenario != Scenario::Fig2 && scenario != Scenario::FringeOut;
    const bool want_out = scenario != Scenario::Fig2 && scenario != Scenario::FringeIn;
    const bool corrected = scenario != Scenario::Table1;

    ReportWriter report;
    report.section("run");
    report.put("scenario", to_string(scenario));
    report.put("fidelity", fidelity == Fidelity::Analytic ? "analytic" : "sampled");
    report.put("seed", std::to_string(cfg.scenario.seed));
    report.put("trial_period_ns", cfg.scenario.trial_period_ns);
    report.put("duty_cycle_ms", cfg.scenario.duty_cycle_ms);

    if (want_eit) {
        res.eit = simulate_eit(cfg);
        const auto& sol = res.eit->solution;
        std::ostringstream out, in, ctl;
        out << "t_seconds,probability_density\n";
        in << "t_seconds,probability_density\n";
        ctl << "t_seconds,rabi_rad_per_s\n";
        for (std::size_t i = 0; i < sol.output_times.size(); ++i) {
            out << num(sol.output_times[i]) << ',' << num(sol.output_flux[i]) << '\n';
            in << num(sol.output_times[i]) << ',' << num(sol.input_flux[i]) << '\n';
            ctl << num(sol.output_times[i]) << ',' << num(res.eit->control(sol.output_times[i])) << '\n';
        }
        write_file(out_dir / "eit_output.csv", out.str(), res.files);
        write_file(out_dir / "eit_input.csv", in.str(), res.files);
        write_file(out_dir / "eit_control.csv", ctl.str(), res.files);

        report.section("eit");
        const auto& p = res.eit->partition;
        report.put("eta_r", p.retrieved);
        report.put("leakage", p.leakage);
        report.put("loss", p.loss);
        report.put("residual", p.residual);
        report.put("omega0_2pi_mhz", cfg.control.omega0_2pi_mhz);
        report.put("coupling_rad_per_s", res.eit->coupling);
        report.put("storage_us", cfg.memory.tau_storage_us);
        const double omega0 = res.eit->control.omega0;
        const double medium_len = cfg.medium.length_mm * 1e-3;
        report.put("slow_light_delay_s",
                   medium_len / (eit::kSpeedOfLight * eit::polariton_mixing_angle(omega0, res.eit->coupling)) -
                       medium_len / eit::kSpeedOfLight);
    }

    auto do_stage = [&](Stage stage) {
        auto st = collect_stage(cfg, stage, fidelity);
        const std::string tag = "fringe_" + to_string(stage);
        write_file(out_dir / (tag + "_counts.csv"), counts_csv(st), res.files);
        write_file(out_dir / (tag + "_fringe.csv"), fringe_csv(st), res.files);
        estimate_stage(st);
        return st;
    };
    if (want_in) res.in = do_stage(Stage::In);
    if (want_out) res.out = do_stage(Stage::Out);

    if (res.in) put_stage(report, "input", *res.in, cfg, corrected);
    if (res.out) {
        put_stage(report, "output", *res.out, cfg, corrected);
        report.section("memory");
        report.put("eta_r", memory_efficiency(cfg));
        report.put("tau_storage_us", cfg.memory.tau_storage_us);
        report.put("tau_m_us", cfg.memory.tau_m_us);
    }
    if (res.in && res.out && corrected) {
        res.transfer = tomography::transfer_ratio(res.out->corrected.concurrence, res.out->corrected.err_concurrence,
                                                  res.in->corrected.concurrence, res.in->corrected.err_concurrence);
        report.section("transfer");
        report.put("lambda", res.transfer->value);
        report.put("lambda_err", res.transfer->sigma);
        report.put("ideal_source_c_in", cfg.source.alpha * res.in->corrected.visibility);
    }

    const std::string name = scenario == Scenario::FullReport ? "report.txt" : to_string(scenario) + "_report.txt";
    write_file(out_dir / name, report.str(), res.files);
    return res;
}

}  // namespace qmem
