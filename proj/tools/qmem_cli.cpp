// qmem: command-line front end for the entanglement-storage simulator.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qmem/config.hpp"
#include "qmem/errors.hpp"
#include "qmem/scenario.hpp"

namespace {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kValidation = 2,
    kCalibration = 3,
    kDataInsufficient = 4,
};

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string fidelity;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config, "Configuration file (built-in defaults when omitted)");
    cmd->add_option("--seed", opts.seed, "Master seed for sampled runs");
    cmd->add_option("--out", opts.out, "Output directory");
    cmd->add_option("--fidelity", opts.fidelity, "analytic | sampled")->check(CLI::IsMember({"analytic", "sampled"}));
}

qmem::ExperimentConfig resolve(const CommonOptions& opts) {
    auto cfg = opts.config.empty() ? qmem::ExperimentConfig{} : qmem::load_config(opts.config);
    if (opts.seed) cfg.scenario.seed = *opts.seed;
    if (!opts.out.empty()) cfg.scenario.output_dir = opts.out;
    if (!opts.fidelity.empty()) {
        cfg.scenario.fidelity = opts.fidelity == "analytic" ? qmem::Fidelity::Analytic : qmem::Fidelity::Sampled;
    }
    cfg.validate();
    return cfg;
}

void print_files(const qmem::ScenarioResult& res) {
    for (const auto& f : res.files) std::cout << "wrote " << f.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Storage and retrieval of dual-rail photonic entanglement in an EIT quantum memory"};
    app.require_subcommand(1);

    CommonOptions opts;
    auto* eit_cmd = app.add_subcommand("simulate-eit", "Solve storage and retrieval for one ensemble");
    auto* fringe_cmd = app.add_subcommand("fringe", "Fringe scan and tomography of the input or output modes");
    auto* table_cmd = app.add_subcommand("table1", "Raw detector statistics for input and output states");
    auto* report_cmd = app.add_subcommand("report", "All scenarios plus the entanglement transfer ratio");
    auto* cal_cmd = app.add_subcommand("calibrate", "Tune the control Rabi frequency to a target efficiency");
    for (auto* cmd : {eit_cmd, fringe_cmd, table_cmd, report_cmd, cal_cmd}) add_common(cmd, opts);

    std::string stage = "in";
    fringe_cmd->add_option("--stage", stage, "in | out")->check(CLI::IsMember({"in", "out"}));
    double target = 0.17;
    cal_cmd->add_option("--target", target, "Target retrieval efficiency");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto cfg = resolve(opts);
        const std::filesystem::path out_dir = cfg.scenario.output_dir;

        if (*cal_cmd) {
            const auto res = qmem::calibrate(cfg, target);
            std::filesystem::create_directories(out_dir);
            std::ofstream(out_dir / "calibrated.ini") << qmem::serialize_config(res.config);
            std::ofstream trace(out_dir / "calibration_trace.csv");
            trace << "omega0_2pi_mhz,eta_r\n";
            for (const auto& [mhz, eta] : res.trace) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.10g,%.10g\n", mhz, eta);
                trace << buf;
            }
            std::printf("omega0_2pi_mhz = %.10g\neta_r = %.6f\nevaluations = %zu\n", res.omega0_2pi_mhz, res.eta_r,
                        res.trace.size());
            std::cout << "wrote " << (out_dir / "calibrated.ini").string() << '\n';
            return kOk;
        }

        qmem::Scenario scenario = qmem::Scenario::FullReport;
        if (*eit_cmd) scenario = qmem::Scenario::Fig2;
        if (*fringe_cmd) scenario = stage == "in" ? qmem::Scenario::FringeIn : qmem::Scenario::FringeOut;
        if (*table_cmd) scenario = qmem::Scenario::Table1;

        const auto res = qmem::run_scenario(cfg, scenario, out_dir);
        if (res.eit) std::printf("eta_r = %.6f  leakage = %.6f\n", res.eit->partition.retrieved, res.eit->partition.leakage);
        if (res.in) std::printf("C_in = %.6g  raw C_in = %.6g  V_in = %.4f\n", res.in->corrected.concurrence,
                                res.in->raw.concurrence, res.in->visibility.visibility);
        if (res.out) std::printf("C_out = %.6g  raw C_out = %.6g  V_out = %.4f\n", res.out->corrected.concurrence,
                                 res.out->raw.concurrence, res.out->visibility.visibility);
        if (res.transfer) std::printf("lambda = %.4f +- %.4f\n", res.transfer->value, res.transfer->sigma);
        print_files(res);
        return kOk;
    } catch (const qmem::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kValidation;
    } catch (const qmem::CalibrationError& e) {
        std::cerr << "calibration failed: " << e.what() << '\n';
        return kCalibration;
    } catch (const qmem::DataInsufficientError& e) {
        std::cerr << "insufficient data: " << e.what() << '\n';
        return kDataInsufficient;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
}
