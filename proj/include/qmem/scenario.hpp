#pragma once

// Scenario runner: source -> entangler -> memory (or bypass) -> verification.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qmem/config.hpp"
#include "qmem/dualrail.hpp"
#include "qmem/eitsolver.hpp"
#include "qmem/tomography.hpp"

namespace qmem {

enum class Scenario { Fig2, FringeIn, FringeOut, Table1, FullReport };
enum class Stage { In, Out };

Scenario parse_scenario(const std::string& name);
std::string to_string(Scenario s);
std::string to_string(Stage s);

struct EitResult {
    eit::FieldSolution solution;
    eit::EfficiencyPartition partition;
    eit::ControlWaveform control;
    double coupling = 0.0;
};

EitResult simulate_eit(const ExperimentConfig& cfg);

/// Retrieval efficiency used for the memory channel: the decay law, or the
/// solver's retrieved fraction when memory.derive_from_solver is set.
double memory_efficiency(const ExperimentConfig& cfg);

/// State at the input faces of the ensembles (In) or at their output faces (Out).
dualrail::TwoModeFockState stage_state(const ExperimentConfig& cfg, Stage stage);

struct StageResult {
    Stage stage = Stage::In;
    Fidelity fidelity = Fidelity::Analytic;
    std::array<double, 2> path_efficiency{};  ///< ensemble face to detector, incl. detector efficiency

    tomography::PatternStats statistics;
    std::vector<tomography::FringeStats> fringe;
    /// Sampled fidelity only: photon-statistics table followed by the fringe tables.
    std::vector<counting::CountsTable> tables;

    tomography::VisibilityFit visibility;
    tomography::PijEstimate raw_p;
    tomography::PijEstimate corrected_p;
    tomography::DensityMatrixEstimate raw;
    tomography::DensityMatrixEstimate corrected;
    bool visibility_clamped = false;
};

/// Counts (sampled) or exact probabilities (analytic) for one stage; no estimation.
StageResult collect_stage(const ExperimentConfig& cfg, Stage stage, Fidelity fidelity);

/// Fills the tomography fields of a collected stage. Throws
/// DataInsufficientError when the counts cannot support the estimate.
void estimate_stage(StageResult& stage);

StageResult run_stage(const ExperimentConfig& cfg, Stage stage, Fidelity fidelity);

/// Bootstrap spread of the raw and corrected concurrence; needs sampled tables.
std::pair<double, double> bootstrap_concurrence_errors(const ExperimentConfig& cfg, const StageResult& stage);

struct CalibrationResult {
    double omega0_2pi_mhz = 0.0;
    double eta_r = 0.0;
    std::vector<std::pair<double, double>> trace;  ///< (omega0_2pi_mhz, eta_r) evaluations
    ExperimentConfig config;
};

/// Bisection on control.omega0_2pi_mhz until the simulated retrieval
/// efficiency is within `tolerance` of `target`. The scan covers
/// [0.25, 2.5] x the starting value; the bracket closest to the start wins.
CalibrationResult calibrate(const ExperimentConfig& cfg, double target = 0.17, double tolerance = 2e-4);

struct ScenarioResult {
    std::optional<EitResult> eit;
    std::optional<StageResult> in;
    std::optional<StageResult> out;
    std::optional<tomography::Ratio> transfer;
    std::vector<std::filesystem::path> files;
};

/// Runs a scenario and writes its CSV and report files into `out_dir`.
ScenarioResult run_scenario(const ExperimentConfig& cfg, Scenario scenario, const std::filesystem::path& out_dir);

}  // namespace qmem
