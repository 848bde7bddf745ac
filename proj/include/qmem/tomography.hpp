#pragma once

// Reconstruction of the photon-number-constrained two-mode density matrix
//
//            | p00  0    0    0   |
//   rho = 1/P| 0    p01  d    0   |,   d = V (p01 + p10) / 2,
//            | 0    d*   p10  0   |
//            | 0    0    0    p11 |
//
// from photon-counting data, with concurrence C = max(0, 2|d| - 2 sqrt(p00 p11)) / P.

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qmem/counting.hpp"

namespace qmem::tomography {

/// Click-pattern frequencies with the number of trials they stand for.
/// Built from sampled counts, or from exact probabilities with a nominal
/// trial count that only sets the size of the reported errors.
struct PatternStats {
    double n_trials = 0.0;
    std::array<double, 4> freq{};

    static PatternStats from_counts(const counting::CountsTable& counts);
    static PatternStats from_probabilities(const counting::ClickProbabilities& p, double nominal_trials);
};

struct FringeStats {
    double phase = 0.0;
    PatternStats stats;
};

std::vector<FringeStats> to_fringe_stats(std::span<const counting::FringePoint> points);

struct PijEstimate {
    double p00 = 0, p01 = 0, p10 = 0, p11 = 0;
    double err00 = 0, err01 = 0, err10 = 0, err11 = 0;
    bool clamped = false;  ///< a corrected probability came out negative and was set to 0
};

/// Photon-number probabilities from the photon-statistics setting (waveplate at 0).
/// Raw mode returns pattern frequencies (p10 from detector 1, p01 from detector 2).
/// Corrected mode inverts binomial thinning by the per-path efficiency
/// (index 0: rail L / detector 1) within the <= 1 photon per mode sector.
PijEstimate estimate_pij(const PatternStats& stats, std::array<double, 2> path_efficiency, bool correct_losses);

struct VisibilityFit {
    double visibility = 0.0;
    double sigma = 0.0;
    double offset = 0.0;     ///< A in A + B cos(phi - phi0)
    double amplitude = 0.0;  ///< B
    double phase0 = 0.0;
};

/// Weighted least-squares fit of the detector-1 share of single clicks,
/// n_D1 / (n_D1 + n_D2), to A + B cos(phi - phi0). V = B / A, sigma from the
/// binomial-weighted fit covariance. Needs >= 4 phases spanning more than pi.
VisibilityFit fit_visibility(std::span<const FringeStats> fringe);

struct DensityMatrixEstimate {
    double p00 = 0, p01 = 0, p10 = 0, p11 = 0;
    std::complex<double> d;
    double visibility = 0.0;
    double norm = 0.0;  ///< P
    double concurrence = 0.0;

    double err00 = 0, err01 = 0, err10 = 0, err11 = 0;
    double err_visibility = 0.0;
    double err_d = 0.0;
    double err_concurrence = 0.0;

    /// Normalized 4x4 matrix in the basis |00>, |01>, |10>, |11>.
    Eigen::Matrix4cd matrix() const;
};

DensityMatrixEstimate assemble_rho(const PijEstimate& p, double visibility, double visibility_error = 0.0);

double concurrence(const DensityMatrixEstimate& est);

struct Ratio {
    double value = 0.0;
    double sigma = 0.0;
};

/// lambda = C_out / C_in with relative errors added in quadrature.
Ratio transfer_ratio(double c_out, double c_out_err, double c_in, double c_in_err);

using Estimator = std::function<double(std::span<const counting::CountsTable>)>;

struct BootstrapResult {
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t resamples_used = 0;
};

/// Re-draws every table multinomially from its own frequencies and reports the
/// spread of the estimator. Resamples on which the estimator throws are dropped.
BootstrapResult bootstrap_errors(std::span<const counting::CountsTable> tables, const Estimator& estimator,
                                 std::size_t n_resamples, std::uint64_t seed);

}  // namespace qmem::tomography
