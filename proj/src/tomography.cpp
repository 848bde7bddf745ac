#include "qmem/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qmem/errors.hpp"

namespace qmem::tomography {

using counting::Pattern;

PatternStats PatternStats::from_counts(const counting::CountsTable& counts) {
    PatternStats s;
    s.n_trials = static_cast<double>(counts.n_trials);
    if (counts.n_trials > 0) {
        for (std::size_t k = 0; k < 4; ++k) s.freq[k] = static_cast<double>(counts.counts[k]) / s.n_trials;
    }
    return s;
}

PatternStats PatternStats::from_probabilities(const counting::ClickProbabilities& p, double nominal_trials) {
    PatternStats s;
    s.n_trials = nominal_trials;
    s.freq = p;
    return s;
}

std::vector<FringeStats> to_fringe_stats(std::span<const counting::FringePoint> points) {
    std::vector<FringeStats> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back({p.phase, PatternStats::from_counts(p.counts)});
    return out;
}

PijEstimate estimate_pij(const PatternStats& stats, std::array<double, 2> path_efficiency, bool correct_losses) {
    if (!(stats.n_trials > 0.0)) throw DataInsufficientError("no trials in the photon-statistics setting");
    const auto& f = stats.freq;
    const double n = stats.n_trials;
    auto binom_err = [n](double x) { return std::sqrt(std::max(x * (1.0 - x), 0.0) / n); };

    PijEstimate est;
    if (!correct_losses) {
        est.p00 = f[Pattern::kNone];
        est.p10 = f[Pattern::kD1];
        est.p01 = f[Pattern::kD2];
        est.p11 = f[Pattern::kBoth];
        est.err00 = binom_err(est.p00);
        est.err10 = binom_err(est.p10);
        est.err01 = binom_err(est.p01);
        est.err11 = binom_err(est.p11);
        return est;
    }

    const double eta_l = path_efficiency[0];
    const double eta_r = path_efficiency[1];
    for (double eta : path_efficiency) {
        if (!(eta <= 1.0)) throw ValidationError("path efficiency above 1");
        if (!(eta > 0.0)) throw DataInsufficientError("loss correction is not invertible at zero efficiency");
    }
    // f11 = p11 eta_l eta_r
    // f10 = eta_l (p10 + p11 (1 - eta_r)),  f01 = eta_r (p01 + p11 (1 - eta_l))
    const double s11 = binom_err(f[Pattern::kBoth]);
    const double s10 = binom_err(f[Pattern::kD1]);
    const double s01 = binom_err(f[Pattern::kD2]);
    double p11 = f[Pattern::kBoth] / (eta_l * eta_r);
    double p10 = f[Pattern::kD1] / eta_l - p11 * (1.0 - eta_r);
    double p01 = f[Pattern::kD2] / eta_r - p11 * (1.0 - eta_l);
    est.err11 = s11 / (eta_l * eta_r);
    est.err10 = std::hypot(s10 / eta_l, est.err11 * (1.0 - eta_r));
    est.err01 = std::hypot(s01 / eta_r, est.err11 * (1.0 - eta_l));
    for (double* p : {&p11, &p10, &p01}) {
        if (*p < 0.0) {
            *p = 0.0;
            est.clamped = true;
        }
    }
    est.p11 = p11;
    est.p10 = p10;
    est.p01 = p01;
    est.p00 = 1.0 - p01 - p10 - p11;
    if (est.p00 < 0.0) {
        est.p00 = 0.0;
        est.clamped = true;
    }
    est.err00 = std::sqrt(est.err01 * est.err01 + est.err10 * est.err10 + est.err11 * est.err11);
    return est;
}

VisibilityFit fit_visibility(std::span<const FringeStats> fringe) {
    if (fringe.size() < 4) throw ValidationError("visibility fit needs at least 4 phase points");
    const auto [lo, hi] = std::minmax_element(fringe.begin(), fringe.end(),
                                              [](const FringeStats& a, const FringeStats& b) { return a.phase < b.phase; });
    if (!(hi->phase - lo->phase > std::numbers::pi)) throw ValidationError("fringe phases must span more than pi");

    std::vector<double> phase, y, m;
    for (const auto& pt : fringe) {
        const double singles = pt.stats.n_trials * (pt.stats.freq[Pattern::kD1] + pt.stats.freq[Pattern::kD2]);
        if (!(singles > 0.0)) continue;
        phase.push_back(pt.phase);
        y.push_back(pt.stats.n_trials * pt.stats.freq[Pattern::kD1] / singles);
        m.push_back(singles);
    }
    if (y.size() < 3) throw DataInsufficientError("fewer than 3 fringe points with single clicks");

    const auto n = static_cast<Eigen::Index>(y.size());
    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd yv(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = std::cos(phase[i]);
        x(i, 2) = std::sin(phase[i]);
        yv(i) = y[i];
    }

    auto solve = [&](const Eigen::VectorXd& w) {
        const Eigen::MatrixXd xtw = x.transpose() * w.asDiagonal();
        const Eigen::Matrix3d normal = xtw * x;
        Eigen::LDLT<Eigen::Matrix3d> ldlt(normal);
        if (ldlt.info() != Eigen::Success || !(std::abs(normal.determinant()) > 0.0)) {
            throw DataInsufficientError("visibility fit is degenerate");
        }
        return std::pair{Eigen::Vector3d(ldlt.solve(xtw * yv)), Eigen::Matrix3d(ldlt.solve(Eigen::Matrix3d::Identity()))};
    };

    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) w(i) = m[i];
    auto [beta, cov] = solve(w);
    // Refit with binomial variances of the fitted shares.
    for (Eigen::Index i = 0; i < n; ++i) {
        const double yhat = std::clamp(x.row(i).dot(beta), 0.0, 1.0);
        w(i) = m[i] / std::max(yhat * (1.0 - yhat), 1.0 / m[i]);
    }
    std::tie(beta, cov) = solve(w);

    const double a = beta(0);
    const double c = beta(1);
    const double s = beta(2);
    if (!(a > 0.0)) throw DataInsufficientError("visibility fit failed: non-positive fringe offset");
    const double b = std::hypot(c, s);

    VisibilityFit fit;
    fit.offset = a;
    fit.amplitude = b;
    fit.visibility = b / a;
    fit.phase0 = std::atan2(s, c);
    Eigen::Vector3d grad(-b / (a * a), b > 0.0 ? c / (a * b) : 0.0, b > 0.0 ? s / (a * b) : 0.0);
    fit.sigma = std::sqrt(std::max(grad.dot(cov * grad), 0.0));
    return fit;
}

Eigen::Matrix4cd DensityMatrixEstimate::matrix() const {
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    m(0, 0) = p00;
    m(1, 1) = p01;
    m(2, 2) = p10;
    m(3, 3) = p11;
    m(1, 2) = d;
    m(2, 1) = std::conj(d);
    return m / norm;
}

namespace {

double concurrence_of(double p00, double p01, double p10, double p11, double v) {
    const double norm = p00 + p01 + p10 + p11;
    const double d = v * (p01 + p10) / 2.0;
    return std::max(0.0, 2.0 * d - 2.0 * std::sqrt(p00 * p11)) / norm;
}

}  // namespace

DensityMatrixEstimate assemble_rho(const PijEstimate& p, double visibility, double visibility_error) {
    for (double x : {p.p00, p.p01, p.p10, p.p11}) {
        if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("probability " + std::to_string(x) + " outside [0, 1]");
    }
    if (!(visibility >= 0.0 && visibility <= 1.0)) {
        throw ValidationError("visibility " + std::to_string(visibility) + " outside [0, 1]");
    }
    DensityMatrixEstimate est;
    est.p00 = p.p00;
    est.p01 = p.p01;
    est.p10 = p.p10;
    est.p11 = p.p11;
    est.err00 = p.err00;
    est.err01 = p.err01;
    est.err10 = p.err10;
    est.err11 = p.err11;
    est.visibility = visibility;
    est.err_visibility = visibility_error;
    est.norm = p.p00 + p.p01 + p.p10 + p.p11;
    if (!(est.norm > 0.0)) throw ValidationError("all probabilities vanish");
    est.d = visibility * (p.p01 + p.p10) / 2.0;
    est.err_d = 0.5 * std::sqrt(std::pow(visibility_error * (p.p01 + p.p10), 2) +
                                std::pow(visibility, 2) * (p.err01 * p.err01 + p.err10 * p.err10));
    est.concurrence = concurrence(est);

    // Linear error propagation with central differences, errors taken independent.
    const std::array<double, 5> x{p.p00, p.p01, p.p10, p.p11, visibility};
    const std::array<double, 5> sx{p.err00, p.err01, p.err10, p.err11, visibility_error};
    double var = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (sx[i] == 0.0) continue;
        auto lo = x, hi = x;
        const double h = std::max(1e-6 * std::abs(x[i]), 1e-12);
        hi[i] += h;
        lo[i] = std::max(lo[i] - h, 0.0);
        const double dc = (concurrence_of(hi[0], hi[1], hi[2], hi[3], hi[4]) -
                           concurrence_of(lo[0], lo[1], lo[2], lo[3], lo[4])) / (hi[i] - lo[i]);
        var += dc * dc * sx[i] * sx[i];
    }
    est.err_concurrence = std::sqrt(var);
    return est;
}

double concurrence(const DensityMatrixEstimate& est) {
    return std::max(0.0, 2.0 * std::abs(est.d) - 2.0 * std::sqrt(est.p00 * est.p11)) / est.norm;
}

Ratio transfer_ratio(double c_out, double c_out_err, double c_in, double c_in_err) {
    if (!(c_in > 0.0)) throw DataInsufficientError("transfer ratio undefined for C_in = 0");
    Ratio r;
    r.value = c_out / c_in;
    r.sigma = std::hypot(c_out_err / c_in, c_out * c_in_err / (c_in * c_in));
    return r;
}

BootstrapResult bootstrap_errors(std::span<const counting::CountsTable> tables, const Estimator& estimator,
                                 std::size_t n_resamples, std::uint64_t seed) {
    if (n_resamples < 2) throw ValidationError("bootstrap needs at least 2 resamples");
    std::vector<double> values;
    values.reserve(n_resamples);
    std::vector<counting::CountsTable> resampled(tables.size());
    for (std::size_t r = 0; r < n_resamples; ++r) {
        const auto stream = counting::derive_seed(seed, r);
        for (std::size_t i = 0; i < tables.size(); ++i) {
            const auto freq = PatternStats::from_counts(tables[i]).freq;
            resampled[i] = tables[i].n_trials == 0
                               ? tables[i]
                               : counting::sample_trials(freq, tables[i].n_trials, counting::derive_seed(stream, i));
        }
        try {
            values.push_back(estimator(resampled));
        } catch (const DataInsufficientError&) {
        } catch (const ValidationError&) {
        }
    }
    if (values.size() < 2) throw DataInsufficientError("bootstrap: estimator failed on nearly all resamples");

    BootstrapResult out;
    out.resamples_used = values.size();
    for (double v : values) out.mean += v;
    out.mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    return out;
}

}  // namespace qmem::tomography
