#include "qmem/dualrail.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "qmem/errors.hpp"

namespace qmem::dualrail {

namespace {

constexpr std::array<double, 3> kFactorial{1.0, 1.0, 2.0};

// Coefficients of a polynomial in (b1^dag, b2^dag) of total degree <= 2.
using Poly = std::array<std::array<cplx, 3>, 3>;

Poly multiply_linear(const Poly& poly, cplx u, cplx v) {
    Poly out{};
    for (int p = 0; p < 3; ++p) {
        for (int q = 0; p + q < 3; ++q) {
            if (poly[p][q] == cplx{}) continue;
            if (p + q + 1 > 2) throw ValidationError("mode polynomial exceeds truncation");
            out[p + 1][q] += poly[p][q] * u;
            out[p][q + 1] += poly[p][q] * v;
        }
    }
    return out;
}

void check_state(const Matrix6c& rho) {
    if (!rho.allFinite()) throw ValidationError("density matrix has non-finite entries");
    const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (herm > TwoModeFockState::kHermitianTol) {
        throw ValidationError("density matrix is not Hermitian (deviation " + std::to_string(herm) + ")");
    }
    const double tr = rho.trace().real();
    if (std::abs(tr - 1.0) > TwoModeFockState::kTraceTol) {
        throw ValidationError("density matrix trace is " + std::to_string(tr) + ", expected 1");
    }
    Eigen::SelfAdjointEigenSolver<Matrix6c> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < TwoModeFockState::kEigenTol) {
        throw ValidationError("density matrix is not positive semidefinite (min eigenvalue " +
                              std::to_string(es.eigenvalues().minCoeff()) + ")");
    }
}

// Floating-point drift from repeated conjugation is removed by
// re-Hermitizing; genuine violations still fail validation.
Matrix6c hermitize(const Matrix6c& rho) { return 0.5 * (rho + rho.adjoint()); }

}  // namespace

std::size_t basis_index(int n_left, int n_right) {
    for (std::size_t i = 0; i < kDim; ++i) {
        if (kBasis[i].left == n_left && kBasis[i].right == n_right) return i;
    }
    throw ValidationError("occupation (" + std::to_string(n_left) + "," + std::to_string(n_right) +
                          ") is outside the two-photon truncation");
}

SingleModePhotonStats::SingleModePhotonStats(double p0, double p1, double p2) : p_{p0, p1, p2} {
    for (double p : p_) {
        if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
            throw ValidationError("photon-number probability " + std::to_string(p) + " outside [0, 1]");
        }
    }
    const double sum = p0 + p1 + p2;
    if (std::abs(sum - 1.0) > 1e-12) {
        throw ValidationError("photon-number probabilities sum to " + std::to_string(sum));
    }
}

TwoModeFockState::TwoModeFockState(const Matrix6c& rho) : rho_(rho) { check_state(rho_); }

TwoModeFockState TwoModeFockState::vacuum() {
    Matrix6c rho = Matrix6c::Zero();
    rho(0, 0) = 1.0;
    return TwoModeFockState(rho);
}

TwoModeFockState TwoModeFockState::pure(const Eigen::Matrix<cplx, 6, 1>& amplitudes) {
    const double norm = amplitudes.norm();
    if (norm == 0.0) throw ValidationError("zero state vector");
    const Eigen::Matrix<cplx, 6, 1> psi = amplitudes / norm;
    return TwoModeFockState(psi * psi.adjoint());
}

double TwoModeFockState::population(int n_left, int n_right) const {
    const auto i = basis_index(n_left, n_right);
    return rho_(i, i).real();
}

cplx TwoModeFockState::coherence() const { return rho_(basis_index(0, 1), basis_index(1, 0)); }

double TwoModeFockState::trace() const { return rho_.trace().real(); }

double TwoModeFockState::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix6c> es(rho_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

SingleModePhotonStats TwoModeFockState::marginal(Rail rail) const {
    std::array<double, 3> p{};
    for (std::size_t i = 0; i < kDim; ++i) {
        const int n = rail == Rail::L ? kBasis[i].left : kBasis[i].right;
        p[n] += rho_(i, i).real();
    }
    for (auto& x : p) x = std::max(x, 0.0);
    const double sum = p[0] + p[1] + p[2];
    return {p[0] / sum, p[1] / sum, p[2] / sum};
}

Matrix2c OpticalElementSetting::mode_matrix() const {
    Matrix2c m = Matrix2c::Identity();
    switch (kind) {
        case ElementKind::Waveplate: {
            const double c = std::cos(2.0 * angle);
            const double s = std::sin(2.0 * angle);
            m << c, s, -s, c;
            break;
        }
        case ElementKind::Phase: {
            const auto k = rail == Rail::L ? 0 : 1;
            m(k, k) = std::polar(1.0, phase);
            break;
        }
        case ElementKind::DisplacerSplit: {
            const double h = std::numbers::sqrt2 / 2.0;
            m << h, -h, h, h;
            break;
        }
        case ElementKind::DisplacerCombine: {
            const double h = std::numbers::sqrt2 / 2.0;
            m << h, h, -h, h;
            break;
        }
    }
    return m;
}

Matrix6c fock_representation(const Matrix2c& mode) {
    Matrix6c u = Matrix6c::Zero();
    for (std::size_t col = 0; col < kDim; ++col) {
        const auto [n, m] = kBasis[col];
        Poly poly{};
        poly[0][0] = 1.0;
        for (int k = 0; k < n; ++k) poly = multiply_linear(poly, mode(0, 0), mode(1, 0));
        for (int k = 0; k < m; ++k) poly = multiply_linear(poly, mode(0, 1), mode(1, 1));
        const double norm_in = std::sqrt(kFactorial[n] * kFactorial[m]);
        for (int p = 0; p < 3; ++p) {
            for (int q = 0; p + q < 3; ++q) {
                if (poly[p][q] == cplx{}) continue;
                u(basis_index(p, q), col) = poly[p][q] * std::sqrt(kFactorial[p] * kFactorial[q]) / norm_in;
            }
        }
    }
    return u;
}

TwoModeFockState apply_mode_unitary(const TwoModeFockState& state, const Matrix2c& mode) {
    const double dev = (mode.adjoint() * mode - Matrix2c::Identity()).cwiseAbs().maxCoeff();
    if (dev > 1e-12) throw ValidationError("mode matrix is not unitary");
    const Matrix6c u = fock_representation(mode);
    return TwoModeFockState(hermitize(u * state.matrix() * u.adjoint()));
}

TwoModeFockState apply_element(const TwoModeFockState& state, const OpticalElementSetting& element) {
    return apply_mode_unitary(state, element.mode_matrix());
}

TwoModeFockState embed_single_mode(const SingleModePhotonStats& source) {
    Matrix6c rho = Matrix6c::Zero();
    rho(basis_index(0, 0), basis_index(0, 0)) = source.p0();
    rho(basis_index(1, 0), basis_index(1, 0)) = source.p1();
    rho(basis_index(2, 0), basis_index(2, 0)) = source.p2();
    return TwoModeFockState(rho);
}

TwoModeFockState split_single_photon(const SingleModePhotonStats& source, double phi_rel) {
    const auto split = apply_element(embed_single_mode(source), {.kind = ElementKind::DisplacerSplit});
    return apply_phase(split, phi_rel, Rail::L);
}

TwoModeFockState apply_loss(const TwoModeFockState& state, double eta, Rail rail) {
    if (!(eta >= 0.0 && eta <= 1.0)) {
        throw ValidationError("transmission " + std::to_string(eta) + " outside [0, 1]");
    }
    // Kraus operators K_k |n> = sqrt(C(n,k) eta^(n-k) (1-eta)^k) |n-k> on the lossy rail.
    const auto& rho = state.matrix();
    Matrix6c out = Matrix6c::Zero();
    for (int lost = 0; lost <= 2; ++lost) {
        Matrix6c kraus = Matrix6c::Zero();
        for (std::size_t col = 0; col < kDim; ++col) {
            auto occ = kBasis[col];
            int& n = rail == Rail::L ? occ.left : occ.right;
            if (n < lost) continue;
            const double binom = (n == 2 && lost == 1) ? 2.0 : 1.0;
            const double amp = std::sqrt(binom * std::pow(eta, n - lost) * std::pow(1.0 - eta, lost));
            n -= lost;
            kraus(basis_index(occ.left, occ.right), col) = amp;
        }
        out += kraus * rho * kraus.adjoint();
    }
    return TwoModeFockState(hermitize(out));
}

TwoModeFockState apply_waveplate(const TwoModeFockState& state, double theta) {
    return apply_element(state, {.kind = ElementKind::Waveplate, .angle = theta});
}

TwoModeFockState apply_phase(const TwoModeFockState& state, double phi, Rail rail) {
    return apply_element(state, {.kind = ElementKind::Phase, .phase = phi, .rail = rail});
}

TwoModeFockState apply_coherence_factor(const TwoModeFockState& state, double v) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw ValidationError("coherence factor " + std::to_string(v) + " outside [0, 1]");
    }
    Matrix6c rho = state.matrix();
    for (std::size_t i = 0; i < kDim; ++i) {
        for (std::size_t j = 0; j < kDim; ++j) {
            const int k = kBasis[i].left - kBasis[j].left;
            if (k != 0) rho(i, j) *= std::pow(v, k * k);
        }
    }
    return TwoModeFockState(rho);
}

}  // namespace qmem::dualrail
