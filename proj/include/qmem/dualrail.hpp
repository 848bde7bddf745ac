#pragma once

// Two bosonic rails (L, R) truncated at two photons in total.
//
// Basis order of the 6x6 density matrix:
//   0: |0,0>  1: |0,1>  2: |1,0>  3: |1,1>  4: |0,2>  5: |2,0>
// where |n,m> carries n photons in rail L and m photons in rail R.
//
// Linear optics is described by a 2x2 mode matrix M acting on creation
// operators, a_i^dag -> sum_j M(j,i) b_j^dag, lifted to the Fock basis sector
// by sector. Passive elements conserve photon number, so the truncation is
// exact for them. Loss only lowers photon number and is exact as well.

#include <array>
#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace qmem::dualrail {

using cplx = std::complex<double>;
using Matrix6c = Eigen::Matrix<cplx, 6, 6>;
using Matrix2c = Eigen::Matrix<cplx, 2, 2>;

enum class Rail { L, R };

inline constexpr std::size_t kDim = 6;

/// Photon numbers (n_L, n_R) of basis index i.
struct Occupation {
    int left;
    int right;
};

constexpr std::array<Occupation, kDim> kBasis{{{0, 0}, {0, 1}, {1, 0}, {1, 1}, {0, 2}, {2, 0}}};

/// Basis index of |n_L, n_R>; throws ValidationError outside the truncation.
std::size_t basis_index(int n_left, int n_right);

/// Photon-number distribution of a single mode, truncated at two photons.
class SingleModePhotonStats {
public:
    SingleModePhotonStats(double p0, double p1, double p2);

    double p0() const { return p_[0]; }
    double p1() const { return p_[1]; }
    double p2() const { return p_[2]; }
    double operator[](std::size_t n) const { return p_.at(n); }

private:
    std::array<double, 3> p_;
};

/// Validated two-rail density matrix. Immutable; every operation returns a
/// new state.
class TwoModeFockState {
public:
    static constexpr double kHermitianTol = 1e-12;
    static constexpr double kTraceTol = 1e-10;
    static constexpr double kEigenTol = -1e-10;

    explicit TwoModeFockState(const Matrix6c& rho);

    static TwoModeFockState vacuum();
    static TwoModeFockState pure(const Eigen::Matrix<cplx, 6, 1>& amplitudes);

    const Matrix6c& matrix() const { return rho_; }

    /// Probability of |n_L, n_R>.
    double population(int n_left, int n_right) const;

    /// rho(|0,1>, |1,0>), the which-rail coherence d.
    cplx coherence() const;

    double trace() const;
    double min_eigenvalue() const;

    /// Reduced photon-number distribution of one rail.
    SingleModePhotonStats marginal(Rail rail) const;

private:
    Matrix6c rho_;
};

enum class ElementKind { Waveplate, Phase, DisplacerSplit, DisplacerCombine };

/// One passive optical element. `angle` is used by waveplates, `phase` and
/// `rail` by phase plates; displacers take no parameters.
struct OpticalElementSetting {
    ElementKind kind = ElementKind::Phase;
    double angle = 0.0;
    double phase = 0.0;
    Rail rail = Rail::L;

    Matrix2c mode_matrix() const;
};

/// Lift a 2x2 mode matrix to the truncated Fock space.
Matrix6c fock_representation(const Matrix2c& mode);

/// Conjugate the state by the Fock-space lift of a mode matrix.
TwoModeFockState apply_mode_unitary(const TwoModeFockState& state, const Matrix2c& mode);

TwoModeFockState apply_element(const TwoModeFockState& state, const OpticalElementSetting& element);

/// Put a single-mode state on rail L with rail R in vacuum.
TwoModeFockState embed_single_mode(const SingleModePhotonStats& source);

/// 50/50 displacer split of a single-mode state followed by a relative phase
/// phi_rel on rail L. The one-photon part becomes
/// (|0,1> + e^{i phi_rel} |1,0>)/sqrt(2), so d is real and positive at phi_rel = 0.
TwoModeFockState split_single_photon(const SingleModePhotonStats& source, double phi_rel);

/// Beam-splitter loss to an empty environment on one rail, transmission eta.
TwoModeFockState apply_loss(const TwoModeFockState& state, double eta, Rail rail);

/// Half-waveplate at angle theta: rails rotate by 2*theta,
/// b1 = cos(2 theta) a_L + sin(2 theta) a_R, b2 = -sin(2 theta) a_L + cos(2 theta) a_R.
/// At theta = 0 detector 1 sees rail L and detector 2 sees rail R.
TwoModeFockState apply_waveplate(const TwoModeFockState& state, double theta);

/// Phase e^{i phi} per photon on the given rail. For rail L, d -> d e^{-i phi}.
TwoModeFockState apply_phase(const TwoModeFockState& state, double phi, Rail rail);

/// Random relative-phase channel with Gaussian phase noise: the element between
/// basis states whose rail-L photon numbers differ by k is multiplied by v^(k^2).
/// The which-rail coherence d scales by exactly v; populations are untouched.
TwoModeFockState apply_coherence_factor(const TwoModeFockState& state, double v);

}  // namespace qmem::dualrail
