#pragma once

#include <complex>
#include <random>

#include "qmem/dualrail.hpp"

namespace testsupport {

using qmem::dualrail::cplx;
using qmem::dualrail::Matrix6c;

/// rho = A A^dag / tr with complex Gaussian A of the given rank.
inline qmem::dualrail::TwoModeFockState random_state(std::mt19937_64& rng, int rank = 6) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Matrix<cplx, 6, Eigen::Dynamic> a(6, rank);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < rank; ++j) a(i, j) = cplx{n(rng), n(rng)};
    Matrix6c rho = a * a.adjoint();
    rho /= rho.trace().real();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return qmem::dualrail::TwoModeFockState(rho);
}

/// State confined to at most one photon in total.
inline qmem::dualrail::TwoModeFockState random_single_photon_state(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Matrix<cplx, 6, 3> a = Eigen::Matrix<cplx, 6, 3>::Zero();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a(i, j) = cplx{n(rng), n(rng)};
    Matrix6c rho = a * a.adjoint();
    rho /= rho.trace().real();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return qmem::dualrail::TwoModeFockState(rho);
}

inline double max_abs_diff(const Matrix6c& a, const Matrix6c& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace testsupport
