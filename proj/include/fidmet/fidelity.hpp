#pragma once

#include "fidmet/states.hpp"

namespace fidmet {

struct FidelityResult {
    double value;    // clamped to [0, 1]
    double preclamp; // raw (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 before clamping
};

// Uhlmann fidelity F(rho, sigma) = (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);
FidelityResult fidelity_detailed(const DensityMatrix& rho, const DensityMatrix& sigma);

// Pure-state shortcut F(rho, tau) = tau^dag rho tau.
double fidelity_pure(const DensityMatrix& rho, const PureState& tau);

// Qubit closed form
//   F = [1 + u.v + sqrt(1 - |u|^2) sqrt(1 - |v|^2)] / 2.
double fidelity_qubit(const BlochVector& u, const BlochVector& v);

namespace detail {

// Fidelity given precomputed Hermitian square roots of both states.
double fidelity_from_sqrts(const Matrix& rho_sqrt, const Matrix& sigma_sqrt);

} // namespace detail

} // namespace fidmet
