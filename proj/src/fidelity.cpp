#include "fidmet/fidelity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fidmet {

namespace {

void require_same_dim(Eigen::Index a, Eigen::Index b) {
    if (a != b) {
        std::ostringstream os;
        os << "dimension mismatch: " << a << " vs " << b;
        throw DimensionError(os.str());
    }
}

} // namespace

namespace detail {

double fidelity_from_sqrts(const Matrix& rho_sqrt, const Matrix& sigma_sqrt) {
    // tr sqrt(sqrt(rho) sigma sqrt(rho)) equals the nuclear norm of
    // sqrt(rho) sqrt(sigma); singular values keep full absolute accuracy at
    // rank deficiency, where eigenvalues of the formed product would pick up
    // O(sqrt(eps)) noise under the square root.
    const Matrix x = rho_sqrt * sigma_sqrt;
    Eigen::JacobiSVD<Matrix> svd(x);
    const double root_sum = svd.singularValues().sum();
    return root_sum * root_sum;
}

} // namespace detail

FidelityResult fidelity_detailed(const DensityMatrix& rho, const DensityMatrix& sigma) {
    require_same_dim(rho.dim(), sigma.dim());
    const Matrix rho_sqrt = psd_sqrt(rho.matrix());
    const Matrix sigma_sqrt = psd_sqrt(sigma.matrix());
    const double raw = detail::fidelity_from_sqrts(rho_sqrt, sigma_sqrt);
    return {std::clamp(raw, 0.0, 1.0), raw};
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
    return fidelity_detailed(rho, sigma).value;
}

double fidelity_pure(const DensityMatrix& rho, const PureState& tau) {
    require_same_dim(rho.dim(), tau.dim());
    const Complex val = tau.amplitudes().adjoint() * rho.matrix() * tau.amplitudes();
    return val.real();
}

double fidelity_qubit(const BlochVector& u, const BlochVector& v) {
    // |u| can exceed 1 by up to the ball tolerance; clamp the radicands.
    const double cu = std::sqrt(std::max(0.0, 1.0 - u.vec().squaredNorm()));
    const double cv = std::sqrt(std::max(0.0, 1.0 - v.vec().squaredNorm()));
    const double f = 0.5 * (1.0 + u.vec().dot(v.vec()) + cu * cv);
    return std::clamp(f, 0.0, 1.0);
}

} // namespace fidmet
