#pragma once

#include <string>
#include <vector>

#include "fidmet/linalg.hpp"
#include "fidmet/rng.hpp"

namespace fidmet {

struct StateViolation {
    enum class Kind { NotSquare, NotHermitian, Trace, NotPsd };
    Kind kind;
    double deviation;
    std::string detail;
};

// All invariant violations of a candidate density matrix, empty when valid.
std::vector<StateViolation> state_violations(const Matrix& m);

// d x d Hermitian, PSD (up to clamp tolerance), unit-trace operator.
class DensityMatrix {
public:
    // Validates every invariant; throws ValidationError listing each
    // violation with its measured deviation.
    static DensityMatrix validated(Matrix m);

    // Caller guarantees the invariants (outputs of library constructions).
    static DensityMatrix trusted(Matrix m) { return DensityMatrix(std::move(m)); }

    Eigen::Index dim() const { return m_.rows(); }
    const Matrix& matrix() const { return m_; }

private:
    explicit DensityMatrix(Matrix m) : m_(std::move(m)) {}
    Matrix m_;
};

// Convenience spelling of DensityMatrix::validated.
DensityMatrix validate(const Matrix& m);

// Unit complex vector.
class PureState {
public:
    static PureState validated(Vector v);
    static PureState trusted(Vector v) { return PureState(std::move(v)); }

    Eigen::Index dim() const { return v_.size(); }
    const Vector& amplitudes() const { return v_; }

private:
    explicit PureState(Vector v) : v_(std::move(v)) {}
    Vector v_;
};

// Real 3-vector with |u| <= 1; |u| = 1 is a pure qubit state.
class BlochVector {
public:
    BlochVector(double u1, double u2, double u3);
    explicit BlochVector(const Eigen::Vector3d& u);

    const Eigen::Vector3d& vec() const { return u_; }
    double norm() const { return u_.norm(); }
    double operator[](int k) const { return u_[k]; }

private:
    Eigen::Vector3d u_;
};

// Pauli matrix sigma_k for k in {1,2,3}.
const Matrix& pauli(int k);

// rho(u) = (I + u . sigma) / 2.
DensityMatrix from_bloch(const BlochVector& u);

// u_k = tr(rho sigma_k); requires dim 2.
BlochVector to_bloch(const DensityMatrix& rho);

// Rank-1 projector psi psi^dag.
DensityMatrix purify_projector(const PureState& psi);

// Haar-distributed pure state: d standard complex Gaussians, normalized.
PureState random_pure(Eigen::Index d, RngStream& rng);

// Hilbert-Schmidt-distributed mixed state: G G^dag / tr(G G^dag) with G a
// d x d standard complex Ginibre matrix.
DensityMatrix random_density(Eigen::Index d, RngStream& rng);

} // namespace fidmet
