#include "fidmet/states.hpp"

#include <cmath>
#include <sstream>

namespace fidmet {

std::vector<StateViolation> state_violations(const Matrix& m) {
    std::vector<StateViolation> out;
    if (m.rows() != m.cols() || m.rows() < 1) {
        std::ostringstream os;
        os << "not a square matrix: " << m.rows() << "x" << m.cols();
        out.push_back({StateViolation::Kind::NotSquare, 0.0, os.str()});
        return out;
    }
    Eigen::Index r = 0, c = 0;
    const double herm = hermiticity_deviation(m, &r, &c);
    if (herm > tol::hermiticity) {
        std::ostringstream os;
        os << "not Hermitian: entry pair (" << r << "," << c << ") deviates by " << herm;
        out.push_back({StateViolation::Kind::NotHermitian, herm, os.str()});
    }
    const double trace_dev = std::abs(m.trace() - Complex(1.0, 0.0));
    if (trace_dev > tol::unit_trace) {
        std::ostringstream os;
        os << "trace is " << m.trace().real() << " (deviation " << trace_dev << ")";
        out.push_back({StateViolation::Kind::Trace, trace_dev, os.str()});
    }
    // PSD check on the Hermitian part, so a diagnostic is still produced when
    // hermiticity already failed.
    const Matrix herm_part = (m + m.adjoint()) * 0.5;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(herm_part, Eigen::EigenvaluesOnly);
    const double lambda_min = solver.eigenvalues().minCoeff();
    if (lambda_min < -tol::psd_clamp) {
        std::ostringstream os;
        os << "not PSD: most negative eigenvalue " << lambda_min;
        out.push_back({StateViolation::Kind::NotPsd, -lambda_min, os.str()});
    }
    return out;
}

DensityMatrix DensityMatrix::validated(Matrix m) {
    const auto violations = state_violations(m);
    if (!violations.empty()) {
        std::ostringstream os;
        os << "invalid density matrix:";
        for (const auto& v : violations) os << "\n  - " << v.detail;
        throw ValidationError(os.str());
    }
    return DensityMatrix(std::move(m));
}

DensityMatrix validate(const Matrix& m) { return DensityMatrix::validated(m); }

PureState PureState::validated(Vector v) {
    if (v.size() < 1) throw ValidationError("empty amplitude vector");
    const double norm_dev = std::abs(v.squaredNorm() - 1.0);
    if (norm_dev > tol::pure_norm) {
        std::ostringstream os;
        os << "pure state is not normalized: squared norm deviates by " << norm_dev;
        throw ValidationError(os.str());
    }
    return PureState(std::move(v));
}

BlochVector::BlochVector(double u1, double u2, double u3) : BlochVector(Eigen::Vector3d(u1, u2, u3)) {}

BlochVector::BlochVector(const Eigen::Vector3d& u) : u_(u) {
    if (u_.norm() > 1.0 + tol::bloch_ball) {
        std::ostringstream os;
        os << "Bloch vector outside the unit ball: |u| = " << u_.norm();
        throw ValidationError(os.str());
    }
}

const Matrix& pauli(int k) {
    static const Matrix sx = [] {
        Matrix m(2, 2);
        m << 0, 1, 1, 0;
        return m;
    }();
    static const Matrix sy = [] {
        Matrix m(2, 2);
        m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
        return m;
    }();
    static const Matrix sz = [] {
        Matrix m(2, 2);
        m << 1, 0, 0, -1;
        return m;
    }();
    switch (k) {
        case 1: return sx;
        case 2: return sy;
        case 3: return sz;
        default: throw DimensionError("Pauli index must be 1, 2 or 3");
    }
}

DensityMatrix from_bloch(const BlochVector& u) {
    Matrix m = Matrix::Identity(2, 2);
    for (int k = 1; k <= 3; ++k) m += u[k - 1] * pauli(k);
    m *= 0.5;
    return DensityMatrix::trusted(std::move(m));
}

BlochVector to_bloch(const DensityMatrix& rho) {
    if (rho.dim() != 2) {
        std::ostringstream os;
        os << "Bloch representation requires a qubit state, got dim " << rho.dim();
        throw DimensionError(os.str());
    }
    Eigen::Vector3d u;
    for (int k = 1; k <= 3; ++k) u[k - 1] = (rho.matrix() * pauli(k)).trace().real();
    // Roundoff can push a pure state marginally outside the ball.
    const double n = u.norm();
    if (n > 1.0 && n <= 1.0 + tol::bloch_ball) u *= 1.0 / n;
    return BlochVector(u);
}

DensityMatrix purify_projector(const PureState& psi) {
    Matrix m = psi.amplitudes() * psi.amplitudes().adjoint();
    return DensityMatrix::trusted(std::move(m));
}

PureState random_pure(Eigen::Index d, RngStream& rng) {
    if (d < 2) throw DimensionError("dimension must be at least 2");
    Vector v(d);
    for (Eigen::Index i = 0; i < d; ++i) v[i] = rng.normal_complex();
    v /= v.norm();
    return PureState::trusted(std::move(v));
}

DensityMatrix random_density(Eigen::Index d, RngStream& rng) {
    if (d < 2) throw DimensionError("dimension must be at least 2");
    Matrix g(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) g(i, j) = rng.normal_complex();
    Matrix m = g * g.adjoint();
    m /= m.trace().real();
    m = ((m + m.adjoint()) * 0.5).eval();
    return DensityMatrix::trusted(std::move(m));
}

} // namespace fidmet
