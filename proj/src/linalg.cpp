#include "fidmet/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fidmet {

double hermiticity_deviation(const Matrix& m, Eigen::Index* row, Eigen::Index* col) {
    double worst = 0.0;
    Eigen::Index wr = 0, wc = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = i; j < m.cols(); ++j) {
            const double dev = std::abs(m(i, j) - std::conj(m(j, i)));
            if (dev > worst) {
                worst = dev;
                wr = i;
                wc = j;
            }
        }
    }
    if (row) *row = wr;
    if (col) *col = wc;
    return worst;
}

void require_hermitian(const Matrix& m) {
    if (m.rows() != m.cols()) {
        std::ostringstream os;
        os << "matrix is not square: " << m.rows() << "x" << m.cols();
        throw ValidationError(os.str());
    }
    Eigen::Index r = 0, c = 0;
    const double dev = hermiticity_deviation(m, &r, &c);
    if (dev > tol::hermiticity) {
        std::ostringstream os;
        os << "matrix is not Hermitian: |A(" << r << "," << c << ") - conj(A(" << c << "," << r
           << "))| = " << dev << " exceeds " << tol::hermiticity;
        throw ValidationError(os.str());
    }
}

namespace {

// Deterministic eigenvector phases: first component of significant
// magnitude made real positive.
void normalize_phases(Matrix& vectors) {
    for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
        for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
            const double mag = std::abs(vectors(i, k));
            if (mag > 1e-12) {
                vectors.col(k) *= std::conj(vectors(i, k)) / mag;
                break;
            }
        }
    }
}

} // namespace

EigenSystem hermitian_eig(const Matrix& h) {
    require_hermitian(h);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    EigenSystem sys{solver.eigenvalues(), solver.eigenvectors()};
    normalize_phases(sys.eigenvectors);
    return sys;
}

RealVector hermitian_eigenvalues(const Matrix& h) {
    require_hermitian(h);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

Matrix psd_sqrt(const Matrix& a) {
    EigenSystem sys = hermitian_eig(a);
    const double lambda_min = sys.eigenvalues.minCoeff();
    if (lambda_min < -tol::psd_clamp) {
        std::ostringstream os;
        os << "matrix is not PSD: most negative eigenvalue " << lambda_min << " is below -"
           << tol::psd_clamp;
        throw ValidationError(os.str());
    }
    // Eigenvalues that are zero in exact arithmetic come back as O(eps)
    // strays; the square root would amplify them to O(sqrt(eps)) junk in the
    // result, so clamp everything below the solver's resolution.
    const double floor = 1e-14 * std::max(0.0, sys.eigenvalues.maxCoeff());
    RealVector roots(sys.eigenvalues.size());
    for (Eigen::Index k = 0; k < roots.size(); ++k) {
        roots[k] = sys.eigenvalues[k] <= floor ? 0.0 : std::sqrt(sys.eigenvalues[k]);
    }
    Matrix r = sys.eigenvectors * roots.asDiagonal() * sys.eigenvectors.adjoint();
    // Kill roundoff asymmetry so downstream hermiticity checks see an exact
    // Hermitian matrix.
    r = ((r + r.adjoint()) * 0.5).eval();
    return r;
}

double largest_eigenvalue(const Matrix& h) {
    return hermitian_eigenvalues(h).maxCoeff();
}

namespace detail {

void small_hermitian_eigenvalues(const Complex* a, int n, double* evals) {
    // Work on a local copy; n <= 8.
    Complex m[64];
    std::copy(a, a + n * n, m);
    auto at = [&](int i, int j) -> Complex& { return m[i * n + j]; };

    const int max_sweeps = 30;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        double diag = 0.0;
        for (int i = 0; i < n; ++i) {
            diag += std::abs(at(i, i).real());
            for (int j = i + 1; j < n; ++j) off += std::norm(at(i, j));
        }
        if (off <= 1e-30 * (diag * diag + 1e-300)) break;

        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const Complex apq = at(p, q);
                const double mag = std::abs(apq);
                if (mag < 1e-300) continue;
                // Diagonal unitary: make the (p,q) entry real.
                const Complex phase_conj = std::conj(apq) / mag;
                for (int i = 0; i < n; ++i) at(i, q) *= phase_conj;
                for (int i = 0; i < n; ++i) at(q, i) *= std::conj(phase_conj);
                // Real Jacobi rotation annihilating the now-real (p,q) entry.
                const double app = at(p, p).real();
                const double aqq = at(q, q).real();
                const double tau = (aqq - app) / (2.0 * mag);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (int i = 0; i < n; ++i) {
                    const Complex aip = at(i, p);
                    const Complex aiq = at(i, q);
                    at(i, p) = c * aip - s * aiq;
                    at(i, q) = s * aip + c * aiq;
                }
                for (int i = 0; i < n; ++i) {
                    const Complex api = at(p, i);
                    const Complex aqi = at(q, i);
                    at(p, i) = c * api - s * aqi;
                    at(q, i) = s * api + c * aqi;
                }
            }
        }
    }

    for (int i = 0; i < n; ++i) evals[i] = at(i, i).real();
    std::sort(evals, evals + n);
}

} // namespace detail

} // namespace fidmet
