#pragma once

#include <complex>

#include <Eigen/Dense>

#include "fidmet/errors.hpp"
#include "fidmet/tolerances.hpp"

namespace fidmet {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Max |A(i,j) - conj(A(j,i))| over all entry pairs. If row/col are given,
// they receive the indices of the worst pair.
double hermiticity_deviation(const Matrix& m, Eigen::Index* row = nullptr,
                             Eigen::Index* col = nullptr);

// Throws ValidationError naming the offending entry pair when m is not
// Hermitian within tol::hermiticity.
void require_hermitian(const Matrix& m);

struct EigenSystem {
    RealVector eigenvalues; // ascending
    Matrix eigenvectors;    // column k pairs with eigenvalues[k]
};

// Full Hermitian eigendecomposition. Eigenvalues ascending; each eigenvector
// is phase-normalized so that its first component of significant magnitude
// is real and positive, which makes the output deterministic for golden
// tests.
EigenSystem hermitian_eig(const Matrix& h);

// Eigenvalues only, ascending.
RealVector hermitian_eigenvalues(const Matrix& h);

// Hermitian PSD square root. Eigenvalues in [-tol::psd_clamp, 0) are clamped
// to zero; anything more negative raises ValidationError reporting the most
// negative eigenvalue.
Matrix psd_sqrt(const Matrix& a);

double largest_eigenvalue(const Matrix& h);

namespace detail {

// Eigenvalues of a small (n <= 8) Hermitian matrix by cyclic Jacobi
// rotations, ascending, written to evals. Allocation-free hot path for the
// optimizer; the general routines above are backed by Eigen.
void small_hermitian_eigenvalues(const Complex* a, int n, double* evals);

} // namespace detail

} // namespace fidmet
