#include "fidmet/channels.hpp"

#include <cmath>
#include <sstream>

namespace fidmet {

KrausChannel KrausChannel::validated(std::vector<Matrix> ops) {
    if (ops.empty()) throw ValidationError("a channel needs at least one Kraus operator");
    const Eigen::Index rows = ops.front().rows();
    const Eigen::Index cols = ops.front().cols();
    if (rows < 1 || cols < 1) throw ValidationError("Kraus operators must be non-empty");
    for (std::size_t i = 0; i < ops.size(); ++i) {
        if (ops[i].rows() != rows || ops[i].cols() != cols) {
            std::ostringstream os;
            os << "Kraus operator " << i << " has shape " << ops[i].rows() << "x" << ops[i].cols()
               << ", expected " << rows << "x" << cols;
            throw ValidationError(os.str());
        }
    }
    Matrix sum = Matrix::Zero(cols, cols);
    for (const auto& k : ops) sum += k.adjoint() * k;
    const double dev = (sum - Matrix::Identity(cols, cols)).cwiseAbs().maxCoeff();
    if (dev > tol::kraus_completeness) {
        std::ostringstream os;
        os << "Kraus family is not trace preserving: max |sum K^dag K - I| = " << dev;
        throw ValidationError(os.str());
    }
    return KrausChannel(std::move(ops));
}

DensityMatrix apply(const KrausChannel& phi, const DensityMatrix& rho) {
    if (rho.dim() != phi.dim_in()) {
        std::ostringstream os;
        os << "state dimension " << rho.dim() << " does not match channel input dimension "
           << phi.dim_in();
        throw DimensionError(os.str());
    }
    Matrix out = Matrix::Zero(phi.dim_out(), phi.dim_out());
    for (const auto& k : phi.kraus()) out += k * rho.matrix() * k.adjoint();
    out = ((out + out.adjoint()) * 0.5).eval();
    const double trace_dev = std::abs(out.trace().real() - 1.0);
    if (trace_dev > tol::channel_trace) {
        std::ostringstream os;
        os << "channel output trace deviates by " << trace_dev;
        throw ValidationError(os.str());
    }
    out /= out.trace().real();
    return DensityMatrix::validated(std::move(out));
}

KrausChannel random_channel(Eigen::Index d, Eigen::Index env_dim, RngStream& rng) {
    if (d < 2) throw DimensionError("dimension must be at least 2");
    if (env_dim < 1) throw DimensionError("environment dimension must be at least 1");
    // Haar isometry: QR of a Ginibre matrix with the R-diagonal phases folded
    // back into Q.
    const Eigen::Index rows = d * env_dim;
    Matrix g(rows, d);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < d; ++j) g(i, j) = rng.normal_complex();
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(rows, d);
    const Matrix r = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < d; ++j) {
        const Complex rj = r(j, j);
        const double mag = std::abs(rj);
        if (mag > 0.0) q.col(j) *= rj / mag;
    }
    std::vector<Matrix> ops;
    ops.reserve(static_cast<std::size_t>(env_dim));
    for (Eigen::Index e = 0; e < env_dim; ++e) ops.push_back(q.middleRows(e * d, d));
    return KrausChannel::validated(std::move(ops));
}

KrausChannel depolarizing(Eigen::Index d, double p) {
    if (d < 2) throw DimensionError("dimension must be at least 2");
    if (p < 0.0 || p > 1.0) throw ValidationError("depolarizing probability must be in [0, 1]");
    // Generalized Pauli (shift/clock) conjugations: the uniform mixture over
    // all d^2 of them is the completely depolarizing map.
    Matrix shift = Matrix::Zero(d, d);
    for (Eigen::Index j = 0; j < d; ++j) shift((j + 1) % d, j) = 1.0;
    Matrix clock = Matrix::Zero(d, d);
    const double angle = 2.0 * M_PI / static_cast<double>(d);
    for (Eigen::Index j = 0; j < d; ++j) clock(j, j) = std::polar(1.0, angle * static_cast<double>(j));

    const double dd = static_cast<double>(d * d);
    std::vector<Matrix> ops;
    ops.reserve(static_cast<std::size_t>(d * d));
    Matrix xa = Matrix::Identity(d, d);
    for (Eigen::Index a = 0; a < d; ++a) {
        Matrix u = xa;
        for (Eigen::Index b = 0; b < d; ++b) {
            const double weight = (a == 0 && b == 0) ? 1.0 - p + p / dd : p / dd;
            ops.push_back(std::sqrt(weight) * u);
            u = (u * clock).eval();
        }
        xa = (shift * xa).eval();
    }
    return KrausChannel::validated(std::move(ops));
}

} // namespace fidmet
