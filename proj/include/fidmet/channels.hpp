#pragma once

#include <vector>

#include "fidmet/states.hpp"

namespace fidmet {

// CPTP map as a finite Kraus family {K_i} with sum_i K_i^dag K_i = I.
class KrausChannel {
public:
    // Checks shape consistency and completeness within tol::kraus_completeness.
    static KrausChannel validated(std::vector<Matrix> ops);
    static KrausChannel trusted(std::vector<Matrix> ops) { return KrausChannel(std::move(ops)); }

    Eigen::Index dim_in() const { return ops_.front().cols(); }
    Eigen::Index dim_out() const { return ops_.front().rows(); }
    const std::vector<Matrix>& kraus() const { return ops_; }

private:
    explicit KrausChannel(std::vector<Matrix> ops) : ops_(std::move(ops)) {}
    std::vector<Matrix> ops_;
};

// sum_i K_i rho K_i^dag, re-validated (trace preserved within
// tol::channel_trace, PSD within clamp).
DensityMatrix apply(const KrausChannel& phi, const DensityMatrix& rho);

// Stinespring sampling: slice a Haar-random isometry (d * env_dim) x d into
// env_dim Kraus blocks. env_dim = 1 gives a Haar-random unitary channel.
KrausChannel random_channel(Eigen::Index d, Eigen::Index env_dim, RngStream& rng);

// rho -> (1 - p) rho + p I/d via d^2 generalized-Pauli (shift/clock) Kraus
// operators.
KrausChannel depolarizing(Eigen::Index d, double p);

} // namespace fidmet
