#pragma once

#include <cstdint>

#include "fidmet/metrics.hpp"

namespace fidmet {

struct OptimizerConfig {
    int restarts = 16;
    int max_iterations = 2000; // per restart, shared across its local searches
    double step_tolerance = 1e-9;
    double value_tolerance = 1e-10;
    std::uint64_t seed = 0;
};

struct OptResult {
    double value;              // best |F(rho,tau) - F(sigma,tau)| found
    DensityMatrix argmax_state;
    bool converged;            // at least half the restarts agree on the value
    int iterations_used;       // summed over restarts
    int restarts_agreeing;
};

// Qubit closed form (the maximization collapses to the Sine metric):
// D_T = sqrt(1 - F(u, v)).
double t_metric_qubit(const BlochVector& u, const BlochVector& v);

// The Bloch vector of the state attaining the qubit maximum: collinear with
// u - v, magnitude |u - v| / (2 sqrt(1 - F)), oriented so the fidelity gap
// is largest. Requires u != v.
BlochVector optimal_tau_qubit(const BlochVector& u, const BlochVector& v);

// Multi-start derivative-free maximization of |F(rho,tau) - F(sigma,tau)|
// over all density matrices tau, parametrized as tau = V V^dag / tr(V V^dag)
// with V an unconstrained d x d complex matrix. The reported value is the
// objective re-evaluated at the argmax with the production fidelity path, so
// it never exceeds the true maximum by more than roundoff.
OptResult t_metric_numeric(const DensityMatrix& rho, const DensityMatrix& sigma,
                           const OptimizerConfig& cfg = {});

// Qubit-only equivalent form of the Bures metric:
//   max over tau of |sqrt(1 + |dF|) - sqrt(1 - |dF|)|, dF = F(rho,tau) - F(sigma,tau).
// The transform is monotone in |dF|, so it evaluates to
// sqrt(1 + D_T) - sqrt(1 - D_T) and equals B(rho, sigma).
double bures_equivalent_form(const DensityMatrix& rho, const DensityMatrix& sigma);

// sqrt(1 - F(rho, sigma)) - t_metric_numeric(rho, sigma, cfg).value.
// Always >= -tol::upper_bound_guard: the bound is exact and the numeric
// maximizer can only undershoot.
double upper_bound_gap(const DensityMatrix& rho, const DensityMatrix& sigma,
                       const OptimizerConfig& cfg = {});

} // namespace fidmet
