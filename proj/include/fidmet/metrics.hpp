#pragma once

#include <optional>
#include <string_view>

#include "fidmet/fidelity.hpp"

namespace fidmet {

enum class MetricKind {
    BuresAngle,
    BuresMetric,
    SineMetric,
    TraceDistance,
    SpectralMetric,
    PTMetric,
    TMetric,
};

std::string_view metric_name(MetricKind kind);
std::optional<MetricKind> parse_metric(std::string_view name);

// A(rho, sigma) = arccos sqrt(F); in [0, pi/2].
double bures_angle(const DensityMatrix& rho, const DensityMatrix& sigma);

// B(rho, sigma) = sqrt(2 - 2 sqrt(F)); in [0, sqrt(2)].
double bures_metric(const DensityMatrix& rho, const DensityMatrix& sigma);

// C(rho, sigma) = sqrt(1 - F); in [0, 1].
double sine_metric(const DensityMatrix& rho, const DensityMatrix& sigma);

// (1/2) sum_k |lambda_k(rho - sigma)|.
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

// E(rho, sigma) = largest eigenvalue of rho - sigma. Order matters:
// E(rho, sigma) != E(sigma, rho) in general, so this is not a metric on its
// own; it equals max over pure tau of tr[tau(rho - sigma)].
double e_max(const DensityMatrix& rho, const DensityMatrix& sigma);

// D_S(rho, sigma) = max(E(rho, sigma), E(sigma, rho)) = max_k |lambda_k|,
// the operator-norm (spectral) metric of rho - sigma.
double spectral_metric(const DensityMatrix& rho, const DensityMatrix& sigma);

// D_PT: max over pure tau of |tr(rho tau) - tr(sigma tau)|. Equals the
// spectral metric, which is how it is computed; sampling maximizers exist
// only as test oracles.
double pt_metric(const DensityMatrix& rho, const DensityMatrix& sigma);

} // namespace fidmet
