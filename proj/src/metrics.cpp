#include "fidmet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fidmet {

std::string_view metric_name(MetricKind kind) {
    switch (kind) {
        case MetricKind::BuresAngle: return "bures_angle";
        case MetricKind::BuresMetric: return "bures";
        case MetricKind::SineMetric: return "sine";
        case MetricKind::TraceDistance: return "trace";
        case MetricKind::SpectralMetric: return "spectral";
        case MetricKind::PTMetric: return "pt";
        case MetricKind::TMetric: return "tmetric";
    }
    return "unknown";
}

std::optional<MetricKind> parse_metric(std::string_view name) {
    if (name == "bures_angle" || name == "angle") return MetricKind::BuresAngle;
    if (name == "bures") return MetricKind::BuresMetric;
    if (name == "sine") return MetricKind::SineMetric;
    if (name == "trace") return MetricKind::TraceDistance;
    if (name == "spectral") return MetricKind::SpectralMetric;
    if (name == "pt") return MetricKind::PTMetric;
    if (name == "tmetric") return MetricKind::TMetric;
    return std::nullopt;
}

namespace {

void require_same_dim(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim()) {
        std::ostringstream os;
        os << "dimension mismatch: " << rho.dim() << " vs " << sigma.dim();
        throw DimensionError(os.str());
    }
}

} // namespace

double bures_angle(const DensityMatrix& rho, const DensityMatrix& sigma) {
    return std::acos(std::sqrt(fidelity(rho, sigma)));
}

double bures_metric(const DensityMatrix& rho, const DensityMatrix& sigma) {
    return std::sqrt(std::max(0.0, 2.0 - 2.0 * std::sqrt(fidelity(rho, sigma))));
}

double sine_metric(const DensityMatrix& rho, const DensityMatrix& sigma) {
    return std::sqrt(std::max(0.0, 1.0 - fidelity(rho, sigma)));
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
    require_same_dim(rho, sigma);
    const RealVector evals = hermitian_eigenvalues(rho.matrix() - sigma.matrix());
    return 0.5 * evals.cwiseAbs().sum();
}

double e_max(const DensityMatrix& rho, const DensityMatrix& sigma) {
    require_same_dim(rho, sigma);
    return largest_eigenvalue(rho.matrix() - sigma.matrix());
}

double spectral_metric(const DensityMatrix& rho, const DensityMatrix& sigma) {
    require_same_dim(rho, sigma);
    // One decomposition for both eigenvalue extremes of rho - sigma.
    const RealVector evals = hermitian_eigenvalues(rho.matrix() - sigma.matrix());
    return std::max(evals.maxCoeff(), -evals.minCoeff());
}

double pt_metric(const DensityMatrix& rho, const DensityMatrix& sigma) {
    return spectral_metric(rho, sigma);
}

} // namespace fidmet
