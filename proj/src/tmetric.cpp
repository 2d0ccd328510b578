#include "fidmet/tmetric.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace fidmet {

namespace {

void require_same_dim(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim()) {
        std::ostringstream os;
        os << "dimension mismatch: " << rho.dim() << " vs " << sigma.dim();
        throw DimensionError(os.str());
    }
}

// Signed fidelity gap sign * (F(rho,tau) - F(sigma,tau)) over the
// parametrization tau = V V^dag / tr(V V^dag), V complex d x r read from
// 2 d r packed reals. The search runs at r = d (unconstrained); smaller r
// restricts tau to a rank stratum, where the objective is smooth and a
// terminal polish converges tightly. With W = sqrt(rho) V,
//   F(rho, tau) = (sum_i singular_i(W))^2 / tr(V^dag V),
// so each evaluation needs two small products and the eigenvalues of W^dag W.
class GapObjective {
public:
    GapObjective(const Matrix& sqrt_rho, const Matrix& sqrt_sigma, double sign, int rank)
        : d_(static_cast<int>(sqrt_rho.rows())),
          r_(rank),
          sign_(sign),
          sqrt_rho_(sqrt_rho),
          sqrt_sigma_(sqrt_sigma),
          w_(d_, r_),
          gram_(r_, r_),
          evals_(r_) {}

    int params() const { return 2 * d_ * r_; }

    double operator()(const double* x) {
        const Eigen::Map<const Matrix> v(reinterpret_cast<const Complex*>(x), d_, r_);
        double trace_v = 0.0;
        for (int i = 0; i < params(); ++i) trace_v += x[i] * x[i];
        if (trace_v < 1e-18) return -1e100;
        const double f_rho = nuclear_sq(sqrt_rho_, v) / trace_v;
        const double f_sigma = nuclear_sq(sqrt_sigma_, v) / trace_v;
        return sign_ * (f_rho - f_sigma);
    }

private:
    double nuclear_sq(const Matrix& root, const Eigen::Map<const Matrix>& v) {
        w_.noalias() = root * v;
        if (r_ == 1) return w_.squaredNorm();
        if (r_ == 2) {
            // Two singular values; (s1 + s2)^2 = ||W||_F^2 + 2 s1 s2 with
            // s1^2 s2^2 = det(W^dag W).
            gram_.noalias() = w_.adjoint() * w_;
            const double det = (gram_(0, 0) * gram_(1, 1) - gram_(0, 1) * gram_(1, 0)).real();
            return gram_(0, 0).real() + gram_(1, 1).real() +
                   2.0 * std::sqrt(std::max(0.0, det));
        }
        gram_.noalias() = w_.adjoint() * w_;
        if (r_ == 3) {
            double e0, e1, e2;
            cardano3(gram_, e0, e1, e2);
            const double sum = std::sqrt(std::max(0.0, e0)) + std::sqrt(std::max(0.0, e1)) +
                               std::sqrt(std::max(0.0, e2));
            return sum * sum;
        }
        detail::small_hermitian_eigenvalues(gram_.data(), r_, evals_.data());
        double sum = 0.0;
        for (int i = 0; i < r_; ++i) sum += std::sqrt(std::max(0.0, evals_[i]));
        return sum * sum;
    }

    // Trigonometric roots of the characteristic cubic of a Hermitian 3x3.
    static void cardano3(const Matrix& a, double& e0, double& e1, double& e2) {
        const double m = (a(0, 0).real() + a(1, 1).real() + a(2, 2).real()) / 3.0;
        const double k00 = a(0, 0).real() - m;
        const double k11 = a(1, 1).real() - m;
        const double k22 = a(2, 2).real() - m;
        const Complex k01 = a(0, 1), k02 = a(0, 2), k12 = a(1, 2);
        const double p = (k00 * k00 + k11 * k11 + k22 * k22) / 6.0 +
                         (std::norm(k01) + std::norm(k02) + std::norm(k12)) / 3.0;
        const double det = k00 * (k11 * k22 - std::norm(k12)) -
                           (k01 * (std::conj(k01) * k22 - std::conj(k02) * k12)).real() +
                           (k02 * (std::conj(k01) * std::conj(k12) - std::conj(k02) * k11)).real();
        const double q = det / 2.0;
        const double disc = std::max(0.0, p * p * p - q * q);
        const double phi = std::atan2(std::sqrt(disc), q) / 3.0;
        const double rt = std::sqrt(std::max(0.0, p));
        const double c = std::cos(phi), s = std::sin(phi);
        e0 = m + 2.0 * rt * c;
        e1 = m - rt * (c + 1.7320508075688772 * s);
        e2 = m - rt * (c - 1.7320508075688772 * s);
    }

    int d_;
    int r_;
    double sign_;
    const Matrix& sqrt_rho_;
    const Matrix& sqrt_sigma_;
    Matrix w_;
    Matrix gram_;
    std::vector<double> evals_;
};

struct NmOutcome {
    double value = -1e100;
    int iterations = 0;
};

// Standard Nelder-Mead ascent on f, starting from x (overwritten with the
// best point found). Stops when the simplex value spread and diameter are
// both inside the tolerances, or the iteration budget runs out.
NmOutcome nelder_mead(GapObjective& f, std::vector<double>& x, double scale, int budget,
                      double value_tol, double step_tol) {
    const int n = f.params();
    std::vector<std::vector<double>> verts(n + 1, x);
    std::vector<double> vals(n + 1);
    for (int i = 0; i < n; ++i) verts[i + 1][i] += scale;
    for (int i = 0; i <= n; ++i) vals[i] = f(verts[i].data());

    std::vector<double> centroid(n), trial(n), trial2(n);
    NmOutcome out;
    for (; out.iterations < budget; ++out.iterations) {
        int best = 0, worst = 0, second = 0;
        for (int i = 1; i <= n; ++i) {
            if (vals[i] > vals[best]) best = i;
            if (vals[i] < vals[worst]) worst = i;
        }
        for (int i = 0; i <= n; ++i)
            if (i != worst && (second == worst || vals[i] < vals[second])) second = i;

        if (vals[best] - vals[worst] <= value_tol) {
            double diam = 0.0;
            for (int i = 0; i <= n; ++i)
                for (int k = 0; k < n; ++k)
                    diam = std::max(diam, std::abs(verts[i][k] - verts[best][k]));
            if (diam <= step_tol) break;
        }

        for (int k = 0; k < n; ++k) {
            double s = 0.0;
            for (int i = 0; i <= n; ++i)
                if (i != worst) s += verts[i][k];
            centroid[k] = s / n;
        }

        // Reflection.
        for (int k = 0; k < n; ++k) trial[k] = centroid[k] + (centroid[k] - verts[worst][k]);
        const double f_ref = f(trial.data());
        if (f_ref > vals[best]) {
            // Expansion.
            for (int k = 0; k < n; ++k) trial2[k] = centroid[k] + 2.0 * (centroid[k] - verts[worst][k]);
            const double f_exp = f(trial2.data());
            if (f_exp > f_ref) {
                verts[worst] = trial2;
                vals[worst] = f_exp;
            } else {
                verts[worst] = trial;
                vals[worst] = f_ref;
            }
        } else if (f_ref > vals[second]) {
            verts[worst] = trial;
            vals[worst] = f_ref;
        } else {
            // Contraction, outside or inside.
            const bool outside = f_ref > vals[worst];
            const double* toward = outside ? trial.data() : verts[worst].data();
            for (int k = 0; k < n; ++k) trial2[k] = centroid[k] + 0.5 * (toward[k] - centroid[k]);
            const double f_con = f(trial2.data());
            if (f_con > (outside ? f_ref : vals[worst])) {
                verts[worst] = trial2;
                vals[worst] = f_con;
            } else {
                // Shrink toward the best vertex.
                for (int i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    for (int k = 0; k < n; ++k)
                        verts[i][k] = verts[best][k] + 0.5 * (verts[i][k] - verts[best][k]);
                    vals[i] = f(verts[i].data());
                }
            }
        }
    }

    int best = 0;
    for (int i = 1; i <= n; ++i)
        if (vals[i] > vals[best]) best = i;
    x = verts[best];
    out.value = vals[best];
    return out;
}

// Nelder-Mead restarted with progressively smaller simplices around its own
// best point, which localizes the maximizer far more tightly than a single
// pass.
NmOutcome staged_search(GapObjective& f, std::vector<double>& x, const double* scales,
                        int rounds, int budget_total, const OptimizerConfig& cfg) {
    NmOutcome total;
    double prev = -1e100;
    for (int r = 0; r < rounds; ++r) {
        const int budget = budget_total / rounds;
        if (budget <= 0) break;
        const NmOutcome round =
            nelder_mead(f, x, scales[r], budget, cfg.value_tolerance, cfg.step_tolerance);
        total.iterations += round.iterations;
        total.value = round.value;
        if (r > 0 && round.value - prev < cfg.value_tolerance * 0.1 && r >= 2) break;
        prev = round.value;
    }
    return total;
}

Matrix tau_from_params(const std::vector<double>& x, int d, int r) {
    const Eigen::Map<const Matrix> v(reinterpret_cast<const Complex*>(x.data()), d, r);
    Matrix tau = v * v.adjoint();
    const double tr = tau.trace().real();
    tau /= tr;
    tau = ((tau + tau.adjoint()) * 0.5).eval();
    return tau;
}

std::vector<double> params_from_column(const Vector& psi, int d) {
    std::vector<double> x(2 * d * d, 0.0);
    for (int i = 0; i < d; ++i) {
        x[2 * i] = psi[i].real();
        x[2 * i + 1] = psi[i].imag();
    }
    return x;
}

std::vector<double> random_mixed_params(int d, RngStream& rng) {
    std::vector<double> x(2 * d * d);
    for (auto& e : x) e = rng.normal();
    return x;
}

} // namespace

double t_metric_qubit(const BlochVector& u, const BlochVector& v) {
    // sqrt(1 - F) in the cancellation-free form sqrt(a^2 + b^2) / 2 with
    // a = |u - v| and b = sqrt(1 - |u|^2) - sqrt(1 - |v|^2).
    const double a = (u.vec() - v.vec()).norm();
    const double b = std::sqrt(std::max(0.0, 1.0 - u.vec().squaredNorm())) -
                     std::sqrt(std::max(0.0, 1.0 - v.vec().squaredNorm()));
    return 0.5 * std::sqrt(a * a + b * b);
}

BlochVector optimal_tau_qubit(const BlochVector& u, const BlochVector& v) {
    const Eigen::Vector3d diff = u.vec() - v.vec();
    const double a = diff.norm();
    if (a == 0.0) throw ValidationError("optimal state direction undefined for u = v");
    const double b = std::sqrt(std::max(0.0, 1.0 - u.vec().squaredNorm())) -
                     std::sqrt(std::max(0.0, 1.0 - v.vec().squaredNorm()));
    // Maximizing (a x + |b| sqrt(1 - x^2)) / 2 over the magnitude x gives
    // x = a / sqrt(a^2 + b^2) = |u - v| / (2 sqrt(1 - F)). The gap is
    // largest with w aligned to u - v when b >= 0 and anti-aligned when
    // b < 0.
    const double magnitude = a / std::sqrt(a * a + b * b);
    const double orientation = b < 0.0 ? -1.0 : 1.0;
    return BlochVector(Eigen::Vector3d(orientation * (magnitude / a) * diff));
}

OptResult t_metric_numeric(const DensityMatrix& rho, const DensityMatrix& sigma,
                           const OptimizerConfig& cfg) {
    require_same_dim(rho, sigma);
    if (cfg.restarts < 1 || cfg.max_iterations < 1 || cfg.step_tolerance <= 0.0 ||
        cfg.value_tolerance <= 0.0) {
        throw ValidationError("optimizer config fields must be positive");
    }
    const int d = static_cast<int>(rho.dim());

    const Matrix delta = rho.matrix() - sigma.matrix();
    if (delta.cwiseAbs().maxCoeff() == 0.0) {
        return {0.0, rho, true, 0, cfg.restarts};
    }

    const Matrix sqrt_rho = psd_sqrt(rho.matrix());
    const Matrix sqrt_sigma = psd_sqrt(sigma.matrix());

    // Accurate objective used to score each restart's candidate; the fast
    // in-loop path drives the search only.
    auto accurate_gap = [&](const Matrix& tau) {
        const Matrix sqrt_tau = psd_sqrt(tau);
        const double f_rho = std::clamp(detail::fidelity_from_sqrts(sqrt_rho, sqrt_tau), 0.0, 1.0);
        const double f_sigma =
            std::clamp(detail::fidelity_from_sqrts(sqrt_sigma, sqrt_tau), 0.0, 1.0);
        return std::abs(f_rho - f_sigma);
    };

    // Branch-specific informed starts: the top eigenvectors of +-(rho-sigma)
    // are the exact pure-state maximizers of the signed gaps, so the result
    // can never fall below the PT-metric.
    const EigenSystem delta_eig = hermitian_eig(delta);
    const Vector top_plus = delta_eig.eigenvectors.col(d - 1);
    const Vector top_minus = delta_eig.eigenvectors.col(0);

    RngStream root(cfg.seed);

    // One branch of one restart: a staged full-rank search, then a polish
    // restricted to the rank stratum the candidate landed on. The maximizer
    // often sits on a rank-deficient stratum where the unrestricted
    // objective has an absolute-value crease; restricted to the stratum it
    // is smooth, so the polish recovers the last few digits cheaply.
    const auto run_branch = [&](double sign, std::vector<double> x, int* iterations) -> Matrix {
        static constexpr double kMainScales[] = {0.25, 2e-3};
        static constexpr double kPolishScales[] = {1e-3, 1e-6};
        GapObjective obj(sqrt_rho, sqrt_sigma, sign, d);
        const int main_budget = 2 * cfg.max_iterations / 5;
        const NmOutcome main = staged_search(obj, x, kMainScales, 2, main_budget, cfg);
        *iterations += main.iterations;

        Matrix best = tau_from_params(x, d, d);
        double best_inloop = main.value;

        const RealVector evals = hermitian_eigenvalues(best);
        int full_rank = 0;
        for (Eigen::Index i = 0; i < d; ++i)
            if (evals[i] > 1e-4) ++full_rank;
        int polish_budget = cfg.max_iterations - main_budget;
        for (int rank : {full_rank, full_rank - 1}) {
            if (rank < 1 || rank > d) continue;
            const EigenSystem sys = hermitian_eig(best);
            std::vector<double> xp(static_cast<std::size_t>(2 * d * rank));
            for (int c = 0; c < rank; ++c) {
                const double scale = std::sqrt(std::max(0.0, sys.eigenvalues[d - 1 - c]));
                for (int i = 0; i < d; ++i) {
                    const Complex entry = scale * sys.eigenvectors(i, d - 1 - c);
                    xp[static_cast<std::size_t>(2 * (c * d + i))] = entry.real();
                    xp[static_cast<std::size_t>(2 * (c * d + i) + 1)] = entry.imag();
                }
            }
            GapObjective restricted(sqrt_rho, sqrt_sigma, sign, rank);
            const NmOutcome out =
                staged_search(restricted, xp, kPolishScales, 2, polish_budget / 2, cfg);
            *iterations += out.iterations;
            if (out.value > best_inloop) {
                best_inloop = out.value;
                best = tau_from_params(xp, d, rank);
            }
        }
        return best;
    };

    std::vector<double> restart_values(cfg.restarts);
    double best_value = -1.0;
    Matrix best_tau;
    int total_iterations = 0;

    for (int r = 0; r < cfg.restarts; ++r) {
        RngStream stream = root.child(static_cast<std::uint64_t>(r));
        double restart_best = -1.0;
        Matrix restart_tau;
        for (int branch = 0; branch < 2; ++branch) {
            const double sign = branch == 0 ? 1.0 : -1.0;
            std::vector<double> x;
            if (r == 0) {
                x = params_from_column(branch == 0 ? top_plus : top_minus, d);
            } else if (r % 2 == 1) {
                RngStream s = stream.child(branch);
                x = params_from_column(random_pure(d, s).amplitudes(), d);
            } else {
                RngStream s = stream.child(branch);
                x = random_mixed_params(d, s);
            }
            const Matrix tau = run_branch(sign, std::move(x), &total_iterations);
            const double value = accurate_gap(tau);
            if (value > restart_best) {
                restart_best = value;
                restart_tau = tau;
            }
        }
        restart_values[r] = restart_best;
        if (restart_best > best_value) {
            best_value = restart_best;
            best_tau = restart_tau;
        }
    }

    int agreeing = 0;
    for (const double v : restart_values)
        if (best_value - v <= cfg.value_tolerance) ++agreeing;

    return {best_value, DensityMatrix::validated(best_tau), 2 * agreeing >= cfg.restarts,
            total_iterations, agreeing};
}

double bures_equivalent_form(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != 2 || sigma.dim() != 2) {
        throw DimensionError("the Bures equivalent form is defined for qubit states");
    }
    const double d_t = t_metric_qubit(to_bloch(rho), to_bloch(sigma));
    // The transform s -> sqrt(1+s) - sqrt(1-s) is monotone on [0,1], so the
    // maximization collapses onto the T-metric value.
    return std::sqrt(1.0 + d_t) - std::sqrt(std::max(0.0, 1.0 - d_t));
}

double upper_bound_gap(const DensityMatrix& rho, const DensityMatrix& sigma,
                       const OptimizerConfig& cfg) {
    const double bound = std::sqrt(std::max(0.0, 1.0 - fidelity(rho, sigma)));
    return bound - t_metric_numeric(rho, sigma, cfg).value;
}

} // namespace fidmet
