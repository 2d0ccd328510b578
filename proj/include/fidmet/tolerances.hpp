#pragma once

// Numeric tolerances shared by the library, the experiment harness and the
// test suites. Keeping them in one place guarantees that a bound checked in
// production code is the same bound the tests assert against.

namespace fidmet::tol {

// Matrix / state invariants.
inline constexpr double hermiticity = 1e-10;   // max |A(i,j) - conj(A(j,i))|
inline constexpr double psd_clamp = 1e-10;     // eigenvalues in [-psd_clamp, 0) clamp to 0
inline constexpr double reconstruction = 1e-8; // sum_k lambda_k v_k v_k^dag vs original
inline constexpr double unit_trace = 1e-10;    // |tr(rho) - 1|
inline constexpr double pure_norm = 1e-12;     // | ||psi||^2 - 1 |
inline constexpr double bloch_ball = 1e-12;    // |u| <= 1 + bloch_ball

// Channels.
inline constexpr double kraus_completeness = 1e-9; // max entry of sum K^dag K - I
inline constexpr double channel_trace = 1e-9;      // trace preservation after apply()

// Harness check tolerances. Closed-form metrics are exact up to roundoff;
// the optimizer-backed T-metric only ever under-estimates the true maximum,
// so its checks get one-sided slack.
inline constexpr double closed_form_check = 1e-9;
inline constexpr double optimizer_check = 2e-6;
inline constexpr double optimizer_channel_check = 5e-6;
inline constexpr double joint_convexity_sq_check = 1e-8;
inline constexpr double contractivity_closed_check = 1e-8;
inline constexpr double upper_bound_guard = 1e-8; // gap >= -upper_bound_guard

} // namespace fidmet::tol
