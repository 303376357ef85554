#pragma once

#include <optional>

#include "vfkit/types.hpp"

namespace vfkit {

/// Per-iteration diagnostics recorded by the fitting driver.
struct IterationRecord {
    CVec lambda;              // nodes the step was assembled at
    CVec lambda_relocated;    // zeros of the denominator, before mirroring
    double max_abs_varphi = 0.0;
    double mu = 0.0;          // min_{i,j} |xi_i - lambda_j|
    double omega = 0.0;       // matching distance lambda -> lambda_relocated
    double delta = 0.0;       // relative pole change vs previous step
    double residual = 0.0;    // weighted LS residual of the step
    int mirrored = 0;
};

struct MatchingResult {
    double omega = 0.0;
    std::vector<std::size_t> permutation;  // a[j] is matched to b[permutation[j]]
};

/// Optimal matching distance min_sigma max_j |a_j - b_sigma(j)|, exact:
/// enumeration for r <= 8, bottleneck bipartite matching above.
MatchingResult matching_distance(const CVec& a, const CVec& b);

/// The a priori bound Omega_k <= r(2r-1) max_j |varphi_j|.
bool check_matching_bound(double omega, int r, double max_abs_varphi);

enum class StopDecision { CONTINUE, CONVERGED_BACKWARD };

/// Backward-error stopping: converged once max|varphi_j| <= eps * mu / r.
StopDecision stopping_decision(double max_abs_varphi, double mu, double eps, int r);

/// Guaranteed bound Omega/mu on the elementwise relative change of the
/// Cauchy matrix entries between consecutive node sets.
double entrywise_change_bound(double omega, double mu);

/// Smallest period tau in [1, window/2] such that |d_k - d_{k-tau}| <=
/// tol*(1+|d_k|) over the trailing window; nullopt when none qualifies.
std::optional<int> detect_period(const std::vector<double>& deltas, int window, double tol);

}  // namespace vfkit
