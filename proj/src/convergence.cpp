#include "vfkit/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace vfkit {

namespace {

// Augmenting-path search for Kuhn's matching over edges dist[i][j] <= cap.
bool try_augment(std::size_t i, const std::vector<std::vector<double>>& dist, double cap,
                 std::vector<int>& match_b, std::vector<bool>& visited) {
    const std::size_t n = dist.size();
    for (std::size_t j = 0; j < n; ++j) {
        if (visited[j] || dist[i][j] > cap) continue;
        visited[j] = true;
        if (match_b[j] < 0 ||
            try_augment(static_cast<std::size_t>(match_b[j]), dist, cap, match_b, visited)) {
            match_b[j] = static_cast<int>(i);
            return true;
        }
    }
    return false;
}

// True iff a perfect matching exists using only edges with dist <= cap;
// fills the assignment a_i -> perm[i].
bool feasible(const std::vector<std::vector<double>>& dist, double cap,
              std::vector<std::size_t>& perm) {
    const std::size_t n = dist.size();
    std::vector<int> match_b(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<bool> visited(n, false);
        if (!try_augment(i, dist, cap, match_b, visited)) return false;
    }
    perm.assign(n, 0);
    for (std::size_t j = 0; j < n; ++j) perm[static_cast<std::size_t>(match_b[j])] = j;
    return true;
}

}  // namespace

MatchingResult matching_distance(const CVec& a, const CVec& b) {
    if (a.size() != b.size()) throw LengthMismatch("matching_distance: unequal lengths");
    const std::size_t n = a.size();
    MatchingResult out;
    if (n == 0) return out;

    std::vector<std::vector<double>> dist(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) dist[i][j] = std::abs(a[i] - b[j]);

    if (n <= 8) {
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        double best = std::numeric_limits<double>::infinity();
        std::vector<std::size_t> best_perm = perm;
        do {
            double worst = 0.0;
            for (std::size_t i = 0; i < n && worst < best; ++i)
                worst = std::max(worst, dist[i][perm[i]]);
            if (worst < best) {
                best = worst;
                best_perm = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        out.omega = best;
        out.permutation = best_perm;
        return out;
    }

    // Bottleneck matching: binary search over the sorted pairwise distances,
    // feasibility by augmenting paths. Exact since the optimum is attained
    // at one of the candidate distances.
    std::vector<double> cand;
    cand.reserve(n * n);
    for (const auto& row : dist) cand.insert(cand.end(), row.begin(), row.end());
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

    std::size_t lo = 0, hi = cand.size() - 1;
    std::vector<std::size_t> perm;
    if (!feasible(dist, cand[hi], perm))
        throw Error("matching_distance: internal matching failure");
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        std::vector<std::size_t> p;
        if (feasible(dist, cand[mid], p)) {
            hi = mid;
            perm = p;
        } else {
            lo = mid + 1;
        }
    }
    out.omega = cand[hi];
    out.permutation = perm;
    return out;
}

bool check_matching_bound(double omega, int r, double max_abs_varphi) {
    return omega <= static_cast<double>(r) * (2.0 * r - 1.0) * max_abs_varphi + 1e-12;
}

StopDecision stopping_decision(double max_abs_varphi, double mu, double eps, int r) {
    if (!(mu > 0.0)) throw InvalidParam("stopping_decision: mu must be positive");
    return max_abs_varphi <= eps * mu / r ? StopDecision::CONVERGED_BACKWARD
                                          : StopDecision::CONTINUE;
}

double entrywise_change_bound(double omega, double mu) {
    if (mu == 0.0) throw DivByZero("entrywise_change_bound: mu is zero");
    return omega / mu;
}

std::optional<int> detect_period(const std::vector<double>& deltas, int window, double tol) {
    const int len = static_cast<int>(deltas.size());
    if (window > len) throw InvalidParam("detect_period: window exceeds sequence length");
    if (window < 2) return std::nullopt;
    for (int tau = 1; tau <= window / 2; ++tau) {
        bool ok = true;
        for (int k = len - window + tau; k < len; ++k) {
            if (std::abs(deltas[k] - deltas[k - tau]) > tol * (1.0 + std::abs(deltas[k]))) {
                ok = false;
                break;
            }
        }
        if (ok) return tau;
    }
    return std::nullopt;
}

}  // namespace vfkit
