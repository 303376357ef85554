#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>

#include "vfkit/types.hpp"

namespace vfkit {

/// Dense SISO realization H(s) = C (sI - F)^{-1} B with real matrices.
struct StateSpaceModel {
    Eigen::MatrixXd F;  // n x n
    Eigen::VectorXd B;  // n x 1
    Eigen::RowVectorXd C;  // 1 x n

    int n() const { return static_cast<int>(F.rows()); }
    bool is_stable() const;
};

struct SsEval {
    Complex h;
    std::optional<Complex> hp;
};

/// Evaluates H(s) = C(sI-F)^{-1}B and, on request, H'(s) = -C(sI-F)^{-2}B.
/// One factorization of (sI-F) is reused for both solves.
SsEval ss_eval(const StateSpaceModel& ss, Complex s, bool with_deriv = false);

/// M+[H] = M-[H] = C*B for a strictly proper realization.
Complex moment_at_infinity(const StateSpaceModel& ss);

/// Random stable SISO system with conjugate pole pairs log-spaced over the
/// band, light damping, and seeded normal B, C. Deterministic in (n, seed, band).
StateSpaceModel random_stable_siso(int n, std::uint64_t seed, std::array<double, 2> band);

/// Evaluates the system at the given points and adds circular complex
/// Gaussian noise (per-component std = noise_std/sqrt(2)). Noise respects
/// conjugate closure of the point set; per-point streams are derived from
/// (seed, point index) so evaluation order cannot change the output.
SampleSet sample_system(const StateSpaceModel& ss, const CVec& points, double noise_std,
                        std::uint64_t seed, bool with_deriv);

/// Counter-based PRNG (splitmix64 stream over a keyed counter). The exact
/// stream is fixed by this implementation; determinism is the contract.
class CounterRng {
  public:
    explicit CounterRng(std::uint64_t key) : key_(key) {}
    std::uint64_t next_u64();
    double uniform01();                       // in [0,1)
    double uniform(double lo, double hi);
    double normal();                          // standard normal, Box-Muller
  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace vfkit
