#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>

#include "vfkit/convergence.hpp"
#include "vfkit/quadrature.hpp"
#include "vfkit/types.hpp"

namespace vfkit {

enum class Variant { SK_POLY, SK_BARY, VF, QUADVF, SOBVF };
enum class Solver { WLS, REGULARIZED, TLS, MIXED_LS_TLS };
enum class FitStatus { CONVERGED, PERIODIC, MAX_ITERS, DEGENERATE };

struct FitConfig {
    Variant variant = Variant::VF;
    Solver solver = Solver::WLS;
    int order = 1;
    int max_iters = 100;
    double eps_backward = 1e-10;
    double eta1 = 1e-16;
    double eta2 = std::sqrt(std::numeric_limits<double>::epsilon());
    std::optional<CVec> initial_poles{};
    std::optional<QuadGrid> grid{};
    int period_window = 20;
    double period_tol = 1e-8;
};

struct FitResult {
    PoleResidueModel model;
    int iterations = 0;
    FitStatus status = FitStatus::MAX_ITERS;
    int period = 0;  // tau when status == PERIODIC
    std::vector<IterationRecord> history;
    double relative_ls_residual = 0.0;
};

/// Assembled linearized system A x = h with row weights W. The first r
/// columns multiply the numerator residues phi, the last r the denominator
/// residues varphi. With a grid, rows follow the node order, a final
/// (1..1 0..0 | M+[H]) moment row is appended and W carries the quadrature
/// weights; otherwise W comes from the sample sigmas (or is identity).
struct CauchySystem {
    Eigen::MatrixXcd A;
    Eigen::VectorXcd h;
    Eigen::VectorXd W;
    Eigen::Index r = 0;
    bool moment_row = false;
};

CauchySystem assemble_cauchy_system(const SampleSet& samples, const CVec& lambda,
                                    const QuadGrid* grid = nullptr);

/// Block system for the Sobolev iteration,
///   [ C        -D C          ] (phi  )   (h )
///   [ -(CoC)   D (CoC) - D'C ] (varphi) = (h'),
/// with D = diag(H(xi)), D' = diag(H'(xi)) and row weights (W0; W1).
CauchySystem assemble_sobolev_system(const SampleSet& samples, const CVec& lambda,
                                     const Eigen::VectorXd& W0, const Eigen::VectorXd& W1);

/// Zeros of d~(s) = 1 + sum varphi_j/(s - lambda_j), computed as the
/// eigenvalues of diag(lambda) - varphi 1^T, Newton-polished and verified
/// against d~ directly. Restores exact conjugate pairing when the inputs are
/// conjugate-closed. Throws DegenerateDenominator when fewer than r zeros
/// pass verification.
CVec relocate_poles(const BarycentricState& state);

struct MirrorResult {
    CVec lambda;
    std::vector<std::size_t> flipped;
};

/// Reflects right-half-plane poles across the imaginary axis (real part
/// flipped, imaginary part kept); poles on the axis are nudged left.
MirrorResult mirror_unstable(const CVec& lambda_next);

/// Denominator residues beta_j such that d^(s) = 1 + sum beta_j/(s - lhat_j)
/// has its zeros exactly at the pre-mirror poles -lhat_j. |d^(iw)| = 1: the
/// implied rescaling is unitary, so mirroring does not change the LS problem.
CVec mirrored_denominator_residues(const CVec& lambda_hat_flipped);

struct VfStep {
    BarycentricState state;
    CVec lambda_next;
    CVec lambda_relocated;  // before mirroring
    double max_abs_varphi = 0.0;
    double mu = 0.0;
    double residual = 0.0;
    int mirrored = 0;
};

/// One iteration: assemble at lambda_current (quadrature-weighted for
/// QUADVF, Sobolev blocks for SOBVF), realify when the data permits, solve
/// with the configured solver, relocate the poles and mirror unstable ones.
VfStep vf_step(const SampleSet& samples, const CVec& lambda_current, const FitConfig& config);

/// Residue identification at fixed stable poles: value rows for VF (plus the
/// moment row for QUADVF), stacked value/derivative rows for SOBVF.
PoleResidueModel identify_residues(const SampleSet& samples, const CVec& lambda,
                                   const FitConfig& config);

/// Relative residual ||W(A phi - h)||/||W h|| of the residue system at the
/// model's own poles and residues.
double residue_relative_residual(const SampleSet& samples, const PoleResidueModel& model,
                                 const FitConfig& config);

FitResult fit(const SampleSet& samples, const FitConfig& config);

struct SkPolyResult {
    Eigen::VectorXcd alpha;  // numerator coefficients, degree 0..r-1
    Eigen::VectorXcd beta;   // denominator coefficients of s^1..s^r (constant term 1)
    std::vector<double> residuals;  // weighted relative residual per iteration
    int iterations = 0;
};

/// SK iteration in the monomial basis with Delta^(k) = diag(1/|d^(k)(xi_i)|),
/// d^(0) = 1 (the first step is Levy's linearization). Vandermonde
/// conditioning limits this to moderate r.
SkPolyResult sk_fit_polynomial(const SampleSet& samples, int r, int max_iters);

/// Default initial poles: lightly damped conjugate pairs log-spaced over the
/// sampled band, plus one real pole when r is odd.
CVec default_initial_poles(const SampleSet& samples, int r);

}  // namespace vfkit
