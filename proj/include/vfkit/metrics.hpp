#pragma once

#include <Eigen/Dense>
#include <functional>

#include "vfkit/quadrature.hpp"
#include "vfkit/systems.hpp"
#include "vfkit/types.hpp"

namespace vfkit {

using EvalFn = std::function<Complex(Complex)>;

/// sqrt(discrete H2 error^2) / sqrt(H2 norm^2 estimate) at the grid nodes.
double relative_h2_error(const SampleSet& reference, const PoleResidueModel& model,
                         const QuadGrid& grid);

/// Oracle variant: evaluates the realization at the grid nodes, M+ = CB.
double relative_h2_error(const StateSpaceModel& reference, const PoleResidueModel& model,
                         const QuadGrid& grid);

struct HinfEstimate {
    double value = 0.0;     // max |H(iw) - H_r(iw)|
    double omega = 0.0;     // frequency attaining the max
    double ref_max = 0.0;   // normalizer max |H(iw)| over the grid
};

/// Dense-grid sup-error estimate, refined by golden-section search around the
/// discrete argmax.
HinfEstimate hinf_estimate(const EvalFn& reference, const PoleResidueModel& model,
                           const std::vector<double>& omegas);

/// Data-only variant: evaluated at the sample points, no refinement.
HinfEstimate hinf_estimate(const SampleSet& reference, const PoleResidueModel& model);

/// Discrete Sobolev error sqrt(sum W0_i^2 |dH_i|^2 + sum W1_i^2 |dH'_i|^2),
/// with the model derivative evaluated exactly.
double sobolev_error(const SampleSet& reference, const PoleResidueModel& model,
                     const Eigen::VectorXd& W0, const Eigen::VectorXd& W1);

/// 2000 log-spaced points over [w_lo/10, 10*w_hi] plus w = 0.
std::vector<double> default_hinf_grid(double w_lo, double w_hi);

}  // namespace vfkit
