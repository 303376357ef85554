#pragma once

#include "vfkit/types.hpp"

namespace vfkit {

/// Nodes and weights of the Boyd/Clenshaw-Curtis rule on the imaginary axis:
///   nodes[j]   = i L cot(j pi/(ell+1)),            j = 1..ell
///   weights[j] = csc(j pi/(ell+1)) sqrt(L pi/(ell+1))
///   rho_plus   = sqrt(pi/(L(ell+1)))
/// rho_plus is the weight of the appended moment row in the fitting systems;
/// it carries both endpoint contributions at once (M+[H] = M-[H] for real
/// systems), so each |M+-| term of the norm estimate uses rho_plus^2/2.
struct QuadGrid {
    CVec nodes;
    std::vector<double> weights;
    double rho_plus = 0.0;
    double L = 0.0;
    int ell = 0;
};

QuadGrid bcc_grid(int ell, double L);

/// Estimate of ||H||^2 = Int |H(iw)|^2 dw from samples at the grid nodes and
/// the endpoint moments m+- = lim_{w->+-inf} iw H(iw).
double h2_norm_sq_estimate(const CVec& values, Complex m_plus, Complex m_minus,
                           const QuadGrid& grid);

/// Finite-frequency surrogate s_max * H(s_max) for M+[H], used only when the
/// caller supplies no moment.
Complex m_plus_estimate(const SampleSet& samples);

/// Moment at infinity of a pole-residue model: M+-[H_r] = sum residues.
Complex model_moment(const PoleResidueModel& model);

/// Squared discrete H2 error between the samples (taken at the grid nodes)
/// and the model, including the endpoint moment terms.
double discrete_h2_error_sq(const SampleSet& samples, const PoleResidueModel& model,
                            const QuadGrid& grid);

/// Maps each grid node to the index of the matching sample (|s - node| <= 1e-12 L).
/// Throws GridMismatch when some node has no matching sample.
std::vector<std::size_t> match_samples_to_grid(const SampleSet& samples, const QuadGrid& grid);

}  // namespace vfkit
