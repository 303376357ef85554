#include "vfkit/quadrature.hpp"

#include <cmath>

namespace vfkit {

QuadGrid bcc_grid(int ell, double L) {
    if (ell < 1) throw InvalidParam("bcc_grid: ell must be >= 1");
    if (!(L > 0.0)) throw InvalidParam("bcc_grid: L must be positive");
    QuadGrid g;
    g.ell = ell;
    g.L = L;
    g.nodes.resize(ell);
    g.weights.resize(ell);
    // Fill the upper half and mirror so conjugate symmetry is exact; the
    // middle node of an odd grid is exactly zero (t = pi/2).
    for (int j = 1; 2 * j <= ell; ++j) {
        const double t = j * M_PI / (ell + 1);
        const Complex node(0.0, L * std::cos(t) / std::sin(t));
        const double w = std::sqrt(L * M_PI / (ell + 1)) / std::sin(t);
        g.nodes[j - 1] = node;
        g.weights[j - 1] = w;
        g.nodes[ell - j] = std::conj(node);
        g.weights[ell - j] = w;
    }
    if (ell % 2 == 1) {
        g.nodes[ell / 2] = Complex(0.0, 0.0);
        g.weights[ell / 2] = std::sqrt(L * M_PI / (ell + 1));
    }
    g.rho_plus = std::sqrt(M_PI / (L * (ell + 1)));
    return g;
}

double h2_norm_sq_estimate(const CVec& values, Complex m_plus, Complex m_minus,
                           const QuadGrid& grid) {
    if (values.size() != static_cast<std::size_t>(grid.ell))
        throw LengthMismatch("h2_norm_sq_estimate: values/grid size mismatch");
    double acc = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j)
        acc += grid.weights[j] * grid.weights[j] * std::norm(values[j]);
    acc += 0.5 * grid.rho_plus * grid.rho_plus * (std::norm(m_plus) + std::norm(m_minus));
    return acc;
}

Complex m_plus_estimate(const SampleSet& samples) {
    if (samples.size() == 0) throw EmptySet("m_plus_estimate: no samples");
    std::size_t imax = 0;
    for (std::size_t i = 1; i < samples.size(); ++i)
        if (std::abs(samples[i].s) > std::abs(samples[imax].s)) imax = i;
    return samples[imax].s * samples[imax].value;
}

Complex model_moment(const PoleResidueModel& model) {
    Complex acc = 0.0;
    for (const auto& r : model.residues) acc += r;
    return acc;
}

std::vector<std::size_t> match_samples_to_grid(const SampleSet& samples, const QuadGrid& grid) {
    if (samples.size() != static_cast<std::size_t>(grid.ell))
        throw GridMismatch("sample count differs from the node count");
    const double tol = 1e-12 * grid.L;
    std::vector<std::size_t> map(grid.ell);
    std::vector<bool> used(samples.size(), false);
    for (int j = 0; j < grid.ell; ++j) {
        bool found = false;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (!used[i] && std::abs(samples[i].s - grid.nodes[j]) <= tol) {
                map[j] = i;
                used[i] = true;
                found = true;
                break;
            }
        }
        if (!found) throw GridMismatch("sample points do not match the quadrature nodes");
    }
    return map;
}

double discrete_h2_error_sq(const SampleSet& samples, const PoleResidueModel& model,
                            const QuadGrid& grid) {
    const auto map = match_samples_to_grid(samples, grid);
    double acc = 0.0;
    for (int j = 0; j < grid.ell; ++j) {
        const auto& smp = samples[map[j]];
        const Complex diff = smp.value - eval_pole_residue(model, smp.s);
        acc += grid.weights[j] * grid.weights[j] * std::norm(diff);
    }
    const Complex m_ref = samples.m_plus() ? *samples.m_plus() : m_plus_estimate(samples);
    const Complex dm_plus = m_ref - model_moment(model);
    const Complex dm_minus = std::conj(dm_plus);  // real-data convention M- = conj(M+)
    acc += 0.5 * grid.rho_plus * grid.rho_plus * (std::norm(dm_plus) + std::norm(dm_minus));
    return acc;
}

}  // namespace vfkit
