#include "vfkit/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace vfkit {

double relative_h2_error(const SampleSet& reference, const PoleResidueModel& model,
                         const QuadGrid& grid) {
    const auto map = match_samples_to_grid(reference, grid);
    CVec values(grid.ell);
    for (int j = 0; j < grid.ell; ++j) values[j] = reference[map[j]].value;
    const Complex m_plus =
        reference.m_plus() ? *reference.m_plus() : m_plus_estimate(reference);
    const double norm_sq = h2_norm_sq_estimate(values, m_plus, std::conj(m_plus), grid);
    if (!(norm_sq > 0.0)) throw ZeroNorm("relative_h2_error: reference norm estimate is zero");
    return std::sqrt(discrete_h2_error_sq(reference, model, grid) / norm_sq);
}

double relative_h2_error(const StateSpaceModel& reference, const PoleResidueModel& model,
                         const QuadGrid& grid) {
    std::vector<FrequencySample> samples(grid.ell);
    for (int j = 0; j < grid.ell; ++j) {
        samples[j].s = grid.nodes[j];
        samples[j].value = ss_eval(reference, grid.nodes[j]).h;
    }
    return relative_h2_error(SampleSet(std::move(samples), moment_at_infinity(reference)),
                             model, grid);
}

namespace {

double golden_refine(const std::function<double(double)>& f, double a, double b, double fa_mid) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a);
    double x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    double best = fa_mid;
    for (int it = 0; it < 80 && (b - a) > 1e-12 * (1.0 + std::abs(b)); ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = f(x1);
        }
        best = std::max({best, f1, f2});
    }
    return best;
}

}  // namespace

HinfEstimate hinf_estimate(const EvalFn& reference, const PoleResidueModel& model,
                           const std::vector<double>& omegas) {
    if (omegas.size() < 2) throw InvalidParam("hinf_estimate: need at least 2 grid points");
    const auto err_at = [&](double w) {
        const Complex s(0.0, w);
        return std::abs(reference(s) - eval_pole_residue(model, s));
    };
    HinfEstimate out;
    std::size_t imax = 0;
    std::vector<double> err(omegas.size());
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        err[i] = err_at(omegas[i]);
        out.ref_max = std::max(out.ref_max, std::abs(reference(Complex(0.0, omegas[i]))));
        if (err[i] > err[imax]) imax = i;
    }
    out.omega = omegas[imax];
    const double lo = imax > 0 ? omegas[imax - 1] : omegas[imax];
    const double hi = imax + 1 < omegas.size() ? omegas[imax + 1] : omegas[imax];
    out.value = lo < hi ? golden_refine(err_at, lo, hi, err[imax]) : err[imax];
    return out;
}

HinfEstimate hinf_estimate(const SampleSet& reference, const PoleResidueModel& model) {
    if (reference.size() < 2) throw InvalidParam("hinf_estimate: need at least 2 samples");
    HinfEstimate out;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double e = std::abs(reference[i].value - eval_pole_residue(model, reference[i].s));
        out.ref_max = std::max(out.ref_max, std::abs(reference[i].value));
        if (e > out.value) {
            out.value = e;
            out.omega = reference[i].s.imag();
        }
    }
    return out;
}

double sobolev_error(const SampleSet& reference, const PoleResidueModel& model,
                     const Eigen::VectorXd& W0, const Eigen::VectorXd& W1) {
    if (!reference.has_derivatives())
        throw MissingDerivative("sobolev_error: reference lacks derivatives");
    const Eigen::Index m = static_cast<Eigen::Index>(reference.size());
    if (W0.size() != m || W1.size() != m)
        throw LengthMismatch("sobolev_error: weight length mismatch");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        const Complex dv = reference[i].value - eval_pole_residue(model, reference[i].s);
        const Complex dd = *reference[i].deriv - eval_pole_residue_deriv(model, reference[i].s);
        acc += W0[i] * W0[i] * std::norm(dv) + W1[i] * W1[i] * std::norm(dd);
    }
    return std::sqrt(acc);
}

std::vector<double> default_hinf_grid(double w_lo, double w_hi) {
    if (!(0.0 < w_lo && w_lo < w_hi)) throw InvalidBand("default_hinf_grid: need 0 < lo < hi");
    std::vector<double> grid;
    grid.reserve(2001);
    grid.push_back(0.0);
    const double a = w_lo / 10.0, b = 10.0 * w_hi;
    for (int k = 0; k < 2000; ++k)
        grid.push_back(a * std::pow(b / a, static_cast<double>(k) / 1999.0));
    return grid;
}

}  // namespace vfkit
