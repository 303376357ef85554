#include "vfkit/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vfkit {

SampleSet::SampleSet(std::vector<FrequencySample> samples, std::optional<Complex> m_plus,
                     double conj_tol)
    : samples_(std::move(samples)), m_plus_(m_plus) {
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const auto& smp = samples_[i];
        if (!std::isfinite(smp.s.real()) || !std::isfinite(smp.s.imag()) ||
            !std::isfinite(smp.value.real()) || !std::isfinite(smp.value.imag()))
            throw InvalidParam("SampleSet: non-finite sample");
        if (smp.sigma && (!(*smp.sigma > 0.0) || !std::isfinite(*smp.sigma)))
            throw InvalidParam("SampleSet: sigma must be positive and finite");
        for (std::size_t j = i + 1; j < samples_.size(); ++j)
            if (samples_[j].s == smp.s) throw InvalidParam("SampleSet: duplicate sample points");
    }
    double scale = 0.0;
    for (const auto& smp : samples_) scale = std::max(scale, std::abs(smp.s));
    if (conj_tol < 0.0) conj_tol = 1e-9 * (1.0 + scale);

    // Conjugate closure of points and values together.
    conjugate_closed_ = !samples_.empty();
    std::vector<bool> used(samples_.size(), false);
    for (std::size_t i = 0; i < samples_.size() && conjugate_closed_; ++i) {
        if (used[i]) continue;
        const Complex want = std::conj(samples_[i].s);
        std::size_t best = samples_.size();
        double best_d = conj_tol;
        for (std::size_t j = 0; j < samples_.size(); ++j) {
            if (used[j] && j != i) continue;
            double d = std::abs(samples_[j].s - want);
            if (d <= best_d) {
                best_d = d;
                best = j;
            }
        }
        if (best == samples_.size()) {
            conjugate_closed_ = false;
            break;
        }
        double vtol = conj_tol * (1.0 + std::abs(samples_[i].value));
        if (std::abs(samples_[best].value - std::conj(samples_[i].value)) > vtol) {
            conjugate_closed_ = false;
            break;
        }
        used[i] = used[best] = true;
    }
}

bool SampleSet::has_derivatives() const {
    return !samples_.empty() &&
           std::all_of(samples_.begin(), samples_.end(),
                       [](const FrequencySample& f) { return f.deriv.has_value(); });
}

CVec SampleSet::points() const {
    CVec p(samples_.size());
    for (std::size_t i = 0; i < samples_.size(); ++i) p[i] = samples_[i].s;
    return p;
}

CVec SampleSet::values() const {
    CVec v(samples_.size());
    for (std::size_t i = 0; i < samples_.size(); ++i) v[i] = samples_[i].value;
    return v;
}

Complex eval_pole_residue(const PoleResidueModel& model, Complex s) {
    Complex acc = 0.0;
    for (std::size_t j = 0; j < model.poles.size(); ++j) {
        const Complex d = s - model.poles[j];
        if (std::abs(d) < pole_collision_tol(model.poles[j]))
            throw PoleCollision("eval_pole_residue: s coincides with a pole");
        acc += model.residues[j] / d;
    }
    return acc;
}

Complex eval_pole_residue_deriv(const PoleResidueModel& model, Complex s) {
    Complex acc = 0.0;
    for (std::size_t j = 0; j < model.poles.size(); ++j) {
        const Complex d = s - model.poles[j];
        if (std::abs(d) < pole_collision_tol(model.poles[j]))
            throw PoleCollision("eval_pole_residue_deriv: s coincides with a pole");
        acc -= model.residues[j] / (d * d);
    }
    return acc;
}

BarycentricValue eval_barycentric(const BarycentricState& state, Complex s) {
    Complex num = 0.0, den = 1.0;
    double den_scale = 1.0;
    for (std::size_t j = 0; j < state.lambda.size(); ++j) {
        const Complex d = s - state.lambda[j];
        if (std::abs(d) < pole_collision_tol(state.lambda[j]))
            throw PoleCollision("eval_barycentric: s coincides with a node");
        num += state.phi[j] / d;
        den += state.varphi[j] / d;
        den_scale += std::abs(state.varphi[j]) / std::abs(d);
    }
    if (std::abs(den) < 1e-13 * den_scale)
        throw DenominatorZero("eval_barycentric: denominator vanishes at s");
    return {num / den, den};
}

bool check_conjugate_closed(const CVec& points, double tol) {
    if (tol < 0.0) throw InvalidParam("check_conjugate_closed: tol must be nonnegative");
    std::vector<bool> used(points.size(), false);
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (used[i]) continue;
        const Complex want = std::conj(points[i]);
        std::size_t best = points.size();
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (used[j] && j != i) continue;
            double d = std::abs(points[j] - want);
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        if (best == points.size() || best_d > tol) return false;
        used[i] = used[best] = true;
    }
    return true;
}

ConjugatePartition conjugate_partition(const CVec& points, double tol) {
    ConjugatePartition part;
    std::vector<bool> used(points.size(), false);
    // Greedy nearest-conjugate matching in index order; ties by index.
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (used[i]) continue;
        const Complex want = std::conj(points[i]);
        std::size_t best = points.size();
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = i; j < points.size(); ++j) {
            if (used[j]) continue;
            double d = std::abs(points[j] - want);
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        if (best == points.size() || best_d > tol)
            throw NotPairable("conjugate_partition: no conjugate partner within tolerance");
        used[i] = used[best] = true;
        if (best == i) {
            part.reals.push_back(i);
        } else if (points[i].imag() >= points[best].imag()) {
            part.pairs.push_back({i, best});
        } else {
            part.pairs.push_back({best, i});
        }
    }
    return part;
}

PoleResidueModel realify_pairs(const PoleResidueModel& model, double tol) {
    const auto part = conjugate_partition(model.poles, tol);
    PoleResidueModel out = model;
    for (auto idx : part.reals) {
        out.poles[idx] = Complex(model.poles[idx].real(), 0.0);
        out.residues[idx] = Complex(model.residues[idx].real(), 0.0);
    }
    for (const auto& pr : part.pairs) {
        const Complex lam = 0.5 * (model.poles[pr.plus] + std::conj(model.poles[pr.minus]));
        const Complex res = 0.5 * (model.residues[pr.plus] + std::conj(model.residues[pr.minus]));
        out.poles[pr.plus] = lam;
        out.poles[pr.minus] = std::conj(lam);
        out.residues[pr.plus] = res;
        out.residues[pr.minus] = std::conj(res);
    }
    out.real_symmetric = true;
    return out;
}

}  // namespace vfkit
