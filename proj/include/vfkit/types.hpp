#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "vfkit/errors.hpp"

namespace vfkit {

using Complex = std::complex<double>;
using CVec = std::vector<Complex>;

/// One frequency-response measurement: the evaluation point s, the measured
/// value H(s), an optional derivative H'(s), and an optional noise standard
/// deviation of the value.
struct FrequencySample {
    Complex s{};
    Complex value{};
    std::optional<Complex> deriv{};
    std::optional<double> sigma{};
};

/// An ordered collection of samples plus the optional moment at infinity
/// M+[H] = lim_{w->inf} iw H(iw).
class SampleSet {
  public:
    SampleSet() = default;
    explicit SampleSet(std::vector<FrequencySample> samples,
                       std::optional<Complex> m_plus = std::nullopt,
                       double conj_tol = -1.0);

    const std::vector<FrequencySample>& samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    const FrequencySample& operator[](std::size_t i) const { return samples_[i]; }

    std::optional<Complex> m_plus() const { return m_plus_; }
    bool conjugate_closed() const { return conjugate_closed_; }
    bool has_derivatives() const;

    CVec points() const;
    CVec values() const;

  private:
    std::vector<FrequencySample> samples_;
    std::optional<Complex> m_plus_{};
    bool conjugate_closed_ = false;
};

/// Strictly proper rational function in pole-residue form,
/// H_r(s) = sum_j residues[j] / (s - poles[j]).
struct PoleResidueModel {
    CVec poles;
    CVec residues;
    bool real_symmetric = false;

    std::size_t order() const { return poles.size(); }
};

/// Barycentric iterate: shared nodes lambda, numerator residues phi and
/// denominator residues varphi of n~(s)/d~(s) with d~(s) = 1 + sum varphi_j/(s-lambda_j).
struct BarycentricState {
    CVec lambda;
    CVec phi;
    CVec varphi;

    std::size_t order() const { return lambda.size(); }
};

/// Relative guard against evaluating 1/(s-lambda) at a (near-)singularity.
inline double pole_collision_tol(const Complex& lambda) { return 1e-13 * (1.0 + std::abs(lambda)); }

Complex eval_pole_residue(const PoleResidueModel& model, Complex s);

/// Derivative H_r'(s) = -sum_j residues[j] / (s - poles[j])^2.
Complex eval_pole_residue_deriv(const PoleResidueModel& model, Complex s);

struct BarycentricValue {
    Complex value;
    Complex denom;
};

BarycentricValue eval_barycentric(const BarycentricState& state, Complex s);

/// True iff the multiset of points is closed under complex conjugation within tol.
bool check_conjugate_closed(const CVec& points, double tol);

/// Projects an approximately conjugate-closed model onto exact conjugate
/// pairing: pairs are averaged, near-real poles get real residues.
PoleResidueModel realify_pairs(const PoleResidueModel& model, double tol);

/// Conjugate structure of a pole set: index pairs (i,j) with lambda[j] ~= conj(lambda[i])
/// and Im(lambda[i]) > 0, plus the indices of (near-)real entries.
struct ConjugatePartition {
    struct Pair {
        std::size_t plus;   // member with positive imaginary part
        std::size_t minus;  // its conjugate
    };
    std::vector<Pair> pairs;
    std::vector<std::size_t> reals;

    std::size_t dof() const { return 2 * pairs.size() + reals.size(); }
};

/// Builds the partition for an exactly (or near-exactly) paired set.
/// Throws NotPairable if some entry has no conjugate partner within tol.
ConjugatePartition conjugate_partition(const CVec& points, double tol);

}  // namespace vfkit
