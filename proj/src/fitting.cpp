#include "vfkit/fitting.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "vfkit/leastsq.hpp"

namespace vfkit {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

Eigen::VectorXd sigma_or_unit_weights(const SampleSet& samples) {
    const Eigen::Index m = static_cast<Eigen::Index>(samples.size());
    Eigen::VectorXd W = Eigen::VectorXd::Ones(m);
    bool all = true;
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (!samples[i].sigma) {
            all = false;
            break;
        }
    if (all)
        for (std::size_t i = 0; i < samples.size(); ++i) W[i] = 1.0 / *samples[i].sigma;
    return W;
}

// Per-sample quadrature weights, in sample order.
Eigen::VectorXd grid_weights_for_samples(const SampleSet& samples, const QuadGrid& grid) {
    const auto node_to_sample = match_samples_to_grid(samples, grid);
    Eigen::VectorXd W(samples.size());
    for (int j = 0; j < grid.ell; ++j) W[node_to_sample[j]] = grid.weights[j];
    return W;
}

double min_node_pole_distance(const SampleSet& samples, const CVec& lambda) {
    double mu = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < samples.size(); ++i)
        for (const auto& lam : lambda) mu = std::min(mu, std::abs(samples[i].s - lam));
    return mu;
}

// ----- realification -------------------------------------------------------
//
// For conjugate-closed data and poles the complex system is re-expressed over
// real coefficients. Each conjugate pole pair (l, conj l) contributes the
// basis {1/(s-l)+1/(s-conj l), i/(s-l)-i/(s-conj l)} (two real unknowns a, b
// with residues a+-ib); a real pole keeps its scalar basis. Complex rows then
// split into their real and imaginary parts, which preserves the 2-norm of
// the residual exactly.

struct RealMap {
    bool active = false;
    ConjugatePartition part;
};

RealMap make_real_map(const SampleSet& samples, const CVec& lambda) {
    RealMap map;
    if (!samples.conjugate_closed()) return map;
    double scale = 0.0;
    for (const auto& l : lambda) scale = std::max(scale, std::abs(l));
    try {
        map.part = conjugate_partition(lambda, 1e-8 * (1.0 + scale));
    } catch (const NotPairable&) {
        return map;
    }
    map.active = true;
    return map;
}

// Mixes per-pole columns of one block into conjugate-symmetric real
// coefficient columns (pairs first, then real poles).
Eigen::MatrixXcd pair_columns(const Eigen::MatrixXcd& block, const ConjugatePartition& part) {
    Eigen::MatrixXcd out(block.rows(), block.cols());
    const Complex im(0.0, 1.0);
    Eigen::Index c = 0;
    for (const auto& pr : part.pairs) {
        out.col(c++) = block.col(pr.plus) + block.col(pr.minus);
        out.col(c++) = im * (block.col(pr.plus) - block.col(pr.minus));
    }
    for (auto idx : part.reals) out.col(c++) = block.col(idx);
    return out;
}

CVec unpack_paired(const Eigen::VectorXcd& x, Eigen::Index offset,
                   const ConjugatePartition& part, std::size_t r) {
    CVec out(r);
    Eigen::Index c = offset;
    for (const auto& pr : part.pairs) {
        const double a = x[c++].real();
        const double b = x[c++].real();
        out[pr.plus] = Complex(a, b);
        out[pr.minus] = Complex(a, -b);
    }
    for (auto idx : part.reals) out[idx] = Complex(x[c++].real(), 0.0);
    return out;
}

struct LinearSystem {
    Eigen::MatrixXcd A;
    Eigen::VectorXcd h;
    Eigen::VectorXd W;
};

// Splits complex rows into stacked real/imaginary rows.
LinearSystem split_rows(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& h,
                        const Eigen::VectorXd& W) {
    LinearSystem out;
    out.A.resize(2 * A.rows(), A.cols());
    out.h.resize(2 * A.rows());
    out.W.resize(2 * A.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        out.A.row(2 * i) = A.row(i).real().cast<Complex>();
        out.A.row(2 * i + 1) = A.row(i).imag().cast<Complex>();
        out.h[2 * i] = Complex(h[i].real(), 0.0);
        out.h[2 * i + 1] = Complex(h[i].imag(), 0.0);
        out.W[2 * i] = W[i];
        out.W[2 * i + 1] = W[i];
    }
    return out;
}

// Realifies a two-block (phi | varphi) or one-block system according to the map.
LinearSystem realify(const CauchySystem& sys, const RealMap& map, bool two_blocks) {
    if (!map.active) return {sys.A, sys.h, sys.W};
    Eigen::MatrixXcd mixed(sys.A.rows(), sys.A.cols());
    mixed.leftCols(sys.r) = pair_columns(sys.A.leftCols(sys.r), map.part);
    if (two_blocks) mixed.rightCols(sys.r) = pair_columns(sys.A.rightCols(sys.r), map.part);
    return split_rows(mixed, sys.h, sys.W);
}

struct SolveOut {
    Eigen::VectorXcd x;
    double residual = 0.0;
};

SolveOut dispatch_solve(const LinearSystem& sys, Eigen::Index split, Solver solver, double eta1,
                        double eta2) {
    SolveOut out;
    switch (solver) {
        case Solver::WLS: {
            WlsSolution sol = solve_wls({sys.A, sys.h, sys.W});
            out.x = sol.x;
            out.residual = sol.residual_norm;
            return out;
        }
        case Solver::REGULARIZED: {
            const Eigen::MatrixXcd WA = sys.W.asDiagonal() * sys.A;
            const Eigen::VectorXcd Wh = sys.W.asDiagonal() * sys.h;
            out.x = solve_regularized(WA, Wh, eta1, eta2, split);
            out.residual = (WA * out.x - Wh).norm();
            return out;
        }
        case Solver::TLS: {
            const Eigen::VectorXd T = Eigen::VectorXd::Ones(sys.A.cols() + 1);
            TlsSolution sol = solve_tls(sys.A, sys.h, sys.W, T);
            out.x = sol.x;
            out.residual = (sys.W.asDiagonal() * (sys.A * sol.x - sys.h)).norm();
            return out;
        }
        case Solver::MIXED_LS_TLS: {
            const Eigen::VectorXd T = Eigen::VectorXd::Ones(sys.A.cols() + 1);
            TlsSolution sol = solve_mixed_ls_tls(sys.A, sys.h, split, sys.W, T);
            out.x = sol.x;
            out.residual = (sys.W.asDiagonal() * (sys.A * sol.x - sys.h)).norm();
            return out;
        }
    }
    throw InvalidParam("unknown solver");
}

}  // namespace

CauchySystem assemble_cauchy_system(const SampleSet& samples, const CVec& lambda,
                                    const QuadGrid* grid) {
    const Eigen::Index m = static_cast<Eigen::Index>(samples.size());
    const Eigen::Index r = static_cast<Eigen::Index>(lambda.size());
    CauchySystem sys;
    sys.r = r;
    sys.moment_row = grid != nullptr;
    const Eigen::Index rows = m + (sys.moment_row ? 1 : 0);
    sys.A.resize(rows, 2 * r);
    sys.h.resize(rows);
    sys.W.resize(rows);

    for (Eigen::Index i = 0; i < m; ++i) {
        const Complex xi = samples[i].s;
        const Complex hi = samples[i].value;
        for (Eigen::Index j = 0; j < r; ++j) {
            const Complex d = xi - lambda[j];
            if (std::abs(d) < pole_collision_tol(lambda[j]))
                throw PoleCollision("assemble_cauchy_system: node collides with a pole");
            sys.A(i, j) = 1.0 / d;
            sys.A(i, r + j) = -hi / d;
        }
        sys.h[i] = hi;
    }

    if (grid) {
        sys.W.head(m) = grid_weights_for_samples(samples, *grid);
        sys.A.row(m).head(r).setOnes();
        sys.A.row(m).tail(r).setZero();
        sys.h[m] = samples.m_plus() ? *samples.m_plus() : m_plus_estimate(samples);
        sys.W[m] = grid->rho_plus;
    } else {
        sys.W = sigma_or_unit_weights(samples);
    }
    return sys;
}

CauchySystem assemble_sobolev_system(const SampleSet& samples, const CVec& lambda,
                                     const Eigen::VectorXd& W0, const Eigen::VectorXd& W1) {
    if (!samples.has_derivatives())
        throw MissingDerivative("assemble_sobolev_system: all samples need derivatives");
    const Eigen::Index m = static_cast<Eigen::Index>(samples.size());
    const Eigen::Index r = static_cast<Eigen::Index>(lambda.size());
    if (W0.size() != m || W1.size() != m)
        throw LengthMismatch("assemble_sobolev_system: weight length mismatch");

    CauchySystem sys;
    sys.r = r;
    sys.A.resize(2 * m, 2 * r);
    sys.h.resize(2 * m);
    sys.W.resize(2 * m);

    for (Eigen::Index i = 0; i < m; ++i) {
        const Complex xi = samples[i].s;
        const Complex hi = samples[i].value;
        const Complex hpi = *samples[i].deriv;
        for (Eigen::Index j = 0; j < r; ++j) {
            const Complex d = xi - lambda[j];
            if (std::abs(d) < pole_collision_tol(lambda[j]))
                throw PoleCollision("assemble_sobolev_system: node collides with a pole");
            const Complex c = 1.0 / d;
            const Complex c2 = c * c;
            sys.A(i, j) = c;
            sys.A(i, r + j) = -hi * c;
            sys.A(m + i, j) = -c2;
            sys.A(m + i, r + j) = hi * c2 - hpi * c;
        }
        sys.h[i] = hi;
        sys.h[m + i] = hpi;
        sys.W[i] = W0[i];
        sys.W[m + i] = W1[i];
    }
    return sys;
}

CVec relocate_poles(const BarycentricState& state) {
    const std::size_t r = state.lambda.size();
    if (state.phi.size() != r || state.varphi.size() != r)
        throw LengthMismatch("relocate_poles: inconsistent state");

    bool all_zero = true;
    double max_lam = 0.0, max_phi = 0.0;
    for (std::size_t j = 0; j < r; ++j) {
        if (state.varphi[j] != Complex(0.0, 0.0)) all_zero = false;
        max_lam = std::max(max_lam, std::abs(state.lambda[j]));
        max_phi = std::max(max_phi, std::abs(state.varphi[j]));
    }
    if (all_zero) return state.lambda;

    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(r, r);
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < r; ++j) M(i, j) = -state.varphi[i];
        M(i, i) += state.lambda[i];
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M, false);
    if (es.info() != Eigen::Success)
        throw DegenerateDenominator("relocate_poles: eigenvalue computation failed");

    const auto eval_d = [&](Complex z, Complex& deriv) {
        Complex v = 1.0;
        deriv = 0.0;
        for (std::size_t k = 0; k < r; ++k) {
            if (state.varphi[k] == Complex(0.0, 0.0)) continue;
            const Complex d = z - state.lambda[k];
            v += state.varphi[k] / d;
            deriv -= state.varphi[k] / (d * d);
        }
        return v;
    };

    // d~ with the term of pole k0 removed, evaluated at z.
    const auto eval_d_without = [&](Complex z, std::size_t k0) {
        Complex v = 1.0;
        for (std::size_t k = 0; k < r; ++k) {
            if (k == k0 || state.varphi[k] == Complex(0.0, 0.0)) continue;
            v += state.varphi[k] / (z - state.lambda[k]);
        }
        return v;
    };

    CVec zeros;
    zeros.reserve(r);
    for (std::size_t i = 0; i < r; ++i) {
        Complex z = es.eigenvalues()[i];
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw DegenerateDenominator("relocate_poles: non-finite zero");

        std::size_t jn = 0;
        double dist = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < r; ++k) {
            const double d = std::abs(z - state.lambda[k]);
            if (d < dist) {
                dist = d;
                jn = k;
            }
        }

        // A zero pinned to a pole within representable resolution: resolve
        // the sub-ulp offset analytically, z = lambda - varphi/d~_rest.
        if (dist <= 64.0 * kEps * (1.0 + std::abs(state.lambda[jn]))) {
            const Complex rest = eval_d_without(state.lambda[jn], jn);
            const double lam_scale = 1.0 + std::abs(state.lambda[jn]);
            if (std::abs(state.varphi[jn]) <=
                1e-8 * lam_scale * (1.0 + std::abs(rest))) {
                zeros.push_back(std::abs(rest) > 0.0
                                    ? state.lambda[jn] - state.varphi[jn] / rest
                                    : state.lambda[jn]);
                continue;
            }
            if (!(std::abs(rest) > 0.0))
                throw DegenerateDenominator("relocate_poles: zero stuck on a pole");
            z = state.lambda[jn] - state.varphi[jn] / rest;  // restart point
        }

        // Newton polish on d~; keep the best iterate.
        Complex deriv;
        Complex best = z;
        double best_res = std::abs(eval_d(z, deriv));
        for (int it = 0; it < 4; ++it) {
            if (!(std::abs(deriv) > 0.0)) break;
            const Complex zn = z - eval_d(z, deriv) / deriv;
            if (!std::isfinite(zn.real()) || !std::isfinite(zn.imag())) break;
            Complex dtmp;
            const double res = std::abs(eval_d(zn, dtmp));
            z = zn;
            deriv = dtmp;
            if (res < best_res) {
                best_res = res;
                best = zn;
            }
        }
        z = best;

        // Verify against d~ directly; the tolerance combines the semantic
        // 1e-8 guard with the attainable evaluation precision at z.
        double s1 = 1.0, s2 = 0.0;
        bool on_pole = false;
        for (std::size_t k = 0; k < r; ++k) {
            if (state.varphi[k] == Complex(0.0, 0.0)) continue;
            const double d = std::abs(z - state.lambda[k]);
            if (d == 0.0) {
                on_pole = true;
                break;
            }
            s1 += std::abs(state.varphi[k]) / d;
            s2 += std::abs(state.varphi[k]) / (d * d);
        }
        const double thresh =
            1e-8 * s1 + 64.0 * kEps * (std::abs(z) + max_lam + 1.0) * s2;
        if (on_pole || best_res > thresh)
            throw DegenerateDenominator("relocate_poles: zero failed verification against d~");
        zeros.push_back(z);
    }

    // Restore exact conjugate pairing when the inputs are conjugate-closed.
    const double in_tol = 1e-8 * (1.0 + max_lam);
    bool symmetric_input = check_conjugate_closed(state.lambda, in_tol);
    if (symmetric_input) {
        try {
            const auto part = conjugate_partition(state.lambda, in_tol);
            const double phi_tol = 1e-8 * (1.0 + max_phi);
            for (const auto& pr : part.pairs)
                if (std::abs(state.varphi[pr.minus] - std::conj(state.varphi[pr.plus])) >
                    phi_tol)
                    symmetric_input = false;
            for (auto idx : part.reals)
                if (std::abs(state.varphi[idx].imag()) > phi_tol) symmetric_input = false;
        } catch (const NotPairable&) {
            symmetric_input = false;
        }
    }
    if (symmetric_input) {
        double max_z = 0.0;
        for (const auto& z : zeros) max_z = std::max(max_z, std::abs(z));
        for (double tol : {1e-12, 1e-9, 1e-6}) {
            try {
                const auto zpart = conjugate_partition(zeros, tol * (1.0 + max_z));
                CVec paired = zeros;
                for (const auto& pr : zpart.pairs) {
                    const Complex z = 0.5 * (zeros[pr.plus] + std::conj(zeros[pr.minus]));
                    paired[pr.plus] = z;
                    paired[pr.minus] = std::conj(z);
                }
                for (auto idx : zpart.reals) paired[idx] = Complex(zeros[idx].real(), 0.0);
                return paired;
            } catch (const NotPairable&) {
            }
        }
    }
    return zeros;
}

MirrorResult mirror_unstable(const CVec& lambda_next) {
    MirrorResult out;
    out.lambda = lambda_next;
    for (std::size_t j = 0; j < lambda_next.size(); ++j) {
        const double re = lambda_next[j].real();
        if (re > 0.0) {
            out.lambda[j] = Complex(-re, lambda_next[j].imag());
            out.flipped.push_back(j);
        } else if (re == 0.0) {
            const double im = lambda_next[j].imag();
            out.lambda[j] = Complex(-1e-8 * (1.0 + std::abs(im)), im);
        }
    }
    return out;
}

CVec mirrored_denominator_residues(const CVec& lambda_hat_flipped) {
    const std::size_t p = lambda_hat_flipped.size();
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i + 1; j < p; ++j)
            if (std::abs(lambda_hat_flipped[i] - lambda_hat_flipped[j]) <
                pole_collision_tol(lambda_hat_flipped[i]))
                throw DuplicatePoles("mirrored_denominator_residues: poles must be distinct");
    CVec beta(p);
    for (std::size_t j = 0; j < p; ++j) {
        Complex num = 1.0, den = 1.0;
        for (std::size_t l = 0; l < p; ++l) {
            num *= lambda_hat_flipped[j] + lambda_hat_flipped[l];
            if (l != j) den *= lambda_hat_flipped[j] - lambda_hat_flipped[l];
        }
        beta[j] = num / den;
    }
    return beta;
}

VfStep vf_step(const SampleSet& samples, const CVec& lambda_current, const FitConfig& config) {
    const std::size_t r = lambda_current.size();
    VfStep step;
    step.mu = min_node_pole_distance(samples, lambda_current);

    CauchySystem sys;
    if (config.variant == Variant::SOBVF) {
        Eigen::VectorXd W0 = config.grid ? grid_weights_for_samples(samples, *config.grid)
                                         : sigma_or_unit_weights(samples);
        sys = assemble_sobolev_system(samples, lambda_current, W0, W0);
    } else {
        const QuadGrid* grid =
            (config.variant == Variant::QUADVF && config.grid) ? &*config.grid : nullptr;
        sys = assemble_cauchy_system(samples, lambda_current, grid);
    }

    const RealMap map = make_real_map(samples, lambda_current);
    const LinearSystem lin = realify(sys, map, true);
    const SolveOut sol = dispatch_solve(lin, sys.r, config.solver, config.eta1, config.eta2);

    step.state.lambda = lambda_current;
    if (map.active) {
        step.state.phi = unpack_paired(sol.x, 0, map.part, r);
        step.state.varphi = unpack_paired(sol.x, sys.r, map.part, r);
    } else {
        step.state.phi.assign(sol.x.data(), sol.x.data() + r);
        step.state.varphi.assign(sol.x.data() + r, sol.x.data() + 2 * r);
    }
    step.residual = sol.residual;
    for (const auto& v : step.state.varphi)
        step.max_abs_varphi = std::max(step.max_abs_varphi, std::abs(v));

    step.lambda_relocated = relocate_poles(step.state);
    MirrorResult mr = mirror_unstable(step.lambda_relocated);
    step.lambda_next = std::move(mr.lambda);
    step.mirrored = static_cast<int>(mr.flipped.size());
    return step;
}

namespace {

CauchySystem assemble_residue_system(const SampleSet& samples, const CVec& lambda,
                                     const FitConfig& config) {
    const Eigen::Index m = static_cast<Eigen::Index>(samples.size());
    const Eigen::Index r = static_cast<Eigen::Index>(lambda.size());
    CauchySystem sys;
    sys.r = r;

    if (config.variant == Variant::SOBVF) {
        const CauchySystem full = assemble_sobolev_system(
            samples, lambda,
            config.grid ? grid_weights_for_samples(samples, *config.grid)
                        : sigma_or_unit_weights(samples),
            config.grid ? grid_weights_for_samples(samples, *config.grid)
                        : sigma_or_unit_weights(samples));
        sys.A = full.A.leftCols(r);
        sys.h = full.h;
        sys.W = full.W;
        return sys;
    }

    const bool quad = config.variant == Variant::QUADVF && config.grid.has_value();
    const Eigen::Index rows = m + (quad ? 1 : 0);
    sys.A.resize(rows, r);
    sys.h.resize(rows);
    sys.W.resize(rows);
    sys.moment_row = quad;
    for (Eigen::Index i = 0; i < m; ++i) {
        const Complex xi = samples[i].s;
        for (Eigen::Index j = 0; j < r; ++j) {
            const Complex d = xi - lambda[j];
            if (std::abs(d) < pole_collision_tol(lambda[j]))
                throw PoleCollision("residue system: node collides with a pole");
            sys.A(i, j) = 1.0 / d;
        }
        sys.h[i] = samples[i].value;
    }
    if (quad) {
        sys.W.head(m) = grid_weights_for_samples(samples, *config.grid);
        sys.A.row(m).setOnes();
        sys.h[m] = samples.m_plus() ? *samples.m_plus() : m_plus_estimate(samples);
        sys.W[m] = config.grid->rho_plus;
    } else {
        sys.W = sigma_or_unit_weights(samples);
    }
    return sys;
}

}  // namespace

PoleResidueModel identify_residues(const SampleSet& samples, const CVec& lambda,
                                   const FitConfig& config) {
    const std::size_t r = lambda.size();
    const CauchySystem sys = assemble_residue_system(samples, lambda, config);
    const RealMap map = make_real_map(samples, lambda);
    const LinearSystem lin = realify(sys, map, false);

    Eigen::VectorXcd x;
    if (config.solver == Solver::REGULARIZED) {
        const Eigen::MatrixXcd WA = lin.W.asDiagonal() * lin.A;
        const Eigen::VectorXcd Wh = lin.W.asDiagonal() * lin.h;
        x = solve_regularized(WA, Wh, config.eta1, config.eta1, lin.A.cols());
    } else {
        // The residue matrix is exact, so TLS-family solvers reduce to WLS here.
        x = solve_wls({lin.A, lin.h, lin.W}).x;
    }

    PoleResidueModel model;
    model.poles = lambda;
    if (map.active) {
        model.residues = unpack_paired(x, 0, map.part, r);
        model.real_symmetric = true;
    } else {
        model.residues.assign(x.data(), x.data() + r);
    }
    return model;
}

double residue_relative_residual(const SampleSet& samples, const PoleResidueModel& model,
                                 const FitConfig& config) {
    const CauchySystem sys = assemble_residue_system(samples, model.poles, config);
    Eigen::VectorXcd phi(model.residues.size());
    for (std::size_t j = 0; j < model.residues.size(); ++j) phi[j] = model.residues[j];
    const double hnorm = (sys.W.asDiagonal() * sys.h).norm();
    const double res = (sys.W.asDiagonal() * (sys.A * phi - sys.h)).norm();
    return hnorm > 0.0 ? res / hnorm : res;
}

CVec default_initial_poles(const SampleSet& samples, int r) {
    std::vector<double> freqs;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double w = std::abs(samples[i].s.imag());
        if (w > 0.0) freqs.push_back(w);
    }
    if (freqs.empty())
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const double w = std::abs(samples[i].s);
            if (w > 0.0) freqs.push_back(w);
        }
    if (freqs.empty()) throw InvalidParam("default_initial_poles: degenerate sample band");
    const auto [lo_it, hi_it] = std::minmax_element(freqs.begin(), freqs.end());
    double wlo = *lo_it, whi = *hi_it;
    if (wlo == whi) {
        wlo *= 0.5;
        whi *= 2.0;
    }

    CVec poles;
    poles.reserve(r);
    const int npairs = r / 2;
    for (int k = 0; k < npairs; ++k) {
        const double t = npairs > 1 ? static_cast<double>(k) / (npairs - 1) : 0.5;
        const double w = wlo * std::pow(whi / wlo, t);
        poles.push_back(Complex(-0.01 * w, w));
        poles.push_back(Complex(-0.01 * w, -w));
    }
    if (r % 2 == 1) poles.push_back(Complex(-std::sqrt(wlo * whi), 0.0));
    return poles;
}

SkPolyResult sk_fit_polynomial(const SampleSet& samples, int r, int max_iters) {
    const Eigen::Index m = static_cast<Eigen::Index>(samples.size());
    if (m < 2 * r + 1) throw TooFewSamples("sk_fit_polynomial: need at least 2r+1 samples");
    if (max_iters < 1) throw InvalidParam("sk_fit_polynomial: max_iters must be >= 1");

    Eigen::MatrixXcd B(m, 2 * r);
    Eigen::VectorXcd h(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const Complex xi = samples[i].s;
        const Complex hi = samples[i].value;
        Complex p = 1.0;
        for (int j = 0; j < r; ++j) {
            B(i, j) = p;
            p *= xi;
            B(i, r + j) = -hi * p;
        }
        h[i] = hi;
    }
    const Eigen::VectorXd W0 = sigma_or_unit_weights(samples);
    const bool real_mode = samples.conjugate_closed();

    SkPolyResult out;
    Eigen::VectorXd delta = Eigen::VectorXd::Ones(m);  // d^(0) = 1
    Eigen::VectorXcd x;
    for (int k = 0; k < max_iters; ++k) {
        const Eigen::VectorXd Wk = W0.cwiseProduct(delta);
        LinearSystem lin{B, h, Wk};
        if (real_mode) lin = split_rows(B, h, Wk);
        const WlsSolution sol = solve_wls({lin.A, lin.h, lin.W});
        x = sol.x;
        if (real_mode) x = x.real().cast<Complex>();
        const double hn = (lin.W.asDiagonal() * lin.h).norm();
        out.residuals.push_back(hn > 0.0 ? sol.residual_norm / hn : sol.residual_norm);
        ++out.iterations;

        // d^(k+1) at the nodes and the next weights.
        Eigen::VectorXd delta_next(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            Complex d = 1.0, p = 1.0;
            for (int j = 0; j < r; ++j) {
                p *= samples[i].s;
                d += x[r + j] * p;
            }
            delta_next[i] = 1.0 / std::max(std::abs(d), 1e-280);
        }
        double change = 0.0;
        for (Eigen::Index i = 0; i < m; ++i)
            change = std::max(change, std::abs(delta_next[i] / delta[i] - 1.0));
        delta = delta_next;
        if (change <= 1e-13) break;
    }
    out.alpha = x.head(r);
    out.beta = x.tail(r);
    return out;
}

namespace {

// Roots of d(s) = 1 + beta_1 s + ... + beta_r s^r via the companion matrix.
CVec denominator_roots(const Eigen::VectorXcd& beta) {
    const Eigen::Index r = beta.size();
    const Complex lead = beta[r - 1];
    double scale = 1.0;
    for (Eigen::Index j = 0; j < r; ++j) scale = std::max(scale, std::abs(beta[j]));
    if (std::abs(lead) < 1e-14 * scale)
        throw DegenerateDenominator("denominator has (numerically) fewer than r finite zeros");
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(r, r);
    for (Eigen::Index i = 1; i < r; ++i) comp(i, i - 1) = 1.0;
    comp(0, r - 1) = -1.0 / lead;  // constant term is 1
    for (Eigen::Index j = 1; j < r; ++j) comp(j, r - 1) = -beta[j - 1] / lead;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
    if (es.info() != Eigen::Success)
        throw DegenerateDenominator("companion eigenvalue computation failed");
    CVec roots(r);
    for (Eigen::Index i = 0; i < r; ++i) roots[i] = es.eigenvalues()[i];
    return roots;
}

struct CandidateChoice {
    PoleResidueModel model;
    double residual = std::numeric_limits<double>::infinity();
    bool found = false;
};

CandidateChoice pick_best_candidate(const SampleSet& samples, const std::vector<CVec>& candidates,
                                    const FitConfig& config) {
    CandidateChoice best;
    for (const auto& lam : candidates) {
        try {
            PoleResidueModel model = identify_residues(samples, lam, config);
            const double res = residue_relative_residual(samples, model, config);
            if (res < best.residual) {
                best.model = std::move(model);
                best.residual = res;
                best.found = true;
            }
        } catch (const Error&) {
            continue;
        }
    }
    return best;
}

}  // namespace

FitResult fit(const SampleSet& samples, const FitConfig& config) {
    const int r = config.order;
    if (r < 1) throw InvalidParam("fit: order must be >= 1");
    if (config.max_iters < 1) throw InvalidParam("fit: max_iters must be >= 1");
    if (!(config.eps_backward > 0.0)) throw InvalidParam("fit: eps_backward must be positive");
    if (static_cast<int>(samples.size()) < 2 * r + 1)
        throw TooFewSamples("fit: need at least 2r+1 samples");
    if (config.variant == Variant::SOBVF && !samples.has_derivatives())
        throw MissingDerivative("fit: SOBVF requires derivative data");
    if (config.variant == Variant::QUADVF) {
        if (!config.grid) throw InvalidParam("fit: QUADVF requires a quadrature grid");
        match_samples_to_grid(samples, *config.grid);
    }

    FitResult result;

    if (config.variant == Variant::SK_POLY) {
        const SkPolyResult sk = sk_fit_polynomial(samples, r, config.max_iters);
        result.iterations = sk.iterations;
        result.status = sk.iterations < config.max_iters ? FitStatus::CONVERGED
                                                         : FitStatus::MAX_ITERS;
        result.history.resize(sk.iterations);
        for (int k = 0; k < sk.iterations; ++k) result.history[k].residual = sk.residuals[k];
        const MirrorResult mr = mirror_unstable(denominator_roots(sk.beta));
        const CandidateChoice best = pick_best_candidate(samples, {mr.lambda}, config);
        if (!best.found) throw DegenerateDenominator("fit: residue identification failed");
        result.model = best.model;
        result.relative_ls_residual = best.residual;
        return result;
    }

    CVec lambda = config.initial_poles ? *config.initial_poles
                                       : default_initial_poles(samples, r);
    if (static_cast<int>(lambda.size()) != r)
        throw InvalidParam("fit: initial pole count does not match the order");
    for (std::size_t i = 0; i < lambda.size(); ++i)
        for (std::size_t j = i + 1; j < lambda.size(); ++j)
            if (std::abs(lambda[i] - lambda[j]) < pole_collision_tol(lambda[i]))
                throw InvalidParam("fit: initial poles must be mutually distinct");
    lambda = mirror_unstable(lambda).lambda;

    if (config.variant == Variant::SK_BARY) {
        // SK in barycentric form: nodes stay fixed, the weights carry 1/|d^(k)|.
        const CauchySystem sys0 = assemble_cauchy_system(samples, lambda, nullptr);
        const RealMap map = make_real_map(samples, lambda);
        Eigen::VectorXd delta = Eigen::VectorXd::Ones(sys0.A.rows());
        BarycentricState state;
        result.status = FitStatus::MAX_ITERS;
        for (int k = 0; k < config.max_iters; ++k) {
            CauchySystem sys = sys0;
            sys.W = sys.W.cwiseProduct(delta);
            const LinearSystem lin = realify(sys, map, true);
            const SolveOut sol =
                dispatch_solve(lin, sys.r, config.solver, config.eta1, config.eta2);
            state.lambda = lambda;
            if (map.active) {
                state.phi = unpack_paired(sol.x, 0, map.part, r);
                state.varphi = unpack_paired(sol.x, sys.r, map.part, r);
            } else {
                state.phi.assign(sol.x.data(), sol.x.data() + r);
                state.varphi.assign(sol.x.data() + r, sol.x.data() + 2 * r);
            }
            IterationRecord rec;
            rec.lambda = lambda;
            rec.residual = sol.residual;
            rec.mu = min_node_pole_distance(samples, lambda);
            for (const auto& v : state.varphi)
                rec.max_abs_varphi = std::max(rec.max_abs_varphi, std::abs(v));

            Eigen::VectorXd delta_next(sys0.A.rows());
            double change = 0.0;
            for (Eigen::Index i = 0; i < sys0.A.rows(); ++i) {
                Complex d = 1.0;
                for (int j = 0; j < r; ++j) d += state.varphi[j] / (samples[i].s - lambda[j]);
                delta_next[i] = 1.0 / std::max(std::abs(d), 1e-280);
                change = std::max(change, std::abs(delta_next[i] / delta[i] - 1.0));
            }
            rec.delta = change;
            result.history.push_back(rec);
            ++result.iterations;
            delta = delta_next;
            if (change <= config.eps_backward) {
                result.status = FitStatus::CONVERGED;
                break;
            }
        }
        const MirrorResult mr = mirror_unstable(relocate_poles(state));
        const CandidateChoice best = pick_best_candidate(samples, {mr.lambda}, config);
        if (!best.found) throw DegenerateDenominator("fit: residue identification failed");
        result.model = best.model;
        result.relative_ls_residual = best.residual;
        return result;
    }

    // VF / QUADVF / SOBVF main loop.
    std::vector<double> deltas;
    std::vector<CVec> candidates;
    result.status = FitStatus::MAX_ITERS;
    for (int k = 0; k < config.max_iters; ++k) {
        VfStep step;
        try {
            step = vf_step(samples, lambda, config);
        } catch (const Error&) {
            if (result.history.empty()) throw;
            result.status = FitStatus::DEGENERATE;
            break;
        }

        IterationRecord rec;
        rec.lambda = lambda;
        rec.lambda_relocated = step.lambda_relocated;
        rec.max_abs_varphi = step.max_abs_varphi;
        rec.mu = step.mu;
        rec.residual = step.residual;
        rec.mirrored = step.mirrored;
        rec.omega = matching_distance(lambda, step.lambda_relocated).omega;
        if (k > 0) {
            const auto& prev = result.history.back().lambda;
            const MatchingResult m = matching_distance(lambda, prev);
            double d = 0.0;
            for (int j = 0; j < r; ++j)
                d = std::max(d, std::abs((lambda[j] - prev[m.permutation[j]]) / lambda[j]));
            rec.delta = d;
        }
        deltas.push_back(rec.delta);
        result.history.push_back(rec);
        ++result.iterations;

        if (stopping_decision(step.max_abs_varphi, step.mu, config.eps_backward, r) ==
            StopDecision::CONVERGED_BACKWARD) {
            result.status = FitStatus::CONVERGED;
            candidates.push_back(step.lambda_next);
            break;
        }
        if (static_cast<int>(deltas.size()) >= config.period_window + 1) {
            const auto tau = detect_period(deltas, config.period_window, config.period_tol);
            if (tau) {
                result.status = FitStatus::PERIODIC;
                result.period = *tau;
                for (int t = 0; t < *tau; ++t)
                    candidates.push_back(
                        result.history[result.history.size() - 1 - t].lambda);
                break;
            }
        }
        lambda = step.lambda_next;
    }

    if (candidates.empty()) {
        // MAX_ITERS or DEGENERATE: choose among the trailing window.
        const int take = std::min<int>(config.period_window, result.history.size());
        for (int t = 0; t < take; ++t)
            candidates.push_back(result.history[result.history.size() - 1 - t].lambda);
    }

    CandidateChoice best = pick_best_candidate(samples, candidates, config);
    if (!best.found) {
        // Walk the remaining history before giving up.
        std::vector<CVec> rest;
        for (auto it = result.history.rbegin(); it != result.history.rend(); ++it)
            rest.push_back(it->lambda);
        best = pick_best_candidate(samples, rest, config);
    }
    if (!best.found)
        throw DegenerateDenominator("fit: no pole candidate admits a residue solve");
    result.model = best.model;
    result.relative_ls_residual = best.residual;
    return result;
}

}  // namespace vfkit
