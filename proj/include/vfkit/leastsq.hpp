#pragma once

#include <Eigen/Dense>

#include "vfkit/errors.hpp"

namespace vfkit {

/// Weighted least squares min ||W(Ax - b)||_2 with diagonal W > 0.
struct WlsProblem {
    Eigen::MatrixXcd A;
    Eigen::VectorXcd b;
    Eigen::VectorXd row_weights;
};

struct WlsSolution {
    Eigen::VectorXcd x;
    double residual_norm = 0.0;
};

/// Scales rows by the weights, sorts them by descending infinity norm
/// (Bjorck's simplification of Powell-Reid pivoting), then solves by
/// column-pivoted QR. Throws RankDeficient below the 1e-12 relative
/// rank threshold.
WlsSolution solve_wls(const WlsProblem& p);

/// Ridge-augmented solve: min ||Ax-b||^2 + eta1^2||x_head||^2 + eta2^2||x_tail||^2
/// where x_head is the first `split` unknowns. Realized by stacking the
/// scaled identity under A, so it never fails for positive eta.
Eigen::VectorXcd solve_regularized(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& b,
                                   double eta1, double eta2, Eigen::Index split);

/// Total least squares result. delta_A and r_hat satisfy
/// (A + delta_A) x = b + r_hat, and ||W [delta_A r_hat] T||_F = sigma_min.
struct TlsSolution {
    Eigen::VectorXcd x;
    Eigen::MatrixXcd delta_A;
    Eigen::VectorXcd r_hat;
    double sigma_min = 0.0;
};

/// Classical unstructured TLS via the SVD of W [A b] T with diagonal scalings
/// W (rows) and T (columns, size n+1). Throws NonGenericTls when the smallest
/// singular value is (numerically) multiple or the solution direction has a
/// vanishing last component.
TlsSolution solve_tls(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& b,
                      const Eigen::VectorXd& W, const Eigen::VectorXd& T);

/// Mixed LS/TLS: the first n_exact columns of A are error-free. They are
/// eliminated by a QR factorization and TLS is solved on the reduced block;
/// the correction of the exact columns is exactly zero.
TlsSolution solve_mixed_ls_tls(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& b,
                               Eigen::Index n_exact, const Eigen::VectorXd& W,
                               const Eigen::VectorXd& T);

/// Structured TLS objective for a candidate residual r under the rank-one
/// displacement structure E = (r e^T) o C:
///   t_{r+1}^2 ||W r||^2 + sum_j t_j^2 ||W (r o C(:,j))||^2.
/// Evaluator only; no solver for the structured problem is provided.
double tls_objective_decomposition(const Eigen::VectorXcd& r_hat, const Eigen::MatrixXcd& C,
                                   const Eigen::VectorXd& W, const Eigen::VectorXd& T);

}  // namespace vfkit
