#include "vfkit/leastsq.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

namespace vfkit {

namespace {

constexpr double kRankThreshold = 1e-12;

Eigen::MatrixXcd sort_rows_desc_inf_norm(const Eigen::MatrixXcd& M, Eigen::VectorXcd& rhs) {
    std::vector<Eigen::Index> order(M.rows());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> inf_norm(M.rows());
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        inf_norm[i] = M.row(i).cwiseAbs().maxCoeff();
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return inf_norm[a] > inf_norm[b]; });
    Eigen::MatrixXcd out(M.rows(), M.cols());
    Eigen::VectorXcd rout(rhs.size());
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        out.row(i) = M.row(order[i]);
        rout[i] = rhs[order[i]];
    }
    rhs = rout;
    return out;
}

}  // namespace

WlsSolution solve_wls(const WlsProblem& p) {
    const Eigen::Index m = p.A.rows(), n = p.A.cols();
    if (m < n) throw InvalidParam("solve_wls: need at least as many rows as unknowns");
    if (p.b.size() != m || p.row_weights.size() != m)
        throw LengthMismatch("solve_wls: inconsistent dimensions");
    for (Eigen::Index i = 0; i < m; ++i)
        if (!(p.row_weights[i] > 0.0) || !std::isfinite(p.row_weights[i]))
            throw InvalidParam("solve_wls: weights must be positive and finite");

    Eigen::MatrixXcd As = p.row_weights.asDiagonal() * p.A;
    Eigen::VectorXcd bs = p.row_weights.asDiagonal() * p.b;
    const Eigen::MatrixXcd Ap = sort_rows_desc_inf_norm(As, bs);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(Ap);
    qr.setThreshold(kRankThreshold);
    if (qr.rank() < n) throw RankDeficient("solve_wls: numerically rank-deficient matrix");

    WlsSolution sol;
    sol.x = qr.solve(bs);
    sol.residual_norm = (Ap * sol.x - bs).norm();
    return sol;
}

Eigen::VectorXcd solve_regularized(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& b,
                                   double eta1, double eta2, Eigen::Index split) {
    const Eigen::Index m = A.rows(), n = A.cols();
    if (split < 0 || split > n) throw InvalidParam("solve_regularized: bad split");
    if (eta1 < 0.0 || eta2 < 0.0) throw InvalidParam("solve_regularized: negative eta");

    Eigen::MatrixXcd M(m + n, n);
    M.topRows(m) = A;
    M.bottomRows(n).setZero();
    for (Eigen::Index j = 0; j < n; ++j) M(m + j, j) = (j < split) ? eta1 : eta2;
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(m + n);
    rhs.head(m) = b;

    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(M);
    qr.setThreshold(kRankThreshold);
    return qr.solve(rhs);
}

TlsSolution solve_tls(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& b,
                      const Eigen::VectorXd& W, const Eigen::VectorXd& T) {
    const Eigen::Index m = A.rows(), n = A.cols();
    if (m < n + 1) throw InvalidParam("solve_tls: need m >= n+1 rows");
    if (b.size() != m || W.size() != m || T.size() != n + 1)
        throw LengthMismatch("solve_tls: inconsistent dimensions");

    Eigen::MatrixXcd G(m, n + 1);
    G.leftCols(n) = A;
    G.col(n) = b;
    G = W.asDiagonal() * G * T.asDiagonal();

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(G, Eigen::ComputeThinU | Eigen::ComputeFullV);
    const Eigen::VectorXd sv = svd.singularValues();
    const double sigma_min = sv[n];
    const double sigma_max = sv[0];
    if (sigma_max <= 0.0) throw NonGenericTls("solve_tls: zero data matrix");
    if (n >= 1 && (sv[n - 1] - sigma_min) < 1e-10 * sigma_max)
        throw NonGenericTls("solve_tls: smallest singular value is not simple");

    const Eigen::VectorXcd v = svd.matrixV().col(n);
    const std::complex<double> eta = v[n];
    if (std::abs(eta) < 1e-12)
        throw NonGenericTls("solve_tls: last right singular component vanishes");
    const Eigen::VectorXcd u = svd.matrixU().col(n);

    TlsSolution sol;
    sol.sigma_min = sigma_min;
    sol.x = (-1.0 / (eta * T[n])) *
            (T.head(n).cast<std::complex<double>>().asDiagonal() * v.head(n));
    // [dA r] = -sigma W^{-1} u v^* T^{-1}
    Eigen::MatrixXcd pert =
        -sigma_min * (W.cwiseInverse().asDiagonal() * (u * v.adjoint()) *
                      T.cwiseInverse().asDiagonal());
    sol.delta_A = pert.leftCols(n);
    sol.r_hat = pert.col(n);
    return sol;
}

TlsSolution solve_mixed_ls_tls(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& b,
                               Eigen::Index n_exact, const Eigen::VectorXd& W,
                               const Eigen::VectorXd& T) {
    const Eigen::Index m = A.rows(), n = A.cols();
    if (n_exact < 0 || n_exact > n) throw InvalidParam("solve_mixed_ls_tls: bad n_exact");
    if (n_exact == 0) return solve_tls(A, b, W, T);

    if (n_exact == n) {
        WlsSolution ls = solve_wls({A, b, W});
        TlsSolution sol;
        sol.x = ls.x;
        sol.delta_A = Eigen::MatrixXcd::Zero(m, n);
        sol.r_hat = A * ls.x - b;
        sol.sigma_min = T[n] * (W.asDiagonal() * sol.r_hat).norm();
        return sol;
    }

    // Row-scale so the remaining TLS block sees unit weights.
    const Eigen::MatrixXcd As = W.asDiagonal() * A;
    const Eigen::VectorXcd bs = W.asDiagonal() * b;

    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(As.leftCols(n_exact));
    const Eigen::MatrixXcd R1 = qr.matrixQR().topRows(n_exact).triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < n_exact; ++j)
        if (std::abs(R1(j, j)) < kRankThreshold * std::abs(R1(0, 0)))
            throw RankDeficient("solve_mixed_ls_tls: exact column block is rank-deficient");

    Eigen::MatrixXcd rest(m, n - n_exact + 1);
    rest.leftCols(n - n_exact) = As.rightCols(n - n_exact);
    rest.col(n - n_exact) = bs;
    const Eigen::MatrixXcd rest_t = qr.householderQ().adjoint() * rest;

    const Eigen::MatrixXcd A22 = rest_t.block(n_exact, 0, m - n_exact, n - n_exact);
    const Eigen::VectorXcd c2 = rest_t.col(n - n_exact).tail(m - n_exact);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m - n_exact);
    TlsSolution sub = solve_tls(A22, c2, ones, T.tail(n + 1 - n_exact));

    TlsSolution sol;
    sol.sigma_min = sub.sigma_min;
    sol.x.resize(n);
    sol.x.tail(n - n_exact) = sub.x;
    const Eigen::VectorXcd c1 = rest_t.col(n - n_exact).head(n_exact);
    const Eigen::MatrixXcd R12 = rest_t.topRows(n_exact).leftCols(n - n_exact);
    sol.x.head(n_exact) = R1.triangularView<Eigen::Upper>().solve(c1 - R12 * sub.x);

    // Map the reduced correction back through Q and undo the row scaling.
    Eigen::MatrixXcd pert = Eigen::MatrixXcd::Zero(m, n - n_exact + 1);
    pert.block(n_exact, 0, m - n_exact, n - n_exact) = sub.delta_A;
    pert.col(n - n_exact).tail(m - n_exact) = sub.r_hat;
    pert = W.cwiseInverse().asDiagonal() * (qr.householderQ() * pert);

    sol.delta_A = Eigen::MatrixXcd::Zero(m, n);
    sol.delta_A.rightCols(n - n_exact) = pert.leftCols(n - n_exact);
    sol.r_hat = pert.col(n - n_exact);
    return sol;
}

double tls_objective_decomposition(const Eigen::VectorXcd& r_hat, const Eigen::MatrixXcd& C,
                                   const Eigen::VectorXd& W, const Eigen::VectorXd& T) {
    const Eigen::Index m = C.rows(), r = C.cols();
    if (r_hat.size() != m || W.size() != m || T.size() != r + 1)
        throw LengthMismatch("tls_objective_decomposition: inconsistent dimensions");
    const Eigen::VectorXcd wr = W.asDiagonal() * r_hat;
    double acc = T[r] * T[r] * wr.squaredNorm();
    for (Eigen::Index j = 0; j < r; ++j)
        acc += T[j] * T[j] *
               (W.asDiagonal() * r_hat.cwiseProduct(C.col(j))).squaredNorm();
    return acc;
}

}  // namespace vfkit
