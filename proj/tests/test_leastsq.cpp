#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vfkit/leastsq.hpp>
#include <vfkit/systems.hpp>

using namespace vfkit;
using doctest::Approx;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace {

MatrixXcd random_matrix(CounterRng& rng, int m, int n) {
    MatrixXcd A(m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = Complex(rng.normal(), rng.normal());
    return A;
}

VectorXcd random_vector(CounterRng& rng, int m) {
    VectorXcd v(m);
    for (int i = 0; i < m; ++i) v[i] = Complex(rng.normal(), rng.normal());
    return v;
}

}  // namespace

TEST_CASE("solve_wls hand cases") {
    SUBCASE("unweighted mean") {
        MatrixXcd A(2, 1);
        A << 1, 1;
        VectorXcd b(2);
        b << 1, 3;
        const auto sol = solve_wls({A, b, VectorXd::Ones(2)});
        CHECK(sol.x[0].real() == Approx(2.0));
        CHECK(sol.residual_norm == Approx(std::sqrt(2.0)));
    }
    SUBCASE("weighted mean") {
        MatrixXcd A(2, 1);
        A << 1, 1;
        VectorXcd b(2);
        b << 1, 3;
        VectorXd w(2);
        w << 2, 1;
        CHECK(solve_wls({A, b, w}).x[0].real() == Approx(7.0 / 5.0));
    }
    SUBCASE("consistent square system") {
        const auto sol = solve_wls({MatrixXcd::Identity(2, 2),
                                    (VectorXcd(2) << Complex(0.3, 1), Complex(-2, 0)).finished(),
                                    (VectorXd(2) << 5, 0.1).finished()});
        CHECK(sol.x[0] == Complex(0.3, 1));
        CHECK(sol.x[1] == Complex(-2, 0));
        CHECK(sol.residual_norm == Approx(0.0));
    }
    SUBCASE("rank deficiency detected") {
        MatrixXcd A(3, 2);
        A << 1, 1, 1, 1, 1, 1;
        CHECK_THROWS_AS(solve_wls({A, VectorXcd::Ones(3), VectorXd::Ones(3)}), RankDeficient);
    }
}

TEST_CASE("solve_wls satisfies the weighted normal equations") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        CounterRng rng(seed);
        const int m = 12, n = 4;
        const MatrixXcd A = random_matrix(rng, m, n);
        const VectorXcd b = random_vector(rng, m);
        VectorXd w(m);
        for (int i = 0; i < m; ++i) w[i] = rng.uniform(0.2, 5.0);
        const auto sol = solve_wls({A, b, w});
        const VectorXd w2 = w.cwiseProduct(w);
        const double lhs = (A.adjoint() * (w2.asDiagonal() * (A * sol.x - b))).norm();
        CHECK(lhs <= 1e-10 * A.norm() * (w2.asDiagonal() * b).norm());
    }
}

TEST_CASE("row sorting does not change the solution") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        CounterRng rng(seed * 3 + 1);
        const int m = 15, n = 5;
        MatrixXcd A = random_matrix(rng, m, n);
        // Skew the row scales to make ordering matter (condition <= ~1e6).
        for (int i = 0; i < m; ++i) A.row(i) *= std::pow(10.0, rng.uniform(-3.0, 3.0));
        const VectorXcd b = random_vector(rng, m);
        const auto sorted = solve_wls({A, b, VectorXd::Ones(m)});

        // Reference: plain normal-equations-free solve without sorting.
        const VectorXcd ref = A.colPivHouseholderQr().solve(b);
        CHECK((sorted.x - ref).norm() <= 1e-8 * (1.0 + ref.norm()));
    }
}

TEST_CASE("solve_regularized hand cases") {
    SUBCASE("symmetric shrinkage") {
        const double eta = 0.5;
        const auto x = solve_regularized(MatrixXcd::Identity(2, 2), VectorXcd::Ones(2), eta,
                                         eta, 1);
        CHECK(x[0].real() == Approx(1.0 / (1.0 + eta * eta)));
        CHECK(x[1].real() == Approx(1.0 / (1.0 + eta * eta)));
    }
    SUBCASE("eta = 0 matches plain LS") {
        CounterRng rng(4);
        const MatrixXcd A = random_matrix(rng, 10, 3);
        const VectorXcd b = random_vector(rng, 10);
        const auto x0 = solve_regularized(A, b, 0.0, 0.0, 2);
        const auto ref = solve_wls({A, b, VectorXd::Ones(10)});
        CHECK((x0 - ref.x).norm() <= 1e-12 * (1.0 + ref.x.norm()));
    }
    SUBCASE("per-block penalties") {
        const auto x = solve_regularized(MatrixXcd::Identity(2, 2), VectorXcd::Ones(2), 0.0,
                                         1.0, 1);
        CHECK(x[0].real() == Approx(1.0));
        CHECK(x[1].real() == Approx(0.5));
    }
}

TEST_CASE("solve_regularized norm is monotone in eta") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        CounterRng rng(seed + 40);
        const MatrixXcd A = random_matrix(rng, 12, 5);
        const VectorXcd b = random_vector(rng, 12);
        double prev = std::numeric_limits<double>::infinity();
        for (double eta : {0.0, 1e-4, 1e-2, 0.1, 1.0, 10.0}) {
            const double norm = solve_regularized(A, b, eta, eta, 2).norm();
            CHECK(norm <= prev * (1.0 + 1e-12));
            prev = norm;
        }
    }
}

TEST_CASE("solve_tls closed forms") {
    SUBCASE("consistent system is exact") {
        MatrixXcd A(2, 1);
        A << 2, 0;
        VectorXcd b(2);
        b << 1, 0;
        const auto sol = solve_tls(A, b, VectorXd::Ones(2), VectorXd::Ones(2));
        CHECK(sol.x[0].real() == Approx(0.5));
        CHECK(sol.sigma_min == Approx(0.0));
        CHECK(sol.delta_A.norm() <= 1e-14);
        CHECK(sol.r_hat.norm() <= 1e-14);
    }
    SUBCASE("classic 2x1 instance") {
        MatrixXcd A(2, 1);
        A << 1, 0;
        VectorXcd b(2);
        b << 2, 1;
        const auto sol = solve_tls(A, b, VectorXd::Ones(2), VectorXd::Ones(2));
        CHECK(sol.x[0].real() == Approx(std::sqrt(2.0) + 1.0).epsilon(1e-12));
        CHECK(sol.sigma_min == Approx(std::sqrt(3.0 - 2.0 * std::sqrt(2.0))).epsilon(1e-12));
        // (A + dA) x = b + r
        const VectorXcd gap = (A + sol.delta_A) * sol.x - (b + sol.r_hat);
        CHECK(gap.norm() <= 1e-12);
    }
    SUBCASE("perturbation norm equals sigma_min") {
        CounterRng rng(3);
        const MatrixXcd A = random_matrix(rng, 8, 3);
        const VectorXcd b = random_vector(rng, 8);
        VectorXd W(8), T(4);
        for (int i = 0; i < 8; ++i) W[i] = rng.uniform(0.5, 2.0);
        for (int i = 0; i < 4; ++i) T[i] = rng.uniform(0.5, 2.0);
        const auto sol = solve_tls(A, b, W, T);
        MatrixXcd P(8, 4);
        P.leftCols(3) = sol.delta_A;
        P.col(3) = sol.r_hat;
        CHECK((W.asDiagonal() * P * T.asDiagonal()).norm() ==
              Approx(sol.sigma_min).epsilon(1e-12));
    }
}

TEST_CASE("solve_tls optimality among feasible perturbations") {
    CounterRng rng(77);
    const int m = 10, n = 3;
    const MatrixXcd A = random_matrix(rng, m, n);
    const VectorXcd b = random_vector(rng, m);
    const VectorXd W = VectorXd::Ones(m), T = VectorXd::Ones(n + 1);
    const auto sol = solve_tls(A, b, W, T);
    for (int t = 0; t < 1000; ++t) {
        // Random perturbation of A; repair consistency through the LS residual.
        const MatrixXcd dA = 0.3 * random_matrix(rng, m, n);
        const VectorXcd x = (A + dA).colPivHouseholderQr().solve(b);
        const VectorXcd r = (A + dA) * x - b;
        MatrixXcd P(m, n + 1);
        P.leftCols(n) = dA;
        P.col(n) = r;
        CHECK(P.norm() >= sol.sigma_min - 1e-12);
    }
}

TEST_CASE("solve_mixed_ls_tls") {
    SUBCASE("all columns exact reduces to WLS") {
        CounterRng rng(5);
        const MatrixXcd A = random_matrix(rng, 9, 3);
        const VectorXcd b = random_vector(rng, 9);
        VectorXd W(9);
        for (int i = 0; i < 9; ++i) W[i] = rng.uniform(0.5, 3.0);
        const auto mixed = solve_mixed_ls_tls(A, b, 3, W, VectorXd::Ones(4));
        const auto wls = solve_wls({A, b, W});
        CHECK((mixed.x - wls.x).norm() <= 1e-12 * (1.0 + wls.x.norm()));
        CHECK(mixed.delta_A.norm() == 0.0);
    }
    SUBCASE("no exact columns reduces to TLS") {
        CounterRng rng(6);
        const MatrixXcd A = random_matrix(rng, 9, 3);
        const VectorXcd b = random_vector(rng, 9);
        const auto mixed = solve_mixed_ls_tls(A, b, 0, VectorXd::Ones(9), VectorXd::Ones(4));
        const auto tls = solve_tls(A, b, VectorXd::Ones(9), VectorXd::Ones(4));
        CHECK((mixed.x - tls.x).norm() <= 1e-12 * (1.0 + tls.x.norm()));
    }
    SUBCASE("3x2 instance matches a direct scan oracle") {
        // Real instance; the mixed objective reduces to
        // f(x) = ||Ax-b||^2 / (1+x2^2) with x1 eliminated by 1-D LS.
        Eigen::MatrixXd Ar(3, 2);
        Ar << 1.0, 0.5, -0.4, 1.2, 0.3, -0.7;
        Eigen::VectorXd br(3);
        br << 1.1, 0.2, -0.9;
        const MatrixXcd A = Ar.cast<Complex>();
        const VectorXcd b = br.cast<Complex>();
        const auto sol = solve_mixed_ls_tls(A, b, 1, VectorXd::Ones(3), VectorXd::Ones(3));

        double best = std::numeric_limits<double>::infinity();
        double best_x2 = 0.0;
        for (double x2 = -3.0; x2 <= 3.0; x2 += 1e-3) {
            const Eigen::VectorXd rhs = br - x2 * Ar.col(1);
            const double x1 = Ar.col(0).dot(rhs) / Ar.col(0).squaredNorm();
            const double obj = (Ar.col(0) * x1 + Ar.col(1) * x2 - br).squaredNorm() /
                               (1.0 + x2 * x2);
            if (obj < best) {
                best = obj;
                best_x2 = x2;
            }
        }
        CHECK(sol.x[1].real() == Approx(best_x2).epsilon(2e-3));
        CHECK(sol.sigma_min * sol.sigma_min == Approx(best).epsilon(1e-3));
        // constraint and zero exact-column correction
        CHECK(((A + sol.delta_A) * sol.x - (b + sol.r_hat)).norm() <= 1e-10);
        CHECK(sol.delta_A.col(0).norm() == 0.0);
    }
}

TEST_CASE("solve_tls rejects non-generic instances") {
    SUBCASE("multiple smallest singular value") {
        // [A b] = I3: all singular values coincide.
        Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(3, 2);
        A(0, 0) = 1;
        A(1, 1) = 1;
        Eigen::VectorXcd b(3);
        b << 0, 0, 1;
        CHECK_THROWS_AS(solve_tls(A, b, VectorXd::Ones(3), VectorXd::Ones(3)), NonGenericTls);
    }
    SUBCASE("vanishing last right singular component") {
        // Second column of A is zero: the smallest singular direction avoids b.
        Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(3, 2);
        A(0, 0) = 1;
        A(1, 0) = 1;
        Eigen::VectorXcd b(3);
        b << 1, 2, 3;
        CHECK_THROWS_AS(solve_tls(A, b, VectorXd::Ones(3), VectorXd::Ones(3)), NonGenericTls);
    }
}

TEST_CASE("tls_objective_decomposition") {
    SUBCASE("zero residual") {
        CHECK(tls_objective_decomposition(VectorXcd::Zero(3), MatrixXcd::Ones(3, 2),
                                          VectorXd::Ones(3), VectorXd::Ones(3)) == 0.0);
    }
    SUBCASE("all-ones structure") {
        CounterRng rng(8);
        const VectorXcd r = random_vector(rng, 4);
        const int cols = 3;
        const double val = tls_objective_decomposition(r, MatrixXcd::Ones(4, cols),
                                                       VectorXd::Ones(4),
                                                       VectorXd::Ones(cols + 1));
        CHECK(val == Approx((cols + 1) * r.squaredNorm()));
    }
    SUBCASE("single entry") {
        VectorXcd r(1);
        r << 3;
        MatrixXcd C(1, 1);
        C << 2;
        CHECK(tls_objective_decomposition(r, C, VectorXd::Ones(1), VectorXd::Ones(2)) ==
              Approx(45.0));
    }
}
