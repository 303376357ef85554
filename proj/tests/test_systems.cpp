#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vfkit/io.hpp>
#include <vfkit/systems.hpp>

using namespace vfkit;
using doctest::Approx;

namespace {

StateSpaceModel scalar_system(double f, double b, double c) {
    StateSpaceModel ss;
    ss.F.resize(1, 1);
    ss.F(0, 0) = f;
    ss.B.resize(1);
    ss.B[0] = b;
    ss.C.resize(1);
    ss.C[0] = c;
    return ss;
}

}  // namespace

TEST_CASE("ss_eval on H = 1/(s+1)") {
    const auto ss = scalar_system(-1, 1, 1);
    auto at0 = ss_eval(ss, Complex(0, 0), true);
    CHECK(at0.h.real() == Approx(1.0));
    CHECK(at0.hp->real() == Approx(-1.0));

    auto ati = ss_eval(ss, Complex(0, 1), true);
    CHECK(ati.h.real() == Approx(0.5));
    CHECK(ati.h.imag() == Approx(-0.5));
    // H'(i) = -1/(1+i)^2 = 0.5i
    CHECK(ati.hp->real() == Approx(0.0));
    CHECK(ati.hp->imag() == Approx(0.5));
}

TEST_CASE("ss_eval sums first-order terms") {
    StateSpaceModel ss;
    ss.F = Eigen::MatrixXd::Zero(2, 2);
    ss.F(0, 0) = -1;
    ss.F(1, 1) = -2;
    ss.B.resize(2);
    ss.B << 1, 1;
    ss.C.resize(2);
    ss.C << 1, 1;
    auto at0 = ss_eval(ss, Complex(0, 0), true);
    CHECK(at0.h.real() == Approx(1.5));
    CHECK(at0.hp->real() == Approx(-1.25));
}

TEST_CASE("ss_eval throws on the spectrum") {
    const auto ss = scalar_system(-1, 1, 1);
    CHECK_THROWS_AS(ss_eval(ss, Complex(-1, 0)), SingularResolvent);
}

TEST_CASE("moment_at_infinity is C*B") {
    CHECK(moment_at_infinity(scalar_system(-1, 1, 1)).real() == Approx(1.0));
    CHECK(moment_at_infinity(scalar_system(-1, 0, 1)).real() == Approx(0.0));
    StateSpaceModel ss;
    ss.F = Eigen::MatrixXd::Zero(2, 2);
    ss.F(0, 0) = -1;
    ss.F(1, 1) = -2;
    ss.B.resize(2);
    ss.B << 1, 2;
    ss.C.resize(2);
    ss.C << 3, 4;
    CHECK(moment_at_infinity(ss).real() == Approx(11.0));
}

TEST_CASE("random_stable_siso construction") {
    SUBCASE("single real pole in the damped band") {
        const auto ss = random_stable_siso(1, 0, {1.0, 10.0});
        CHECK(ss.F(0, 0) >= -10.0 * 0.1);
        CHECK(ss.F(0, 0) <= -1.0 * 0.005);
    }
    SUBCASE("conjugate pairs, all stable") {
        const auto ss = random_stable_siso(4, 7, {1.0, 100.0});
        const Eigen::VectorXcd eig = ss.F.eigenvalues();
        REQUIRE(eig.size() == 4);
        for (int i = 0; i < 4; ++i) CHECK(eig[i].real() < 0.0);
        CVec ev(eig.data(), eig.data() + 4);
        CHECK(check_conjugate_closed(ev, 1e-9 * 100));
        CHECK(ss.is_stable());
    }
    SUBCASE("deterministic") {
        const auto a = random_stable_siso(6, 3, {0.5, 50.0});
        const auto b = random_stable_siso(6, 3, {0.5, 50.0});
        CHECK(a.F == b.F);
        CHECK(a.B == b.B);
        CHECK(a.C == b.C);
    }
    SUBCASE("bad band") {
        CHECK_THROWS_AS(random_stable_siso(2, 0, {10.0, 1.0}), InvalidBand);
    }
}

TEST_CASE("sample_system") {
    const auto ss = scalar_system(-1, 1, 1);
    SUBCASE("noise-free equals ss_eval, m_plus = CB") {
        const auto set = sample_system(ss, {Complex(0, 0)}, 0.0, 1, false);
        CHECK(set[0].value.real() == Approx(1.0));
        CHECK(set.m_plus()->real() == Approx(1.0));
        CHECK_FALSE(set[0].sigma.has_value());
    }
    SUBCASE("conjugate-closed noise keeps closure") {
        CVec pts = {Complex(0, 2), Complex(0, 1), Complex(0, 0), Complex(0, -1), Complex(0, -2)};
        const auto set = sample_system(ss, pts, 0.1, 7, false);
        CHECK(set.conjugate_closed());
        CHECK(*set[0].sigma == Approx(0.1));
        // real point got real noise
        CHECK(set[2].value.imag() == Approx(0.0));
    }
    SUBCASE("deterministic in (seed, points)") {
        CVec pts = {Complex(0, 3), Complex(0, -3)};
        const auto a = sample_system(ss, pts, 0.5, 11, true);
        const auto b = sample_system(ss, pts, 0.5, 11, true);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].value == b[i].value);
            CHECK(*a[i].deriv == *b[i].deriv);
        }
    }
}

TEST_CASE("derivative matches central differences") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const auto ss = random_stable_siso(7, seed, {0.5, 40.0});
        CounterRng rng(seed + 100);
        for (int t = 0; t < 5; ++t) {
            const Complex s(rng.uniform(0.1, 2.0), rng.uniform(-50.0, 50.0));
            const double d = 1e-4 * (1.0 + std::abs(s));
            const auto ev = ss_eval(ss, s, true);
            const Complex fd =
                (ss_eval(ss, s + d).h - ss_eval(ss, s - d).h) / (2.0 * d);
            CHECK(std::abs(fd - *ev.hp) <= 1e-6 * (1.0 + std::abs(*ev.hp)));
        }
    }
}

TEST_CASE("iw H(iw) approaches CB") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const auto ss = random_stable_siso(6, seed, {1.0, 20.0});
        const Complex cb = moment_at_infinity(ss);
        if (std::abs(cb) == 0.0) continue;
        const Complex s(0, 1e6 * 20.0);
        CHECK(std::abs(s * ss_eval(ss, s).h - cb) < 1e-3 * std::abs(cb));
    }
}

TEST_CASE("state-space JSON round-trip") {
    const auto ss = random_stable_siso(5, 4, {1.0, 10.0});
    const auto ss2 = ss_from_json(nlohmann::json::parse(ss_to_json(ss).dump()));
    CHECK(ss2.F == ss.F);
    CHECK(ss2.B == ss.B);
    CHECK(ss2.C == ss.C);
}
