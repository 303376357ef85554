#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vfkit/io.hpp>
#include <vfkit/systems.hpp>
#include <vfkit/types.hpp>

using namespace vfkit;
using doctest::Approx;

namespace {

PoleResidueModel random_real_symmetric_model(std::uint64_t seed, int npairs, int nreal) {
    CounterRng rng(seed);
    PoleResidueModel m;
    for (int k = 0; k < npairs; ++k) {
        const Complex p(-rng.uniform(0.1, 2.0), rng.uniform(0.5, 20.0));
        const Complex r(rng.normal(), rng.normal());
        m.poles.push_back(p);
        m.poles.push_back(std::conj(p));
        m.residues.push_back(r);
        m.residues.push_back(std::conj(r));
    }
    for (int k = 0; k < nreal; ++k) {
        m.poles.push_back(Complex(-rng.uniform(0.2, 5.0) - k, 0.0));
        m.residues.push_back(Complex(rng.normal(), 0.0));
    }
    m.real_symmetric = true;
    return m;
}

}  // namespace

TEST_CASE("eval_pole_residue matches hand values") {
    PoleResidueModel m{{Complex(-1, 0)}, {Complex(1, 0)}};
    CHECK(eval_pole_residue(m, Complex(0, 0)).real() == Approx(1.0));
    CHECK(eval_pole_residue(m, Complex(0, 0)).imag() == Approx(0.0));

    const Complex at_i = eval_pole_residue(m, Complex(0, 1));
    CHECK(at_i.real() == Approx(0.5));
    CHECK(at_i.imag() == Approx(-0.5));

    PoleResidueModel two{{Complex(-1, 0), Complex(-2, 0)}, {Complex(1, 0), Complex(-1, 0)}};
    CHECK(eval_pole_residue(two, Complex(0, 0)).real() == Approx(0.5));
}

TEST_CASE("eval_pole_residue rejects evaluation at a pole") {
    PoleResidueModel m{{Complex(-1, 0)}, {Complex(1, 0)}};
    CHECK_THROWS_AS(eval_pole_residue(m, Complex(-1, 0)), PoleCollision);
    CHECK_THROWS_AS(eval_pole_residue(m, Complex(-1 + 1e-15, 0)), PoleCollision);
}

TEST_CASE("eval_barycentric matches hand values") {
    BarycentricState s1{{Complex(-1, 0)}, {Complex(1, 0)}, {Complex(0, 0)}};
    auto v1 = eval_barycentric(s1, Complex(0, 0));
    CHECK(v1.value.real() == Approx(1.0));
    CHECK(v1.denom.real() == Approx(1.0));

    BarycentricState s2{{Complex(-1, 0)}, {Complex(1, 0)}, {Complex(0.5, 0)}};
    auto v2 = eval_barycentric(s2, Complex(0, 0));
    CHECK(v2.value.real() == Approx(2.0 / 3.0));
    CHECK(v2.denom.real() == Approx(1.5));

    BarycentricState s3{{Complex(-1, 0), Complex(-3, 0)},
                        {Complex(0, 0), Complex(0, 0)},
                        {Complex(1, 0), Complex(1, 0)}};
    auto v3 = eval_barycentric(s3, Complex(0, 0));
    CHECK(v3.value.real() == Approx(0.0));
    CHECK(v3.denom.real() == Approx(7.0 / 3.0));
}

TEST_CASE("eval_barycentric error paths") {
    BarycentricState s{{Complex(-1, 0)}, {Complex(1, 0)}, {Complex(-1, 0)}};
    // denominator 1 - 1/(s+1) vanishes at s = 0
    CHECK_THROWS_AS(eval_barycentric(s, Complex(0, 0)), DenominatorZero);
    CHECK_THROWS_AS(eval_barycentric(s, Complex(-1, 0)), PoleCollision);
}

TEST_CASE("check_conjugate_closed") {
    CHECK(check_conjugate_closed({Complex(0, 1), Complex(0, -1)}, 1e-12));
    CHECK(check_conjugate_closed({Complex(-1, 0)}, 1e-12));
    CHECK_FALSE(check_conjugate_closed({Complex(0, 1)}, 1e-12));
    CHECK(check_conjugate_closed({Complex(0, 1), Complex(1e-10, -1)}, 1e-9));
    CHECK_FALSE(check_conjugate_closed({Complex(0, 1), Complex(1e-10, -1)}, 1e-11));
}

TEST_CASE("realify_pairs") {
    SUBCASE("already paired stays put") {
        PoleResidueModel m{{Complex(-1, 1), Complex(-1, -1)},
                           {Complex(1, 0.1), Complex(1, -0.1)}};
        const auto out = realify_pairs(m, 1e-9);
        CHECK(out.poles[0] == Complex(-1, 1));
        CHECK(out.poles[1] == Complex(-1, -1));
        CHECK(out.residues[0] == Complex(1, 0.1));
        CHECK(out.real_symmetric);
    }
    SUBCASE("real pole projects its residue") {
        PoleResidueModel m{{Complex(-1 + 1e-14, 0)}, {Complex(2, 1e-15)}};
        const auto out = realify_pairs(m, 1e-9);
        CHECK(out.poles[0].real() == Approx(-1 + 1e-14));
        CHECK(out.poles[0].imag() == 0.0);
        CHECK(out.residues[0].imag() == 0.0);
        CHECK(out.residues[0].real() == Approx(2.0));
    }
    SUBCASE("near pair averaged to exact conjugates") {
        PoleResidueModel m{{Complex(-1, 1), Complex(-1.000001, -1)},
                           {Complex(2, 3), Complex(2, -3)}};
        const auto out = realify_pairs(m, 1e-3);
        CHECK(out.poles[0] == std::conj(out.poles[1]));
        CHECK(out.poles[0].real() == Approx(-1.0000005));
        CHECK(out.residues[0] == std::conj(out.residues[1]));
    }
    SUBCASE("unpairable throws") {
        PoleResidueModel m{{Complex(-1, 1)}, {Complex(1, 0)}};
        CHECK_THROWS_AS(realify_pairs(m, 1e-6), NotPairable);
    }
}

TEST_CASE("real-symmetric models evaluate conjugate-symmetrically") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto m = random_real_symmetric_model(seed, 2 + seed % 3, seed % 2);
        CounterRng rng(seed * 77 + 1);
        for (int t = 0; t < 10; ++t) {
            const double w = rng.uniform(0.01, 50.0);
            const Complex up = eval_pole_residue(m, Complex(0, w));
            const Complex dn = eval_pole_residue(m, Complex(0, -w));
            CHECK(std::abs(dn - std::conj(up)) <= 1e-12 * (1.0 + std::abs(up)));
            CHECK(std::abs(up.imag() + dn.imag()) <= 1e-12 * (1.0 + std::abs(up)));
        }
    }
}

TEST_CASE("barycentric state with zero varphi equals pole-residue form") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto m = random_real_symmetric_model(seed, 2, 1);
        BarycentricState st{m.poles, m.residues, CVec(m.poles.size(), Complex(0, 0))};
        CounterRng rng(seed * 31 + 7);
        for (int t = 0; t < 10; ++t) {
            const Complex s(rng.uniform(0.0, 3.0), rng.uniform(-30.0, 30.0));
            const Complex a = eval_pole_residue(m, s);
            const auto b = eval_barycentric(st, s);
            CHECK(std::abs(a - b.value) <= 1e-14 * (1.0 + std::abs(a)));
            CHECK(b.denom == Complex(1.0, 0.0));
        }
    }
}

TEST_CASE("JSON round-trips are bit-exact") {
    const auto m = random_real_symmetric_model(42, 3, 1);
    const auto m2 = model_from_json(nlohmann::json::parse(model_to_json(m).dump()));
    REQUIRE(m2.order() == m.order());
    for (std::size_t j = 0; j < m.order(); ++j) {
        CHECK(m2.poles[j] == m.poles[j]);
        CHECK(m2.residues[j] == m.residues[j]);
    }
    CHECK(m2.real_symmetric == m.real_symmetric);

    std::vector<FrequencySample> list;
    CounterRng rng(5);
    for (int i = 0; i < 6; ++i) {
        FrequencySample f;
        f.s = Complex(rng.normal(), rng.normal());
        f.value = Complex(rng.normal(), rng.normal());
        if (i % 2) f.deriv = Complex(rng.normal(), rng.normal());
        if (i % 3 == 0) f.sigma = rng.uniform(0.1, 2.0);
        list.push_back(f);
    }
    const SampleSet set(list, Complex(0.25, -1.5));
    const auto set2 = samples_from_json(nlohmann::json::parse(samples_to_json(set).dump()));
    REQUIRE(set2.size() == set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        CHECK(set2[i].s == set[i].s);
        CHECK(set2[i].value == set[i].value);
        CHECK(set2[i].deriv == set[i].deriv);
        CHECK(set2[i].sigma == set[i].sigma);
    }
    CHECK(*set2.m_plus() == *set.m_plus());
}

TEST_CASE("sample CSV round-trips bit-exactly") {
    std::vector<FrequencySample> list;
    CounterRng rng(9);
    for (int i = 0; i < 5; ++i) {
        FrequencySample f;
        f.s = Complex(rng.normal() * 1e3, rng.normal() / 7.0);
        f.value = Complex(rng.normal(), rng.normal() * 1e-8);
        f.deriv = Complex(rng.normal(), rng.normal());
        f.sigma = rng.uniform(1e-6, 2.0);
        list.push_back(f);
    }
    const SampleSet set(list);
    const SampleSet back = samples_from_csv(samples_to_csv(set));
    REQUIRE(back.size() == set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        CHECK(back[i].s == set[i].s);
        CHECK(back[i].value == set[i].value);
        CHECK(back[i].deriv == set[i].deriv);
        CHECK(back[i].sigma == set[i].sigma);
    }
}

TEST_CASE("sample CSV column layouts") {
    SUBCASE("values plus sigma, no derivative") {
        const std::string text =
            "s_re,s_im,h_re,h_im,sigma\n"
            "0,1,0.5,-0.5,0.01\n"
            "0,-1,0.5,0.5,0.01\n";
        const auto set = samples_from_csv(text);
        REQUIRE(set.size() == 2);
        CHECK(*set[0].sigma == 0.01);
        CHECK_FALSE(set[0].deriv.has_value());
    }
    SUBCASE("derivative without sigma") {
        const std::string text =
            "s_re,s_im,h_re,h_im,hp_re,hp_im\n"
            "0,1,0.5,-0.5,0,0.5\n";
        const auto set = samples_from_csv(text);
        CHECK(*set[0].deriv == Complex(0, 0.5));
        CHECK_FALSE(set[0].sigma.has_value());
    }
    SUBCASE("malformed input throws") {
        CHECK_THROWS_AS(samples_from_csv("s_re,s_im\n1,2\n"), ParseError);
        CHECK_THROWS_AS(samples_from_csv("s_re,s_im,h_re,h_im\n1,2,3\n"), ParseError);
        CHECK_THROWS_AS(samples_from_csv("s_re,s_im,h_re,h_im\n1,2,3,abc\n"), ParseError);
        CHECK_THROWS_AS(samples_from_csv("s_re,s_im,h_re,h_im,hp_re\n1,2,3,4,5\n"),
                        ParseError);
    }
}

TEST_CASE("SampleSet flags conjugate closure") {
    std::vector<FrequencySample> list = {
        {Complex(0, 1), Complex(0.5, -0.5)},
        {Complex(0, -1), Complex(0.5, 0.5)},
        {Complex(0, 0), Complex(1.0, 0.0)},
    };
    CHECK(SampleSet(list).conjugate_closed());

    list[1].value = Complex(0.5, 0.4);  // breaks value symmetry
    CHECK_FALSE(SampleSet(list).conjugate_closed());
}
