#include "vfkit/systems.hpp"

#include <cmath>

namespace vfkit {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t CounterRng::next_u64() { return splitmix64(key_ ^ splitmix64(counter_++)); }

double CounterRng::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

double CounterRng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = 0.0, u2 = 0.0;
    do {
        u1 = uniform01();
    } while (u1 <= 0.0);
    u2 = uniform01();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return mag * std::cos(2.0 * M_PI * u2);
}

bool StateSpaceModel::is_stable() const {
    const Eigen::VectorXcd eig = F.eigenvalues();
    for (int i = 0; i < eig.size(); ++i)
        if (eig[i].real() >= 0.0) return false;
    return true;
}

SsEval ss_eval(const StateSpaceModel& ss, Complex s, bool with_deriv) {
    const int n = ss.n();
    Eigen::MatrixXcd R = -ss.F.cast<Complex>();
    R.diagonal().array() += s;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(R);
    if (qr.rank() < n) throw SingularResolvent("ss_eval: s is an eigenvalue of F");
    const Eigen::VectorXcd x = qr.solve(ss.B.cast<Complex>());
    SsEval out;
    out.h = (ss.C.cast<Complex>() * x).value();
    if (with_deriv) {
        const Eigen::VectorXcd y = qr.solve(x);
        out.hp = -(ss.C.cast<Complex>() * y).value();
    }
    return out;
}

Complex moment_at_infinity(const StateSpaceModel& ss) {
    return Complex((ss.C * ss.B).value(), 0.0);
}

StateSpaceModel random_stable_siso(int n, std::uint64_t seed, std::array<double, 2> band) {
    if (n < 1) throw InvalidParam("random_stable_siso: n must be >= 1");
    const double wlo = band[0], whi = band[1];
    if (!(0.0 < wlo && wlo < whi)) throw InvalidBand("random_stable_siso: need 0 < lo < hi");

    CounterRng rng(splitmix64(seed) ^ 0x5f3759df9e3779b9ULL);
    const int npairs = n / 2;
    StateSpaceModel ss;
    ss.F = Eigen::MatrixXd::Zero(n, n);

    for (int k = 0; k < npairs; ++k) {
        const double t = npairs > 1 ? static_cast<double>(k) / (npairs - 1) : 0.5;
        const double w = wlo * std::pow(whi / wlo, t);
        const double d = rng.uniform(0.005, 0.1);
        const double re = -d * w;
        // 2x2 real block with eigenvalues re +- i*w.
        ss.F(2 * k, 2 * k) = re;
        ss.F(2 * k + 1, 2 * k + 1) = re;
        ss.F(2 * k, 2 * k + 1) = w;
        ss.F(2 * k + 1, 2 * k) = -w;
    }
    if (n % 2 == 1) {
        const double d = rng.uniform(0.005, 0.1);
        ss.F(n - 1, n - 1) = -d * std::sqrt(wlo * whi);
    }

    ss.B.resize(n);
    ss.C.resize(n);
    for (int i = 0; i < n; ++i) ss.B[i] = rng.normal();
    for (int i = 0; i < n; ++i) ss.C[i] = rng.normal();
    return ss;
}

SampleSet sample_system(const StateSpaceModel& ss, const CVec& points, double noise_std,
                        std::uint64_t seed, bool with_deriv) {
    if (noise_std < 0.0) throw InvalidParam("sample_system: noise_std must be nonnegative");
    std::vector<FrequencySample> samples(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const SsEval ev = ss_eval(ss, points[i], with_deriv);
        samples[i].s = points[i];
        samples[i].value = ev.h;
        samples[i].deriv = ev.hp;
        if (noise_std > 0.0) samples[i].sigma = noise_std;
    }

    if (noise_std > 0.0) {
        double scale = 0.0;
        for (const auto& p : points) scale = std::max(scale, std::abs(p));
        const double tol = 1e-9 * (1.0 + scale);

        if (check_conjugate_closed(points, tol)) {
            // Draw one noise value per conjugate pair; the partner gets the
            // conjugate, real points get real noise of the full std.
            const auto part = conjugate_partition(points, tol);
            for (const auto& pr : part.pairs) {
                CounterRng rng(splitmix64(seed) ^ splitmix64(0xA0 + pr.plus));
                const Complex dz =
                    noise_std / std::sqrt(2.0) * Complex(rng.normal(), rng.normal());
                samples[pr.plus].value += dz;
                samples[pr.minus].value += std::conj(dz);
            }
            for (auto idx : part.reals) {
                CounterRng rng(splitmix64(seed) ^ splitmix64(0xA0 + idx));
                samples[idx].value += noise_std * rng.normal();
            }
        } else {
            for (std::size_t i = 0; i < points.size(); ++i) {
                CounterRng rng(splitmix64(seed) ^ splitmix64(0xA0 + i));
                samples[i].value +=
                    noise_std / std::sqrt(2.0) * Complex(rng.normal(), rng.normal());
            }
        }
    }
    return SampleSet(std::move(samples), moment_at_infinity(ss));
}

}  // namespace vfkit
