// Seedable RNG with derivable sub-streams, Haar unitary and simplex sampling.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace distilkit {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Mixes a master seed with stream indices so that every sub-stream is a pure
// function of (master_seed, indices). Gaussian draws use Box-Muller on raw
// 64-bit output, so sequences do not depend on the standard library's
// distribution implementations.
class Rng {
   public:
    explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}

    static Rng substream(std::uint64_t master, std::uint64_t i0,
                         std::uint64_t i1 = 0, std::uint64_t i2 = 0) {
        std::uint64_t s = master;
        std::uint64_t h = splitmix64(s);
        s = h ^ (i0 + 0x9e3779b97f4a7c15ULL);
        h = splitmix64(s);
        s = h ^ (i1 + 0xd1b54a32d192ed03ULL);
        h = splitmix64(s);
        s = h ^ (i2 + 0x8cb92ba72f3d8dd7ULL);
        return Rng(splitmix64(s));
    }

    std::uint64_t raw() { return engine_(); }

    // Uniform in (0, 1]; never returns 0 so log() is safe.
    double uniform() {
        return (static_cast<double>(raw() >> 11) + 1.0) * 0x1.0p-53;
    }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u = uniform();
        const double v = uniform();
        const double r = std::sqrt(-2.0 * std::log(u));
        spare_ = r * std::sin(2.0 * M_PI * v);
        have_spare_ = true;
        return r * std::cos(2.0 * M_PI * v);
    }

    Complex gaussian_complex() {
        const double re = gaussian();
        const double im = gaussian();
        return {re, im};
    }

   private:
    static std::uint64_t mix(std::uint64_t seed) {
        std::uint64_t s = seed;
        return splitmix64(s);
    }

    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Haar-distributed unitary via QR of a complex Ginibre matrix, with the
// column phases fixed so that R has a positive diagonal.
inline Matrix haar_unitary(int d, Rng& rng) {
    Matrix a(d, d);
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i) a(i, j) = rng.gaussian_complex();
    Eigen::HouseholderQR<Matrix> qr(a);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j) {
        Complex rjj = r(j, j);
        double m = std::abs(rjj);
        Complex phase = (m > 0) ? rjj / m : Complex(1, 0);
        q.col(j) *= std::conj(phase);
    }
    return q;
}

// Uniform point on the probability simplex (normalized exponentials).
inline RealVector simplex_point(int n, Rng& rng) {
    RealVector x(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        x[i] = -std::log(rng.uniform());
        sum += x[i];
    }
    return x / sum;
}

}  // namespace distilkit
