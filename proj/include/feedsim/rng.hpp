#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace feedsim {

// SplitMix64 finalizer, used to derive independent substreams from a master
// seed.  Every per-user stream is a pure function of (master, tags...), so
// simulation output does not depend on scheduling or worker count.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t a,
                                    std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = splitmix64(master ^ 0x6a09e667f3bcc909ULL);
    s = splitmix64(s ^ a);
    s = splitmix64(s ^ b);
    s = splitmix64(s ^ c);
    return s;
}

// Thin generator with explicit draw routines.  std:: distributions are
// avoided for anything that feeds the data-generating process so that a
// seed pins the byte stream, not just the distribution.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static Rng substream(std::uint64_t master, std::uint64_t a,
                         std::uint64_t b = 0, std::uint64_t c = 0) {
        return Rng(substream_seed(master, a, b, c));
    }

    std::uint64_t bits() { return engine_(); }

    // uniform on [0, 1)
    double uniform() {
        return (engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // index uniform on {0, ..., n-1}
    std::size_t pick(std::size_t n) {
        return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
    }

    // standard normal via Box-Muller (one value per call)
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // binomial count by direct Bernoulli trials; n stays modest here
    long binomial(long n, double p) {
        long k = 0;
        for (long i = 0; i < n; ++i) k += bernoulli(p);
        return k;
    }

    // Marsaglia-Tsang; boosted for shape < 1
    double gamma(double shape) {
        if (shape <= 0.0) throw std::domain_error("gamma shape must be positive");
        if (shape < 1.0) {
            const double u = uniform();
            return gamma(shape + 1.0) * std::pow(u > 0 ? u : 1e-300, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u > 0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double beta(double a, double b) {
        const double x = gamma(a);
        const double y = gamma(b);
        return x / (x + y);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace feedsim
