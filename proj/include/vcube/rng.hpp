#pragma once

#include <cmath>
#include <cstdint>

namespace vcube {

// Counter-free splitmix64 stream. Deliberately self-contained: the standard
// library's distributions are implementation-defined, and captured noise must
// be byte-stable across toolchains, not just across runs of one binary.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    // Derives an independent stream for (seed, camera, frame) style keys.
    static Rng fork(uint64_t seed, uint64_t a, uint64_t b) {
        Rng r(seed ^ (0x9e3779b97f4a7c15ULL * (a + 1)) ^ (0xbf58476d1ce4e5b9ULL * (b + 1)));
        r.next();  // decorrelate nearby keys
        return r;
    }

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; one value per call, the twin is cached.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace vcube
