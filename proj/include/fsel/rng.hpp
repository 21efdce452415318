#ifndef FSEL_RNG_HPP
#define FSEL_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

#include "fsel/common.hpp"

namespace fsel {

// splitmix64 finalizer; used to derive independent substreams (per video,
// per training run) from one user-facing seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// mt19937_64 with hand-rolled output transforms. The std distributions are
// implementation-defined, which would break byte-reproducibility of seeded
// runs across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n)
    std::uint64_t uniform_int(std::uint64_t n) { return next_u64() % n; }

    // standard normal via Box-Muller; second value of each pair is cached
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    Vec gaussian_vector(std::size_t dim) {
        Vec v(dim);
        for (auto& x : v) x = normal();
        return v;
    }

    // uniformly random direction on the unit sphere
    Vec unit_vector(std::size_t dim) {
        for (;;) {
            Vec v = gaussian_vector(dim);
            double sq = 0.0;
            for (double x : v) sq += x * x;
            if (sq > 1e-24) {
                const double inv = 1.0 / std::sqrt(sq);
                for (auto& x : v) x *= inv;
                return v;
            }
        }
    }

    // Fisher-Yates shuffle
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace fsel

#endif
