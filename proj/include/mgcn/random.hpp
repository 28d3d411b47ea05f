#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace mgcn {

/// Seeded generator with portable derived distributions.
///
/// Only the raw 64-bit engine output is taken from the standard library
/// (mt19937_64 is bit-specified); uniform, normal and bounded draws are
/// computed here so a seed yields the same stream on every toolchain.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    /// Uniform integer in [0, bound).
    std::size_t below(std::size_t bound);

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Mixes a base seed with a stream tag so independent consumers of one
/// user seed do not share streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

} // namespace mgcn
