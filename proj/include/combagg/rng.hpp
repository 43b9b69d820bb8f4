#pragma once

#include <cstdint>
#include <random>

namespace combagg {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic random stream for one (seed, stream) pair.
///
/// The engine is mt19937_64, whose output sequence is fixed by the standard.
/// Small uniform choices are cut from the high bits of each 64-bit word, so
/// no implementation-defined distribution is involved.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0) {
        std::uint64_t s = seed ^ (0xd1b54a32d192ed03ULL * (stream + 1));
        std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(s)),
                          static_cast<std::uint32_t>(splitmix64(s)),
                          static_cast<std::uint32_t>(splitmix64(s)),
                          static_cast<std::uint32_t>(splitmix64(s))};
        engine_.seed(seq);
    }

    std::uint64_t next() { return engine_(); }

    // k uniform bits, k in [1, 32]
    std::uint32_t bits(int k) {
        if (avail_ < k) {
            word_ = engine_();
            avail_ = 64;
        }
        auto out = static_cast<std::uint32_t>(word_ >> (64 - k));
        word_ <<= k;
        avail_ -= k;
        return out;
    }

    // Uniform index below d; d = 2 and d = 4 use one or two bits.
    std::uint32_t below(std::uint32_t d) {
        if (d == 2) return bits(1);
        if (d == 4) return bits(2);
        // multiply-shift with rejection for a general bound
        const std::uint64_t threshold = (0 - std::uint64_t(d)) % d;
        for (;;) {
            std::uint64_t r = engine_();
            auto m = static_cast<unsigned __int128>(r) * d;
            if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::uint32_t>(m >> 64);
        }
    }

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
    std::uint64_t word_ = 0;
    int avail_ = 0;
};

}  // namespace combagg
