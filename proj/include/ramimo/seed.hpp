#pragma once

#include <cstdint>
#include <random>

namespace ramimo {

/// Purpose tag of an RNG substream. Distinct (realization, purpose, batch)
/// tuples map to statistically independent streams, so symbols and noise can
/// be redrawn with the channels of a realization held fixed.
enum class Stream : std::uint64_t {
    ue_positions = 1,
    ue_repeater_fading = 2,
    repeater_bs_fading = 3,
    ue_bs_fading = 4,
    symbols = 5,
    noise = 6,
};

namespace detail {

// splitmix64 finalizer; strong enough to decorrelate counter-derived seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace detail

/// Derives independent substreams from one master seed. Stateless: the
/// stream for a given (realization, purpose, batch) does not depend on
/// execution order or on how many streams are drawn concurrently.
struct SeedPolicy {
    std::uint64_t master_seed = 0;

    std::uint64_t substream_seed(std::uint64_t realization, Stream purpose,
                                 std::uint64_t batch = 0) const {
        std::uint64_t s = detail::splitmix64(master_seed);
        s = detail::splitmix64(s ^ realization);
        s = detail::splitmix64(s ^ static_cast<std::uint64_t>(purpose));
        s = detail::splitmix64(s ^ batch);
        return s;
    }

    std::mt19937_64 engine(std::uint64_t realization, Stream purpose,
                           std::uint64_t batch = 0) const {
        return std::mt19937_64(substream_seed(realization, purpose, batch));
    }
};

}  // namespace ramimo
