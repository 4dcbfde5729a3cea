#pragma once

#include <cmath>
#include <cstdint>

namespace vssqn {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t mix_key(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ULL)) + index);
}

} // namespace detail

/// Identifies one realization: the index-th draw of stream (seed, stream_id).
struct Realization {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    std::uint64_t index = 0;
};

/**
 * @brief Generator private to one realization.
 *
 * Counter based, so the numbers it yields depend only on the realization and
 * the order of requests. Distributions are hand-rolled because the standard
 * ones are not reproducible across library implementations.
 */
class SampleRng {
public:
    explicit SampleRng(const Realization& w) noexcept
        : key_(detail::mix_key(w.seed, w.stream_id, w.index)) {}

    std::uint64_t next_u64() noexcept { return detail::splitmix64(key_ + 0xD1B54A32D192ED03ULL * ++lane_); }

    /// Uniform on [0, 1).
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal, Box-Muller with a cached spare.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform(); // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double t = 6.283185307179586 * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) noexcept {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

private:
    std::uint64_t key_;
    std::uint64_t lane_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// A replayable batch: realizations first .. first+count-1 of one stream.
struct SampleHandle {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    std::uint64_t first = 0;
    std::uint64_t count = 0;

    std::uint64_t size() const noexcept { return count; }
    Realization operator[](std::uint64_t j) const noexcept { return {seed, stream_id, first + j}; }
};

/// Stream of realizations with a counter. Copying forks the state.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0) noexcept
        : seed_(seed), stream_(stream_id) {}

    /// Reserve the next `count` realizations.
    SampleHandle take(std::uint64_t count) noexcept {
        SampleHandle h{seed_, stream_, counter_, count};
        counter_ += count;
        return h;
    }

    /// Generator for the next single realization.
    SampleRng next() noexcept { return SampleRng(Realization{seed_, stream_, counter_++}); }

    RngStream substream(std::uint64_t id) const noexcept {
        return RngStream(seed_, detail::splitmix64(stream_ ^ (0xA0761D6478BD642FULL * (id + 1))));
    }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_; }
    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

} // namespace vssqn
