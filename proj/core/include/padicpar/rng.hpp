#pragma once

#include <cstdint>
#include <limits>

namespace padic {

/// Counter-based generator: output k of stream s under seed is a fixed
/// function of (seed, s, k), so any stream can be replayed or split
/// without touching shared state.
class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, std::uint64_t stream);

    result_type operator()();

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01();

    /// Uniform integer in [0, n); unbiased (rejection on the top range).
    std::uint64_t below(std::uint64_t n);

    /// Child stream keyed by this generator's key and `sub`; does not advance this one.
    CounterRng split(std::uint64_t sub) const;

    std::uint64_t counter() const { return counter_; }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

private:
    CounterRng(std::uint64_t key, std::uint64_t counter, int) : key_(key), counter_(counter) {}
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t z);

}  // namespace padic
