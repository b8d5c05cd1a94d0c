#include "padicpar/rng.hpp"

namespace padic {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t z) {
    // splitmix64 finalizer
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(mix64(seed + kGolden) ^ mix64(stream * kGolden + 0xD1B54A32D192ED03ULL))) {}

CounterRng::result_type CounterRng::operator()() {
    std::uint64_t c = counter_++;
    // two rounds keep adjacent counters decorrelated even for poor keys
    return mix64(mix64(key_ + c * kGolden) ^ key_);
}

double CounterRng::uniform01() {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

std::uint64_t CounterRng::below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = max() - (max() % n);
    for (;;) {
        std::uint64_t r = (*this)();
        if (r < limit) return r % n;
    }
}

CounterRng CounterRng::split(std::uint64_t sub) const {
    return CounterRng(mix64(key_ ^ mix64(sub + kGolden)), 0, 0);
}

}  // namespace padic
