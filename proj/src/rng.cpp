#include "agentorg/rng.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace agentorg {

StableHasher& StableHasher::add_bytes(std::string_view bytes) noexcept {
    for (unsigned char c : bytes) {
        state_ ^= c;
        state_ *= 1099511628211ULL;
    }
    return *this;
}

StableHasher& StableHasher::add(std::uint64_t value) noexcept {
    for (int i = 0; i < 8; ++i) {
        state_ ^= (value >> (8 * i)) & 0xFFu;
        state_ *= 1099511628211ULL;
    }
    return *this;
}

StableHasher& StableHasher::add(std::string_view text) noexcept {
    add(static_cast<std::uint64_t>(text.size()));
    return add_bytes(text);
}

std::uint64_t StableHasher::digest() const noexcept { return splitmix64(state_); }

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t RngKey::hash() const noexcept {
    return StableHasher{}.add(seed).add(std::string_view(run_id)).add(agent_index).add(round).digest();
}

double Rng::uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n) {
    // Rejection sampling removes modulo bias.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
    k = std::min(k, n);
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(below(n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

}  // namespace agentorg
