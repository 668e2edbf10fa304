#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace agentorg {

// FNV-1a (64-bit) followed by a splitmix64 finalizer. Stable across platforms.
class StableHasher {
public:
    StableHasher& add_bytes(std::string_view bytes) noexcept;
    StableHasher& add(std::uint64_t value) noexcept;  // little-endian, 8 bytes
    StableHasher& add(std::int64_t value) noexcept { return add(static_cast<std::uint64_t>(value)); }
    StableHasher& add(std::string_view text) noexcept;  // length-prefixed
    std::uint64_t digest() const noexcept;

private:
    std::uint64_t state_ = 14695981039346656037ULL;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Identifies one pseudo-random stream: (seed, run_id, agent_index, round).
struct RngKey {
    std::uint64_t seed = 0;
    std::string run_id;
    std::int64_t agent_index = 0;
    std::int64_t round = 0;

    std::uint64_t hash() const noexcept;
};

// Deterministic generator. std::mt19937_64 output is fixed by the standard; the
// distribution helpers below are written out so results do not depend on the
// standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    explicit Rng(const RngKey& key) : engine_(key.hash()) {}

    std::uint64_t next() { return engine_(); }
    // Uniform in [0, 1).
    double uniform01();
    // Uniform in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n);
    bool bernoulli(double p) { return uniform01() < p; }

    // k distinct values from [0, n) in draw order (partial Fisher-Yates).
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

private:
    std::mt19937_64 engine_;
};

}  // namespace agentorg
