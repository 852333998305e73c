#pragma once

#include <cstdint>
#include <memory>
#include <random>

namespace smpa {

// Source of raw 64-bit randomness. Share generation draws through
// uniform_below(), which rejection-samples from the enclosing power of two
// so values in [0,p) are unbiased.
class Rng {
public:
    virtual ~Rng() = default;
    virtual std::uint64_t next_u64() = 0;

    // Uniform value in [0, bound), bound >= 1.
    std::uint64_t uniform_below(std::uint64_t bound);
};

// Cryptographically secure generator (OpenSSL RAND_bytes, buffered).
class SecureRng final : public Rng {
public:
    SecureRng();
    std::uint64_t next_u64() override;

private:
    void refill();
    std::uint8_t buf_[4096];
    std::size_t pos_;
};

// Deterministic generator for the simulator and tests only.
class SeededRng final : public Rng {
public:
    explicit SeededRng(std::uint64_t seed) : gen_(seed) {}
    std::uint64_t next_u64() override { return gen_(); }

private:
    std::mt19937_64 gen_;
};

// Derives a distinct stream for each peer from one run seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace smpa
