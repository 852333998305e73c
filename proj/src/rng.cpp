#include "smpa/rng.hpp"

#include <openssl/rand.h>

#include <bit>
#include <cstring>
#include <stdexcept>

namespace smpa {

std::uint64_t Rng::uniform_below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform_below: zero bound");
    if (bound == 1) return 0;
    const int bits = std::bit_width(bound - 1);
    const std::uint64_t mask = (bits >= 64) ? ~0ULL : ((1ULL << bits) - 1);
    for (;;) {
        std::uint64_t v = next_u64() & mask;
        if (v < bound) return v;
    }
}

SecureRng::SecureRng() : pos_(sizeof(buf_)) {}

void SecureRng::refill() {
    if (RAND_bytes(buf_, sizeof(buf_)) != 1)
        throw std::runtime_error("RAND_bytes failed");
    pos_ = 0;
}

std::uint64_t SecureRng::next_u64() {
    if (pos_ + 8 > sizeof(buf_)) refill();
    std::uint64_t v;
    std::memcpy(&v, buf_ + pos_, 8);
    pos_ += 8;
    return v;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer over (seed, stream)
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace smpa
