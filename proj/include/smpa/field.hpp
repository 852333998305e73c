#pragma once

#include <cstdint>
#include <vector>

#include "smpa/errors.hpp"

namespace smpa {

using fe = std::uint64_t;  // field element value, always < p

// A prime modulus with the two derived quantities the comparison
// protocols care about: l, the bit length of p, and k, the number of
// one-bits in p-1. Cheap Fermat-based equality needs small k.
struct FieldParams {
    fe p = 0;
    int l = 0;  // bit length of p
    int k = 0;  // popcount(p - 1)

    static FieldParams from_prime(fe p);
    bool operator==(const FieldParams&) const = default;
};

// Deterministic Miller-Rabin, valid for all 64-bit inputs.
bool is_prime_u64(std::uint64_t n);

// Smallest prime p >= 2^min_bits with popcount(p-1) <= max_k.
// Candidates have the shape 2^a (+ 2^b (+ 2^c ...)) + 1 so that p-1 keeps
// at most max_k one-bits. Throws ValidationError on bad arguments and
// ProtocolError("NotFound") if nothing exists below 2^63.
FieldParams find_prime(int min_bits, int max_k);

// Arithmetic in Z_p. All operations are pure; values are reduced
// representatives in [0, p). Products go through 128-bit intermediates.
class Field {
public:
    Field() = default;
    explicit Field(FieldParams params) : fp_(params) {}
    explicit Field(fe prime) : fp_(FieldParams::from_prime(prime)) {}

    const FieldParams& params() const { return fp_; }
    fe p() const { return fp_.p; }
    int l() const { return fp_.l; }
    int k() const { return fp_.k; }

    fe reduce(std::uint64_t v) const { return v % fp_.p; }

    fe add(fe a, fe b) const {
        fe s = a + b;  // p < 2^63, no overflow
        return s >= fp_.p ? s - fp_.p : s;
    }
    fe sub(fe a, fe b) const { return a >= b ? a - b : a + fp_.p - b; }
    fe neg(fe a) const { return a == 0 ? 0 : fp_.p - a; }
    fe mul(fe a, fe b) const {
        return static_cast<fe>((static_cast<unsigned __int128>(a) * b) % fp_.p);
    }

    // Square-and-multiply; pow(0,0) = 1 by convention.
    fe pow(fe a, std::uint64_t e) const;
    fe inv(fe a) const;

    // Canonical square root in [1,(p-1)/2]; a must be a quadratic residue.
    // Tonelli-Shanks in the general case, a^((p+1)/4) when p = 3 mod 4.
    fe sqrt_canonical(fe a) const;

    // Weights w_i with f(target) = sum w_i * f(points[i]) for every
    // polynomial of degree < points.size(). Throws on duplicate points.
    std::vector<fe> lagrange_weights(const std::vector<fe>& points, fe target) const;

private:
    FieldParams fp_;
};

}  // namespace smpa
