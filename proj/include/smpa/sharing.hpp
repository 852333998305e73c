#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "smpa/field.hpp"
#include "smpa/rng.hpp"

namespace smpa {

// Shamir secret sharing for m privacy peers over a fixed field.
// Slot i (0-based) holds the evaluation at x = i+1; the polynomial degree
// is t = floor((m-1)/2), so any t+1 shares reconstruct and any t reveal
// nothing. m must be at least 3 to tolerate one curious peer.
class ShamirScheme {
public:
    ShamirScheme(Field field, int m);

    const Field& field() const { return field_; }
    int m() const { return m_; }
    int t() const { return t_; }

    // shares[i] = f(i+1) for a random degree-t polynomial with f(0) = secret.
    std::vector<fe> share(fe secret, Rng& rng) const;

    // f(0) from indexed shares (slot, value). Uses exactly the t+1 shares
    // with the lowest slot indices; extras are ignored.
    fe reconstruct(const std::vector<std::pair<int, fe>>& shares) const;

    // Local share arithmetic. Applying these pointwise across peers yields
    // valid sharings of a+b, a+c, c*a, a-b.
    fe local_add(fe a_i, fe b_i) const { return field_.add(a_i, b_i); }
    fe local_sub(fe a_i, fe b_i) const { return field_.sub(a_i, b_i); }
    fe local_add_const(fe a_i, fe c) const { return field_.add(a_i, c); }
    fe local_mul_const(fe a_i, fe c) const { return field_.mul(a_i, c); }

private:
    Field field_;
    int m_;
    int t_;
};

}  // namespace smpa
