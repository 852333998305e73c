#pragma once

#include <memory>
#include <vector>

#include "smpa/ops.hpp"

namespace smpa {

// One comparison operand: a local share or a public constant.
struct Operand {
    fe v = 0;
    bool shared = true;
};
inline Operand sh(fe v) { return Operand{v, true}; }
inline Operand pub(fe v) { return Operand{v, false}; }

namespace comp {

// equal([a],[b]) = 1 - ([a]-[b])^(p-1): l+k-2 multiplications in l rounds
// (l-1 when p-1 is a power of two, since the top bit needs no extra
// accumulator multiply).
struct Equal {
    ExpChain chain;
    fe res = 0;

    Equal() = default;
    Equal(OpCtx& c, fe a, fe b);
    bool step(OpCtx& c);
};

// Running OR over shared bits, [x] v [y] = [x]+[y]-[x][y] chained:
// size-1 multiplications in size-1 rounds.
struct PrefixOr {
    std::vector<fe> in;
    std::vector<fe> out;
    std::size_t i = 1;
    bool started = false;
    bool pending = false;
    Mul mul;

    PrefixOr() = default;
    explicit PrefixOr(std::vector<fe> bits) : in(std::move(bits)) {}
    bool step(OpCtx& c);
};

// [c < r] for public c and bitwise-shared r (LSB first). The XOR with a
// public bit is linear and the selector f marks the most significant
// differing bit, where f_j * r_j = f_j * (1 - c_j); the whole check costs
// just the prefix-OR: l-1 multiplications.
struct BitLtPublic {
    fe c_pub = 0;
    std::vector<fe> r_bits;
    PrefixOr po;
    int phase = 0;
    fe res = 0;

    BitLtPublic() = default;
    BitLtPublic(fe c, std::vector<fe> bits) : c_pub(c), r_bits(std::move(bits)) {}
    bool step(OpCtx& c);
};

// l shared random bits forming r < p, least significant first, plus the
// share of r itself. Draws are rejected (all l bits regenerated) whenever
// r >= p, decided by opening 1 - [p-1 < r].
struct BitwiseRandom {
    int phase = 0;
    int attempts = 0;
    std::vector<RandomBit> gens;
    std::vector<bool> gen_done;
    BitLtPublic chk;
    Open open;
    std::vector<fe> bits;
    fe value = 0;

    bool step(OpCtx& c);
};

// Share of the least significant bit of x (called with x = 2a to read off
// the a < p/2 predicate). Masks x with a bitwise-shared r, opens c = x+r,
// then LSB(x) = c0 XOR r0 XOR [c < r]; only the last XOR multiplies.
struct Lsb {
    fe x = 0;
    int phase = 0;
    BitwiseRandom br;
    Open open_c;
    BitLtPublic blt;
    Mul xm;
    fe w = 0;
    fe res = 0;

    Lsb() = default;
    explicit Lsb(fe x_) : x(x_) {}
    bool step(OpCtx& c);
};

// [a < b] from the three half-range predicates A = [a < p/2],
// B = [b < p/2], C = [(a-b) mod p < p/2], combined as
// A(1-B) + (1-A-B+2AB)(1-C). Public operands fold their predicate into
// the linear part, saving the corresponding LSB call and one of the two
// combination multiplications.
struct LessThan {
    Operand a, b;
    int phase = 0;
    Lsb lsb_a, lsb_b, lsb_c;
    bool need_a = false, need_b = false;
    bool done_a = false, done_b = false, done_c = false;
    Mul m1, m2;
    fe pa = 0, pb = 0, pc = 0;  // predicate values (shares or public 0/1)
    fe lin_ = 0;
    fe res = 0;

    LessThan() = default;
    LessThan(OpCtx& c, Operand a_, Operand b_);
    bool step(OpCtx& c);
};

// shortRange([a], x, y) = equal(0, prod_{i=x..y} ([a]-i)):
// (y-x) + l + k - 2 multiplications in ceil(log2(y-x+1)) + l rounds.
struct ShortRange {
    int phase = 0;
    ProductTree tree;
    Equal eq;
    fe res = 0;

    ShortRange() = default;
    ShortRange(OpCtx& c, fe a, fe x, fe y);
    bool step(OpCtx& c);
};

}  // namespace comp

namespace ops {

std::unique_ptr<Operation> equal(fe a, fe b);
std::unique_ptr<Operation> prefix_or(std::vector<fe> bits);
std::unique_ptr<Operation> bitwise_random();
std::unique_ptr<Operation> bitlt_public(fe c, std::vector<fe> r_bits);
std::unique_ptr<Operation> lsb(fe x2);
std::unique_ptr<Operation> less_than(Operand a, Operand b);
std::unique_ptr<Operation> short_range(fe a, fe x, fe y);

}  // namespace ops

// Deterministic multiplication cost of one invocation, before any
// randomness retries. Retries add (2l-1) per extra bitwise attempt and 1
// per extra random-bit attempt; the counters expose both.
std::uint64_t equal_mults(const FieldParams& fp);              // l + k - 2
std::uint64_t prefix_or_mults(const FieldParams& fp);          // l - 1
std::uint64_t less_than_mults(const FieldParams& fp, bool both_shared);
std::uint64_t short_range_mults(const FieldParams& fp, fe x, fe y);

}  // namespace smpa
