#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "smpa/engine.hpp"

namespace smpa {

// Reusable building blocks for operations. Each component advances one
// engine round per step() call and returns true once complete. Composites
// drive their children in a fixed order every round, which keeps the
// emit/take streams aligned across peers.
namespace comp {

// Distributed multiplication: reshare the local product, then combine the
// received shares with degree-2t interpolation weights. One round.
struct Mul {
    fe a = 0, b = 0;
    fe res = 0;
    int phase = 0;

    Mul() = default;
    Mul(fe a_, fe b_) : a(a_), b(b_) {}
    bool step(OpCtx& c);
};

// Public opening of a degree-t sharing. One round.
struct Open {
    fe share = 0;
    std::string label;
    bool internal = false;
    fe value = 0;
    int phase = 0;

    Open() = default;
    Open(fe s, std::string lbl, bool internal_) : share(s), label(std::move(lbl)), internal(internal_) {}
    bool step(OpCtx& c);
};

// Joint random value: every peer deals a sharing of a local random draw;
// the sum is a sharing of a value no t peers know. One round.
struct JointRandom {
    fe res = 0;
    int phase = 0;
    bool step(OpCtx& c);
};

// Random shared bit via the square-root method: open r^2 for random r,
// retry on zero, output (u^-1 r + 1)/2 with u the canonical root.
// One multiplication and one opening per attempt, three rounds.
struct RandomBit {
    int phase = 0;
    int attempts = 0;
    JointRandom rnd;
    Mul sq;
    Open open;
    fe r = 0;
    fe res = 0;
    bool step(OpCtx& c);
};

// base^e for a public exponent e >= 1 by right-to-left square-and-multiply.
// The accumulator multiply for a set bit shares the round with the next
// squaring, so the chain finishes in bit_width(e)-1 rounds plus one more
// when the top bit still needs an accumulator multiply.
struct ExpChain {
    fe base = 0;
    std::uint64_t e = 1;
    fe res = 0;

    int bits = 0;
    int j = 0;
    bool started = false;
    fe cur = 0, acc = 0;
    bool acc_valid = false;
    bool pend_sq = false, pend_am = false;

    ExpChain() = default;
    ExpChain(fe base_, std::uint64_t e_) : base(base_), e(e_) {}
    bool step(OpCtx& c);
};

// Product of a list of shares as a balanced binary tree:
// size-1 multiplications in ceil(log2(size)) rounds.
struct ProductTree {
    std::vector<fe> vals;
    fe res = 0;
    std::vector<Mul> level;
    bool pending = false;

    ProductTree() = default;
    explicit ProductTree(std::vector<fe> v) : vals(std::move(v)) {}
    bool step(OpCtx& c);
};

}  // namespace comp

// Engine-facing operation factories.
namespace ops {

std::unique_ptr<Operation> multiply(fe a, fe b);
std::unique_ptr<Operation> reconstruct(fe share, std::string label = "", bool internal = false);
std::unique_ptr<Operation> random_sharing();
std::unique_ptr<Operation> random_bit();
std::unique_ptr<Operation> exp_public(fe base, std::uint64_t e);
std::unique_ptr<Operation> product(std::vector<fe> factors);

}  // namespace ops

}  // namespace smpa
