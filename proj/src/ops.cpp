#include "smpa/ops.hpp"

#include <bit>

namespace smpa {

namespace comp {

bool Mul::step(OpCtx& c) {
    if (phase == 0) {
        c.count_mult();
        c.share_out(c.field().mul(a, b));
        phase = 1;
        return false;
    }
    res = c.collect_weighted();
    phase = 2;
    return true;
}

bool Open::step(OpCtx& c) {
    if (phase == 0) {
        c.count_reconstruct();
        for (int j = 0; j < c.m(); ++j) c.emit(j, share);
        phase = 1;
        return false;
    }
    value = c.collect_checked();
    c.log_reveal(label, value, internal);
    phase = 2;
    return true;
}

bool JointRandom::step(OpCtx& c) {
    if (phase == 0) {
        c.count_random_sharing();
        c.share_out(c.rng().uniform_below(c.field().p()));
        phase = 1;
        return false;
    }
    res = c.collect_sum();
    phase = 2;
    return true;
}

bool RandomBit::step(OpCtx& c) {
    const Field& f = c.field();
    for (;;) {
        switch (phase) {
            case 0:
                if (attempts >= 64) throw ProtocolError("random_bit: RetryExhausted");
                c.count_random_bit_attempt(attempts > 0);
                ++attempts;
                rnd = JointRandom{};
                phase = 1;
                continue;
            case 1:
                if (!rnd.step(c)) return false;
                r = rnd.res;
                sq = Mul{r, r};
                phase = 2;
                continue;
            case 2:
                if (!sq.step(c)) return false;
                open = Open{sq.res, "random_bit.r2", true};
                phase = 3;
                continue;
            case 3: {
                if (!open.step(c)) return false;
                if (open.value == 0) {
                    phase = 0;
                    continue;
                }
                const fe u = f.sqrt_canonical(open.value);
                res = f.mul(f.add(f.mul(f.inv(u), r), 1), c.inv2());
                phase = 4;
                return true;
            }
            default:
                return true;
        }
    }
}

bool ExpChain::step(OpCtx& c) {
    const Field& f = c.field();
    if (!started) {
        if (e == 0) throw ValidationError("exp: exponent must be >= 1");
        started = true;
        bits = std::bit_width(e);
        cur = base;
        j = 0;
    } else {
        // Collect what last round's exchange produced, in emission order.
        if (pend_sq) {
            cur = c.collect_weighted();
            pend_sq = false;
        }
        if (pend_am) {
            acc = c.collect_weighted();
            pend_am = false;
        }
        ++j;
    }
    for (;;) {
        if (j >= bits) {
            res = acc;
            return true;
        }
        if (j + 1 < bits) {
            c.count_mult();
            c.share_out(f.mul(cur, cur));
            pend_sq = true;
        }
        if ((e >> j) & 1) {
            if (!acc_valid) {
                acc = cur;
                acc_valid = true;
            } else {
                c.count_mult();
                c.share_out(f.mul(acc, cur));
                pend_am = true;
            }
        }
        if (pend_sq || pend_am) return false;
        ++j;  // stage needed no communication
    }
}

bool ProductTree::step(OpCtx& c) {
    for (;;) {
        if (pending) {
            std::vector<fe> next;
            next.reserve(level.size() + 1);
            for (auto& mstep : level) {
                mstep.step(c);  // collect phase
                next.push_back(mstep.res);
            }
            if (vals.size() % 2 == 1) next.push_back(vals.back());
            vals = std::move(next);
            level.clear();
            pending = false;
        }
        if (vals.size() <= 1) {
            if (vals.empty()) throw ValidationError("product: empty factor list");
            res = vals[0];
            return true;
        }
        for (std::size_t i = 0; i + 1 < vals.size(); i += 2) {
            level.emplace_back(vals[i], vals[i + 1]);
            level.back().step(c);  // emit phase
        }
        pending = true;
        return false;
    }
}

}  // namespace comp

namespace ops {

namespace {

struct MultiplyOp final : Operation {
    comp::Mul mul;
    MultiplyOp(fe a, fe b) : mul(a, b) {}
    std::string_view kind() const override { return "multiply"; }
    bool step(OpCtx& c) override {
        if (!mul.step(c)) return false;
        result_ = {mul.res};
        return true;
    }
};

struct ReconstructOp final : Operation {
    comp::Open open;
    ReconstructOp(fe share, std::string label, bool internal) : open(share, std::move(label), internal) {}
    std::string_view kind() const override { return "reconstruct"; }
    bool step(OpCtx& c) override {
        if (!open.step(c)) return false;
        result_ = {open.value};
        public_result_ = true;
        return true;
    }
};

struct RandomSharingOp final : Operation {
    comp::JointRandom jr;
    std::string_view kind() const override { return "random_sharing"; }
    bool step(OpCtx& c) override {
        if (!jr.step(c)) return false;
        result_ = {jr.res};
        return true;
    }
};

struct RandomBitOp final : Operation {
    comp::RandomBit rb;
    std::string_view kind() const override { return "random_bit"; }
    bool step(OpCtx& c) override {
        if (!rb.step(c)) return false;
        result_ = {rb.res};
        return true;
    }
};

struct ExpOp final : Operation {
    comp::ExpChain chain;
    ExpOp(fe base, std::uint64_t e) : chain(base, e) {}
    std::string_view kind() const override { return "exp"; }
    bool step(OpCtx& c) override {
        if (!chain.step(c)) return false;
        result_ = {chain.res};
        return true;
    }
};

struct ProductOp final : Operation {
    comp::ProductTree tree;
    explicit ProductOp(std::vector<fe> f) : tree(std::move(f)) {}
    std::string_view kind() const override { return "product"; }
    bool step(OpCtx& c) override {
        if (!tree.step(c)) return false;
        result_ = {tree.res};
        return true;
    }
};

}  // namespace

std::unique_ptr<Operation> multiply(fe a, fe b) { return std::make_unique<MultiplyOp>(a, b); }

std::unique_ptr<Operation> reconstruct(fe share, std::string label, bool internal) {
    return std::make_unique<ReconstructOp>(share, std::move(label), internal);
}

std::unique_ptr<Operation> random_sharing() { return std::make_unique<RandomSharingOp>(); }

std::unique_ptr<Operation> random_bit() { return std::make_unique<RandomBitOp>(); }

std::unique_ptr<Operation> exp_public(fe base, std::uint64_t e) { return std::make_unique<ExpOp>(base, e); }

std::unique_ptr<Operation> product(std::vector<fe> factors) {
    return std::make_unique<ProductOp>(std::move(factors));
}

}  // namespace ops

}  // namespace smpa
