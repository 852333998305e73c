#include "smpa/compare.hpp"

#include <algorithm>

namespace smpa {

namespace comp {

Equal::Equal(OpCtx& c, fe a, fe b) : chain(c.field().sub(a, b), c.field().p() - 1) {}

bool Equal::step(OpCtx& c) {
    if (!chain.step(c)) return false;
    res = c.field().sub(1, chain.res);
    return true;
}

bool PrefixOr::step(OpCtx& c) {
    const Field& f = c.field();
    if (!started) {
        if (in.empty()) throw ValidationError("prefix_or: empty input");
        started = true;
        out.resize(in.size());
        out[0] = in[0];
    } else if (pending) {
        mul.step(c);
        out[i] = f.sub(f.add(out[i - 1], in[i]), mul.res);
        pending = false;
        ++i;
    }
    if (i >= in.size()) return true;
    mul = Mul{out[i - 1], in[i]};
    mul.step(c);
    pending = true;
    return false;
}

bool BitLtPublic::step(OpCtx& c) {
    const Field& f = c.field();
    const std::size_t l = r_bits.size();
    if (phase == 0) {
        // d_j = r_j XOR c_j, fed to the prefix-OR most significant first.
        std::vector<fe> d(l);
        for (std::size_t j = 0; j < l; ++j) {
            const fe rj = r_bits[l - 1 - j];
            d[j] = ((c_pub >> (l - 1 - j)) & 1) ? f.sub(1, rj) : rj;
        }
        po = PrefixOr{std::move(d)};
        phase = 1;
    }
    if (!po.step(c)) return false;
    // po.out[j] = OR of the top j+1 difference bits; the first transition
    // marks the highest bit where c and r differ.
    fe acc = 0;
    for (std::size_t j = 0; j < l; ++j) {
        const fe ej = po.out[j];
        const fe fj = (j == 0) ? ej : f.sub(ej, po.out[j - 1]);
        if (((c_pub >> (l - 1 - j)) & 1) == 0) acc = f.add(acc, fj);
    }
    res = acc;
    phase = 2;
    return true;
}

bool BitwiseRandom::step(OpCtx& c) {
    const Field& f = c.field();
    const int l = f.l();
    for (;;) {
        switch (phase) {
            case 0: {
                if (attempts >= 64) throw ProtocolError("bitwise_random: RetryExhausted");
                c.count_bitwise_attempt(attempts > 0);
                ++attempts;
                gens.assign(static_cast<std::size_t>(l), RandomBit{});
                gen_done.assign(static_cast<std::size_t>(l), false);
                phase = 1;
                continue;
            }
            case 1: {
                bool all = true;
                for (std::size_t j = 0; j < gens.size(); ++j) {
                    if (gen_done[j]) continue;
                    if (gens[j].step(c))
                        gen_done[j] = true;
                    else
                        all = false;
                }
                if (!all) return false;
                bits.resize(gens.size());
                value = 0;
                for (std::size_t j = 0; j < gens.size(); ++j) {
                    bits[j] = gens[j].res;
                    value = f.add(value, f.mul(f.pow(2, j), bits[j]));
                }
                chk = BitLtPublic{f.p() - 1, bits};
                phase = 2;
                continue;
            }
            case 2:
                if (!chk.step(c)) return false;
                // r < p  iff  not (p-1 < r)
                open = Open{f.sub(1, chk.res), "bitwise_random.range", true};
                phase = 3;
                continue;
            case 3:
                if (!open.step(c)) return false;
                if (open.value != 1) {
                    phase = 0;
                    continue;
                }
                phase = 4;
                return true;
            default:
                return true;
        }
    }
}

bool Lsb::step(OpCtx& c) {
    const Field& f = c.field();
    for (;;) {
        switch (phase) {
            case 0:
                if (!br.step(c)) return false;
                open_c = Open{f.add(x, br.value), "lsb.mask", true};
                phase = 1;
                continue;
            case 1:
                if (!open_c.step(c)) return false;
                blt = BitLtPublic{open_c.value, br.bits};
                phase = 2;
                continue;
            case 2: {
                if (!blt.step(c)) return false;
                const fe r0 = br.bits[0];
                const bool c0 = (open_c.value & 1) != 0;
                w = c0 ? f.sub(1, r0) : r0;  // c0 XOR r0, c0 public
                xm = Mul{w, blt.res};
                xm.step(c);
                phase = 3;
                return false;
            }
            case 3: {
                xm.step(c);
                // w XOR u = w + u - 2wu
                const fe twice = f.add(xm.res, xm.res);
                res = f.sub(f.add(w, blt.res), twice);
                phase = 4;
                return true;
            }
            default:
                return true;
        }
    }
}

namespace {

fe public_half_predicate(const Field& f, fe v) {
    // [v < p/2] for a public v: true when v <= (p-1)/2.
    return v <= (f.p() - 1) / 2 ? 1 : 0;
}

}  // namespace

LessThan::LessThan(OpCtx& c, Operand a_, Operand b_) : a(a_), b(b_) {
    const Field& f = c.field();
    if (!a.shared && !b.shared) throw ValidationError("less_than: need at least one shared operand");
    need_a = a.shared;
    need_b = b.shared;
    if (need_a) lsb_a = Lsb{f.add(a.v, a.v)};
    else pa = public_half_predicate(f, a.v);
    if (need_b) lsb_b = Lsb{f.add(b.v, b.v)};
    else pb = public_half_predicate(f, b.v);
    const fe diff = f.sub(a.v, b.v);  // share-minus-share or const-minus-share both stay local
    lsb_c = Lsb{f.add(diff, diff)};
}

bool LessThan::step(OpCtx& c) {
    const Field& f = c.field();
    for (;;) {
        switch (phase) {
            case 0: {
                // The needed LSB extractions run in parallel.
                bool all = true;
                if (need_a && !done_a) { done_a = lsb_a.step(c); all &= done_a; }
                if (need_b && !done_b) { done_b = lsb_b.step(c); all &= done_b; }
                if (!done_c) { done_c = lsb_c.step(c); all &= done_c; }
                if (!all) return false;
                if (need_a) pa = f.sub(1, lsb_a.res);
                if (need_b) pb = f.sub(1, lsb_b.res);
                pc = f.sub(1, lsb_c.res);
                if (need_a && need_b) {
                    m1 = Mul{pa, pb};
                    m1.step(c);
                    phase = 1;
                    return false;
                }
                phase = 2;
                continue;
            }
            case 1:
                m1.step(c);
                phase = 2;
                continue;
            case 2: {
                // res = A(1-B) + X(1-C), X = 1 - A - B + 2AB.
                fe x;
                if (need_a && need_b) {
                    const fe ab = m1.res;
                    lin_ = f.sub(pa, ab);
                    x = f.add(f.sub(f.sub(1, pa), pb), f.add(ab, ab));
                } else if (!need_a) {
                    // A public: A(1-B) and X are linear in B.
                    lin_ = pa ? f.sub(1, pb) : 0;
                    x = pa ? pb : f.sub(1, pb);
                } else {
                    // B public.
                    lin_ = pb ? 0 : pa;
                    x = pb ? pa : f.sub(1, pa);
                }
                m2 = Mul{x, f.sub(1, pc)};
                m2.step(c);
                phase = 3;
                return false;
            }
            case 3:
                m2.step(c);
                res = f.add(lin_, m2.res);
                phase = 4;
                return true;
            default:
                return true;
        }
    }
}

ShortRange::ShortRange(OpCtx& c, fe a, fe x, fe y) {
    const Field& f = c.field();
    if (x > y || y >= f.p()) throw ValidationError("short_range: bad bounds");
    std::vector<fe> terms;
    terms.reserve(static_cast<std::size_t>(y - x + 1));
    for (fe i = x; i <= y; ++i) terms.push_back(f.sub(a, i));
    tree = ProductTree{std::move(terms)};
}

bool ShortRange::step(OpCtx& c) {
    for (;;) {
        switch (phase) {
            case 0:
                if (!tree.step(c)) return false;
                eq = Equal{c, 0, tree.res};
                phase = 1;
                continue;
            case 1:
                if (!eq.step(c)) return false;
                res = eq.res;
                phase = 2;
                return true;
            default:
                return true;
        }
    }
}

}  // namespace comp

namespace ops {

namespace {

struct EqualOp final : Operation {
    fe a, b;
    std::optional<comp::Equal> eq;
    EqualOp(fe a_, fe b_) : a(a_), b(b_) {}
    std::string_view kind() const override { return "equal"; }
    bool step(OpCtx& c) override {
        if (!eq) eq.emplace(c, a, b);
        if (!eq->step(c)) return false;
        result_ = {eq->res};
        return true;
    }
};

struct PrefixOrOp final : Operation {
    comp::PrefixOr po;
    explicit PrefixOrOp(std::vector<fe> bits) : po(std::move(bits)) {}
    std::string_view kind() const override { return "prefix_or"; }
    bool step(OpCtx& c) override {
        if (!po.step(c)) return false;
        result_ = po.out;
        return true;
    }
};

struct BitwiseRandomOp final : Operation {
    comp::BitwiseRandom br;
    std::string_view kind() const override { return "bitwise_random"; }
    bool step(OpCtx& c) override {
        if (!br.step(c)) return false;
        result_ = br.bits;  // bits LSB first, then the value share
        result_.push_back(br.value);
        return true;
    }
};

struct BitLtPublicOp final : Operation {
    comp::BitLtPublic blt;
    BitLtPublicOp(fe c, std::vector<fe> bits) : blt(c, std::move(bits)) {}
    std::string_view kind() const override { return "bitlt_public"; }
    bool step(OpCtx& c) override {
        if (!blt.step(c)) return false;
        result_ = {blt.res};
        return true;
    }
};

struct LsbOp final : Operation {
    comp::Lsb l;
    explicit LsbOp(fe x2) : l(x2) {}
    std::string_view kind() const override { return "lsb"; }
    bool step(OpCtx& c) override {
        if (!l.step(c)) return false;
        result_ = {l.res};
        return true;
    }
};

struct LessThanOp final : Operation {
    Operand a, b;
    std::optional<comp::LessThan> lt;
    LessThanOp(Operand a_, Operand b_) : a(a_), b(b_) {}
    std::string_view kind() const override { return "less_than"; }
    bool step(OpCtx& c) override {
        if (!lt) lt.emplace(c, a, b);
        if (!lt->step(c)) return false;
        result_ = {lt->res};
        return true;
    }
};

struct ShortRangeOp final : Operation {
    fe a, x, y;
    std::optional<comp::ShortRange> sr;
    ShortRangeOp(fe a_, fe x_, fe y_) : a(a_), x(x_), y(y_) {}
    std::string_view kind() const override { return "short_range"; }
    bool step(OpCtx& c) override {
        if (!sr) sr.emplace(c, a, x, y);
        if (!sr->step(c)) return false;
        result_ = {sr->res};
        return true;
    }
};

}  // namespace

std::unique_ptr<Operation> equal(fe a, fe b) { return std::make_unique<EqualOp>(a, b); }
std::unique_ptr<Operation> prefix_or(std::vector<fe> bits) {
    return std::make_unique<PrefixOrOp>(std::move(bits));
}
std::unique_ptr<Operation> bitwise_random() { return std::make_unique<BitwiseRandomOp>(); }
std::unique_ptr<Operation> bitlt_public(fe c, std::vector<fe> r_bits) {
    return std::make_unique<BitLtPublicOp>(c, std::move(r_bits));
}
std::unique_ptr<Operation> lsb(fe x2) { return std::make_unique<LsbOp>(x2); }
std::unique_ptr<Operation> less_than(Operand a, Operand b) { return std::make_unique<LessThanOp>(a, b); }
std::unique_ptr<Operation> short_range(fe a, fe x, fe y) { return std::make_unique<ShortRangeOp>(a, x, y); }

}  // namespace ops

std::uint64_t equal_mults(const FieldParams& fp) {
    return static_cast<std::uint64_t>(fp.l + fp.k - 2);
}

std::uint64_t prefix_or_mults(const FieldParams& fp) {
    return static_cast<std::uint64_t>(fp.l - 1);
}

std::uint64_t less_than_mults(const FieldParams& fp, bool both_shared) {
    // One LSB costs l (random bits) + (l-1) (range check) + (l-1) (mask
    // compare) + 1 (final XOR) = 3l - 1 multiplications.
    const std::uint64_t per_lsb = 3ULL * static_cast<std::uint64_t>(fp.l) - 1;
    return both_shared ? 3 * per_lsb + 2 : 2 * per_lsb + 1;
}

std::uint64_t short_range_mults(const FieldParams& fp, fe x, fe y) {
    return (y - x) + equal_mults(fp);
}

}  // namespace smpa
