#include "smpa/field.hpp"

#include <algorithm>
#include <bit>

namespace smpa {

namespace {

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
    std::uint64_t r = 1;
    a %= m;
    while (e) {
        if (e & 1) r = mulmod(r, a, m);
        a = mulmod(a, a, m);
        e >>= 1;
    }
    return r;
}

}  // namespace

bool is_prime_u64(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t q : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % q == 0) return n == q;
    }
    std::uint64_t d = n - 1;
    int s = std::countr_zero(d);
    d >>= s;
    // This witness set is deterministic for all n < 2^64.
    for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        std::uint64_t x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 1; i < s; ++i) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

FieldParams FieldParams::from_prime(fe p) {
    if (p < 2 || p >= (1ULL << 63)) throw ValidationError("field prime out of range");
    if (!is_prime_u64(p)) throw ValidationError("field modulus is not prime");
    FieldParams fp;
    fp.p = p;
    fp.l = std::bit_width(p);
    fp.k = std::popcount(p - 1);
    return fp;
}

FieldParams find_prime(int min_bits, int max_k) {
    if (min_bits < 2 || min_bits > 62) throw ValidationError("find_prime: min_bits must be in [2,62]");
    if (max_k < 1) throw ValidationError("find_prime: max_k must be >= 1");

    const std::uint64_t lo = 1ULL << min_bits;
    const std::uint64_t limit = 1ULL << 63;

    // Enumerate p-1 = 2^a + (up to max_k-1 lower one-bits), all bits >= 1
    // since p-1 is even for odd p. Collect ascending, return first prime.
    std::vector<std::uint64_t> cands;
    for (int a = min_bits; a <= 62; ++a) {
        std::uint64_t top = 1ULL << a;
        std::vector<std::uint64_t> tails = {0};
        for (int extra = 1; extra < max_k; ++extra) {
            std::vector<std::uint64_t> next = tails;
            for (std::uint64_t t : tails) {
                int floor_bit = t ? std::countr_zero(t) : a;
                for (int b = 1; b < floor_bit && b < a; ++b) next.push_back(t | (1ULL << b));
            }
            tails.swap(next);
        }
        for (std::uint64_t t : tails) {
            std::uint64_t pm1 = top | t;
            if (pm1 + 1 >= lo && pm1 < limit) cands.push_back(pm1 + 1);
        }
    }
    std::sort(cands.begin(), cands.end());
    for (std::uint64_t c : cands) {
        if (is_prime_u64(c)) return FieldParams::from_prime(c);
    }
    throw ProtocolError("find_prime: NotFound (relax max_k)");
}

fe Field::pow(fe a, std::uint64_t e) const {
    return powmod(a, e, fp_.p);
}

fe Field::inv(fe a) const {
    if (a == 0) throw ValidationError("inverse of zero");
    return pow(a, fp_.p - 2);
}

fe Field::sqrt_canonical(fe a) const {
    const fe p = fp_.p;
    if (a == 0) return 0;
    fe r;
    if (p % 4 == 3) {
        r = pow(a, (p + 1) / 4);
    } else {
        // Tonelli-Shanks. p-1 = q * 2^s with q odd.
        std::uint64_t q = p - 1;
        int s = std::countr_zero(q);
        q >>= s;
        // Find a quadratic non-residue z.
        fe z = 2;
        while (pow(z, (p - 1) / 2) != p - 1) ++z;
        fe m = static_cast<fe>(s);
        fe c = pow(z, q);
        fe t = pow(a, q);
        r = pow(a, (q + 1) / 2);
        while (t != 1) {
            // Least i with t^(2^i) = 1.
            std::uint64_t i = 0;
            fe tt = t;
            while (tt != 1) {
                tt = mul(tt, tt);
                ++i;
            }
            fe b = c;
            for (std::uint64_t j = 0; j + i + 1 < m; ++j) b = mul(b, b);
            m = i;
            c = mul(b, b);
            t = mul(t, c);
            r = mul(r, b);
        }
    }
    if (mul(r, r) != a) throw ProtocolError("sqrt of non-residue");
    return std::min(r, p - r);
}

std::vector<fe> Field::lagrange_weights(const std::vector<fe>& points, fe target) const {
    if (points.empty()) throw ValidationError("lagrange_weights: no points");
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            if (points[i] == points[j]) throw ValidationError("lagrange_weights: DuplicatePoint");

    std::vector<fe> w(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        fe num = 1, den = 1;
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (j == i) continue;
            num = mul(num, sub(target, points[j]));
            den = mul(den, sub(points[i], points[j]));
        }
        w[i] = mul(num, inv(den));
    }
    return w;
}

}  // namespace smpa
