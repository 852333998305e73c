#include "smpa/sharing.hpp"

#include <algorithm>

namespace smpa {

ShamirScheme::ShamirScheme(Field field, int m) : field_(std::move(field)), m_(m), t_((m - 1) / 2) {
    if (m_ < 3) throw ValidationError("ShamirScheme: TooFewPeers (m must be >= 3)");
}

std::vector<fe> ShamirScheme::share(fe secret, Rng& rng) const {
    if (secret >= field_.p()) throw ValidationError("share: secret not reduced");
    // f(x) = secret + a1 x + ... + at x^t, coefficients uniform in [0,p).
    std::vector<fe> coeff(static_cast<std::size_t>(t_) + 1);
    coeff[0] = secret;
    for (int i = 1; i <= t_; ++i) coeff[i] = rng.uniform_below(field_.p());

    std::vector<fe> out(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i) {
        const fe x = static_cast<fe>(i + 1);
        fe acc = 0;  // Horner
        for (int j = t_; j >= 0; --j) acc = field_.add(field_.mul(acc, x), coeff[j]);
        out[i] = acc;
    }
    return out;
}

fe ShamirScheme::reconstruct(const std::vector<std::pair<int, fe>>& shares) const {
    if (static_cast<int>(shares.size()) < t_ + 1)
        throw ValidationError("reconstruct: NotEnoughShares");

    std::vector<std::pair<int, fe>> s(shares);
    std::sort(s.begin(), s.end(), [](auto& a, auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i].first == s[i - 1].first) throw ValidationError("reconstruct: DuplicateIndex");

    std::vector<fe> points;
    points.reserve(static_cast<std::size_t>(t_) + 1);
    for (int i = 0; i <= t_; ++i) {
        if (s[i].first < 0 || s[i].first >= m_) throw ValidationError("reconstruct: bad slot index");
        points.push_back(static_cast<fe>(s[i].first + 1));
    }
    const auto w = field_.lagrange_weights(points, 0);
    fe acc = 0;
    for (int i = 0; i <= t_; ++i) acc = field_.add(acc, field_.mul(w[static_cast<std::size_t>(i)], s[i].second));
    return acc;
}

}  // namespace smpa
