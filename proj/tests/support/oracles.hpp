#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "smpa/protocols.hpp"

// Plaintext reference implementations. These stay independent of the MPC
// code paths they are used to check: everything here works on cleartext
// values with ordinary integer arithmetic.
namespace smpa::testing {

inline std::vector<int> oracle_prefix_or(const std::vector<int>& bits) {
    std::vector<int> out(bits.size());
    int acc = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        acc |= bits[i];
        out[i] = acc;
    }
    return out;
}

inline std::vector<std::uint64_t> oracle_addition(const std::vector<std::vector<std::uint64_t>>& vecs) {
    std::vector<std::uint64_t> out(vecs[0].size(), 0);
    for (const auto& v : vecs)
        for (std::size_t k = 0; k < v.size(); ++k) out[k] += v[k];
    return out;
}

struct OracleEntropy {
    std::uint64_t total = 0;
    std::uint64_t sigma = 0;
    long double h = 0;
};

inline OracleEntropy oracle_entropy(const std::vector<std::vector<std::uint64_t>>& hists,
                                    std::uint64_t q) {
    OracleEntropy r;
    const std::size_t items = hists[0].size();
    for (std::size_t k = 0; k < items; ++k) {
        std::uint64_t sk = 0;
        for (const auto& h : hists) sk += h[k];
        r.total += sk;
        std::uint64_t pow = 1;
        for (std::uint64_t i = 0; i < q; ++i) pow *= sk;
        r.sigma += pow;
    }
    const long double sq = std::pow(static_cast<long double>(r.total), static_cast<long double>(q));
    r.h = (1.0L - static_cast<long double>(r.sigma) / sq) / (static_cast<long double>(q) - 1.0L);
    return r;
}

inline std::uint64_t oracle_distinct(const std::vector<std::vector<int>>& seen) {
    const std::size_t K = seen[0].size();
    std::uint64_t count = 0;
    for (std::size_t k = 0; k < K; ++k) {
        for (const auto& peer : seen)
            if (peer[k]) {
                ++count;
                break;
            }
    }
    return count;
}

struct OracleEvent {
    std::uint64_t key = 0;
    std::uint64_t weight = 0;
};

struct OracleEcResult {
    // key -> (C, W, reporters) for reconstructed events
    std::map<std::uint64_t, std::tuple<std::uint64_t, std::uint64_t, std::vector<int>>> events;
    std::set<int> disqualified;
};

// Mirrors the correlation semantics on cleartext: C and W for an event of
// peer i count matches among *other* peers only; reconstruction needs
// T_c <= C <= n and W >= T_w; a reporter is a peer whose matching-key
// count against the reconstructed event is exactly one.
inline OracleEcResult oracle_event_correlation(const EventCorrelationConfig& cfg,
                                               const std::vector<std::vector<OracleEvent>>& peer_events) {
    OracleEcResult out;
    const int n = cfg.n;

    if (cfg.verify_weights)
        for (int i = 0; i < n; ++i)
            for (const auto& e : peer_events[static_cast<std::size_t>(i)])
                if (!(e.weight < cfg.max_weight)) out.disqualified.insert(i);
    if (cfg.verify_keys)
        for (int i = 0; i < n; ++i) {
            if (out.disqualified.count(i)) continue;
            const auto& evs = peer_events[static_cast<std::size_t>(i)];
            for (std::size_t a = 0; a < evs.size(); ++a)
                for (std::size_t b = a + 1; b < evs.size(); ++b)
                    if (evs[a].key == evs[b].key) out.disqualified.insert(i);
        }

    std::vector<int> Q;
    for (int i = 0; i < n; ++i)
        if (!out.disqualified.count(i)) Q.push_back(i);
    const int nq = static_cast<int>(Q.size());
    const int owners = std::min(nq - static_cast<int>(cfg.count_threshold) + 1, nq);

    for (int oi = 0; oi < owners; ++oi) {
        const int pi = Q[static_cast<std::size_t>(oi)];
        for (const auto& ev : peer_events[static_cast<std::size_t>(pi)]) {
            std::uint64_t C = 0, W = 0;
            for (int oj = 0; oj < nq; ++oj) {
                if (oj == oi) continue;
                for (const auto& other : peer_events[static_cast<std::size_t>(Q[static_cast<std::size_t>(oj)])])
                    if (other.key == ev.key) {
                        ++C;
                        W += other.weight;
                    }
            }
            const bool c_ok = C >= cfg.count_threshold && C <= static_cast<std::uint64_t>(n);
            const bool w_ok = cfg.weight_threshold == 0 || W >= cfg.weight_threshold;
            if (!(c_ok && w_ok)) continue;

            std::vector<int> reporters{pi};
            for (int oj = 0; oj < nq; ++oj) {
                if (oj == oi) continue;
                const int pj = Q[static_cast<std::size_t>(oj)];
                int matches = 0;
                for (const auto& other : peer_events[static_cast<std::size_t>(pj)])
                    if (other.key == ev.key) ++matches;
                if (matches == 1) reporters.push_back(pj);
            }
            std::sort(reporters.begin(), reporters.end());

            auto it = out.events.find(ev.key);
            if (it == out.events.end()) {
                out.events[ev.key] = {C, W, reporters};
            } else {
                auto& [c0, w0, rep0] = it->second;
                std::vector<int> merged;
                std::set_union(rep0.begin(), rep0.end(), reporters.begin(), reporters.end(),
                               std::back_inserter(merged));
                rep0 = std::move(merged);
            }
        }
    }
    return out;
}

}  // namespace smpa::testing
