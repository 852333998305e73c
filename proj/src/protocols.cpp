#include "smpa/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace smpa {

namespace {

std::string idx(const char* base, int i) { return std::string(base) + "[" + std::to_string(i) + "]"; }
std::string idx(const char* base, int i, int j) {
    return std::string(base) + "[" + std::to_string(i) + "][" + std::to_string(j) + "]";
}
std::string idx(const char* base, int i, int j, int k) {
    return idx(base, i, j) + "[" + std::to_string(k) + "]";
}

}  // namespace

// ---- vector addition ----

std::vector<fe> run_vector_addition(Engine& eng, const std::vector<std::vector<fe>>& vectors) {
    if (vectors.empty()) throw ValidationError("vector_addition: no input vectors");
    const std::size_t r = vectors[0].size();
    for (const auto& v : vectors)
        if (v.size() != r) throw ValidationError("vector_addition: DimensionMismatch");

    const Field& f = eng.field();
    for (std::size_t k = 0; k < r; ++k) {
        fe acc = 0;
        for (const auto& v : vectors) acc = f.add(acc, v[k]);
        eng.schedule(static_cast<int>(k), ops::reconstruct(acc, idx("D", static_cast<int>(k))));
    }
    eng.do_operations();

    std::vector<fe> out(r);
    for (std::size_t k = 0; k < r; ++k) out[k] = eng.result_public_value(static_cast<int>(k));
    return out;
}

// ---- Tsallis entropy ----

EntropyResult run_tsallis_entropy(Engine& eng, const std::vector<std::vector<fe>>& histograms,
                                  std::uint64_t q, std::uint64_t max_item_total) {
    if (q < 2) throw ValidationError("entropy: q must be an integer >= 2");
    if (histograms.empty()) throw ValidationError("entropy: no input histograms");
    const std::size_t r = histograms[0].size();
    if (r == 0) throw ValidationError("entropy: empty histogram");
    for (const auto& h : histograms)
        if (h.size() != r) throw ValidationError("entropy: DimensionMismatch");

    const Field& f = eng.field();
    // (max aggregated item count)^q must fit the field.
    unsigned __int128 bound = 1;
    for (std::uint64_t i = 0; i < q; ++i) {
        bound *= max_item_total;
        if (bound >= f.p()) throw ValidationError("entropy: FieldOverflowRisk");
    }

    std::vector<fe> item(r, 0);
    fe total_share = 0;
    for (std::size_t k = 0; k < r; ++k) {
        for (const auto& h : histograms) item[k] = f.add(item[k], h[k]);
        total_share = f.add(total_share, item[k]);
    }

    // One batch: open S alongside the parallel exponentiations.
    eng.schedule(0, ops::reconstruct(total_share, "entropy.S"));
    for (std::size_t k = 0; k < r; ++k)
        eng.schedule(static_cast<int>(k) + 1, ops::exp_public(item[k], q));
    eng.do_operations();

    EntropyResult res;
    res.total = eng.result_public_value(0);
    if (res.total == 0) throw ProtocolError("entropy: EmptyDistribution");

    fe sigma_share = 0;
    for (std::size_t k = 0; k < r; ++k)
        sigma_share = f.add(sigma_share, eng.result_share(static_cast<int>(k) + 1));
    eng.schedule(0, ops::reconstruct(sigma_share, "entropy.sigma"));
    eng.do_operations();
    res.sigma = eng.result_public_value(0);

    const long double sq = std::pow(static_cast<long double>(res.total), static_cast<long double>(q));
    res.h = (1.0L - static_cast<long double>(res.sigma) / sq) / (static_cast<long double>(q) - 1.0L);
    return res;
}

// ---- distinct count ----

std::uint64_t run_distinct_count(Engine& eng, const std::vector<std::vector<fe>>& negated) {
    if (negated.empty()) throw ValidationError("distinct_count: no inputs");
    const std::size_t K = negated[0].size();
    if (K == 0) throw ValidationError("distinct_count: empty domain");
    for (const auto& v : negated)
        if (v.size() != K) throw ValidationError("distinct_count: DimensionMismatch");

    // AND of the negated indicators per item, as one batch of product trees.
    for (std::size_t k = 0; k < K; ++k) {
        std::vector<fe> factors;
        factors.reserve(negated.size());
        for (const auto& v : negated) factors.push_back(v[k]);
        eng.schedule(static_cast<int>(k), ops::product(std::move(factors)));
    }
    eng.do_operations();

    const Field& f = eng.field();
    fe sigma_share = 0;
    for (std::size_t k = 0; k < K; ++k)
        sigma_share = f.add(sigma_share, eng.result_share(static_cast<int>(k)));
    eng.schedule(0, ops::reconstruct(sigma_share, "distinct.sigma"));
    eng.do_operations();
    const fe sigma = eng.result_public_value(0);
    if (sigma > K) throw ProtocolError("distinct_count: sigma exceeds domain (non-boolean input?)");
    return static_cast<std::uint64_t>(K) - sigma;
}

// ---- event correlation ----

void EventCorrelationConfig::validate(const Field& f) const {
    if (n < 1) throw ValidationError("event_correlation: ConfigInvalid (n)");
    if (s < 1) throw ValidationError("event_correlation: ConfigInvalid (s)");
    if (count_threshold < 1 || count_threshold > static_cast<fe>(n))
        throw ValidationError("event_correlation: ConfigInvalid (count threshold)");
    if (max_weight < 1 || max_weight >= f.p())
        throw ValidationError("event_correlation: ConfigInvalid (max weight)");
    if (weight_threshold >= f.p()) throw ValidationError("event_correlation: ConfigInvalid (weight threshold)");
}

EventCorrelationResult run_event_correlation(Engine& eng, const EventCorrelationConfig& cfg,
                                             const std::vector<std::vector<SharedEvent>>& events,
                                             const std::vector<int>& real_counts) {
    const Field& f = eng.field();
    cfg.validate(f);
    if (static_cast<int>(events.size()) != cfg.n || static_cast<int>(real_counts.size()) != cfg.n)
        throw ValidationError("event_correlation: wrong peer count");
    for (int i = 0; i < cfg.n; ++i) {
        if (static_cast<int>(events[static_cast<std::size_t>(i)].size()) != cfg.s)
            throw ValidationError("event_correlation: event list not padded to s");
        if (real_counts[static_cast<std::size_t>(i)] < 0 || real_counts[static_cast<std::size_t>(i)] > cfg.s)
            throw ValidationError("event_correlation: bad real event count");
    }

    std::vector<bool> disq(static_cast<std::size_t>(cfg.n), false);

    // Weight verification: every slot of every peer must stay below w_max.
    if (cfg.verify_weights) {
        int id = 0;
        for (int i = 0; i < cfg.n; ++i)
            for (int j = 0; j < cfg.s; ++j)
                eng.schedule(id++, ops::less_than(sh(events[i][j].weight), pub(cfg.max_weight)));
        eng.do_operations();
        id = 0;
        std::vector<fe> ind(static_cast<std::size_t>(cfg.n) * cfg.s);
        for (std::size_t x = 0; x < ind.size(); ++x, ++id) ind[x] = eng.result_share(id);
        id = 0;
        for (int i = 0; i < cfg.n; ++i)
            for (int j = 0; j < cfg.s; ++j, ++id)
                eng.schedule(id, ops::reconstruct(ind[static_cast<std::size_t>(id)], idx("verify.weight", i, j)));
        eng.do_operations();
        id = 0;
        for (int i = 0; i < cfg.n; ++i)
            for (int j = 0; j < cfg.s; ++j, ++id)
                if (eng.result_public_value(id) != 1) disq[static_cast<std::size_t>(i)] = true;
    }

    // Key verification: each remaining peer's real events must be distinct.
    if (cfg.verify_keys) {
        int id = 0;
        std::vector<std::tuple<int, int, int>> pairs;
        for (int i = 0; i < cfg.n; ++i) {
            if (disq[static_cast<std::size_t>(i)]) continue;
            const int rc = real_counts[static_cast<std::size_t>(i)];
            for (int a = 0; a < rc; ++a)
                for (int b = a + 1; b < rc; ++b) {
                    eng.schedule(id++, ops::equal(events[i][a].key, events[i][b].key));
                    pairs.emplace_back(i, a, b);
                }
        }
        eng.do_operations();
        std::vector<fe> ind(pairs.size());
        for (std::size_t x = 0; x < pairs.size(); ++x) ind[x] = eng.result_share(static_cast<int>(x));
        for (std::size_t x = 0; x < pairs.size(); ++x) {
            auto [i, a, b] = pairs[x];
            eng.schedule(static_cast<int>(x), ops::reconstruct(ind[x], idx("verify.key", i, a, b)));
        }
        eng.do_operations();
        for (std::size_t x = 0; x < pairs.size(); ++x) {
            auto [i, a, b] = pairs[x];
            if (eng.result_public_value(static_cast<int>(x)) != 0) disq[static_cast<std::size_t>(i)] = true;
        }
    }

    EventCorrelationResult result;
    for (int i = 0; i < cfg.n; ++i)
        if (disq[static_cast<std::size_t>(i)]) result.disqualified.push_back(i);

    std::vector<int> Q;
    for (int i = 0; i < cfg.n; ++i)
        if (!disq[static_cast<std::size_t>(i)]) Q.push_back(i);
    const int nq = static_cast<int>(Q.size());
    const int owners = std::min(nq - static_cast<int>(cfg.count_threshold) + 1, nq);
    if (owners <= 0) return result;

    // Aggregation: all pairwise key equalities against the owner block,
    // scheduled as one parallel batch.
    struct EqRef {
        int oi, j, oj, jp;
    };
    std::vector<EqRef> eq_refs;
    {
        int id = 0;
        for (int oi = 0; oi < owners; ++oi) {
            const int pi = Q[static_cast<std::size_t>(oi)];
            for (int j = 0; j < real_counts[static_cast<std::size_t>(pi)]; ++j)
                for (int oj = 0; oj < nq; ++oj) {
                    if (oj == oi) continue;
                    const int pj = Q[static_cast<std::size_t>(oj)];
                    for (int jp = 0; jp < real_counts[static_cast<std::size_t>(pj)]; ++jp) {
                        eng.schedule(id++, ops::equal(events[pi][j].key, events[pj][jp].key));
                        eq_refs.push_back(EqRef{oi, j, oj, jp});
                    }
                }
        }
    }
    eng.do_operations();
    std::vector<fe> eq(eq_refs.size());
    for (std::size_t x = 0; x < eq_refs.size(); ++x) eq[x] = eng.result_share(static_cast<int>(x));

    // C = sum of equalities; W = sum of weight-gated equalities.
    std::map<std::pair<int, int>, fe> C;
    for (std::size_t x = 0; x < eq_refs.size(); ++x) {
        auto key = std::make_pair(eq_refs[x].oi, eq_refs[x].j);
        C[key] = f.add(C[key], eq[x]);
    }
    {
        int id = 0;
        for (std::size_t x = 0; x < eq_refs.size(); ++x) {
            const int pj = Q[static_cast<std::size_t>(eq_refs[x].oj)];
            eng.schedule(id++, ops::multiply(events[pj][eq_refs[x].jp].weight, eq[x]));
        }
        eng.do_operations();
    }
    std::map<std::pair<int, int>, fe> W;
    for (std::size_t x = 0; x < eq_refs.size(); ++x) {
        auto key = std::make_pair(eq_refs[x].oi, eq_refs[x].j);
        W[key] = f.add(W[key], eng.result_share(static_cast<int>(x)));
    }

    // Threshold tests t1 = shortRange(C, T_c, n), t2 = lessThan(T_w-1, W).
    struct Candidate {
        int oi, j;
        fe c_share, w_share;
        fe t1 = 0, t2 = 0, qual = 0;
    };
    std::vector<Candidate> cands;
    for (int oi = 0; oi < owners; ++oi) {
        const int pi = Q[static_cast<std::size_t>(oi)];
        for (int j = 0; j < real_counts[static_cast<std::size_t>(pi)]; ++j) {
            Candidate cand;
            cand.oi = oi;
            cand.j = j;
            cand.c_share = C[{oi, j}];
            cand.w_share = W[{oi, j}];
            cands.push_back(cand);
        }
    }
    const bool use_weight_test = cfg.weight_threshold >= 1;
    {
        int id = 0;
        for (auto& cand : cands)
            eng.schedule(id++, ops::short_range(cand.c_share, cfg.count_threshold, static_cast<fe>(cfg.n)));
        if (use_weight_test)
            for (auto& cand : cands)
                eng.schedule(id++, ops::less_than(pub(cfg.weight_threshold - 1), sh(cand.w_share)));
        eng.do_operations();
        id = 0;
        for (auto& cand : cands) cand.t1 = eng.result_share(id++);
        if (use_weight_test)
            for (auto& cand : cands) cand.t2 = eng.result_share(id++);
    }
    if (use_weight_test) {
        int id = 0;
        for (auto& cand : cands) eng.schedule(id++, ops::multiply(cand.t1, cand.t2));
        eng.do_operations();
        id = 0;
        for (auto& cand : cands) cand.qual = eng.result_share(id++);
    } else {
        for (auto& cand : cands) cand.qual = cand.t1;  // t2 forced to 1
    }
    {
        int id = 0;
        for (auto& cand : cands) {
            const int pi = Q[static_cast<std::size_t>(cand.oi)];
            eng.schedule(id++, ops::reconstruct(cand.qual, idx("qualify", pi, cand.j)));
        }
        eng.do_operations();
        id = 0;
        for (auto& cand : cands) cand.qual = eng.result_public_value(id++);
    }

    // Open key, C, W and the reporter sums for qualifying events only.
    struct OpenRef {
        std::size_t cand;
        std::vector<int> rep_peers;  // peer id per reporter-sum op, in order
    };
    std::vector<OpenRef> refs;
    {
        int id = 0;
        for (std::size_t ci = 0; ci < cands.size(); ++ci) {
            auto& cand = cands[ci];
            if (cand.qual != 1) continue;
            const int pi = Q[static_cast<std::size_t>(cand.oi)];
            OpenRef ref;
            ref.cand = ci;
            eng.schedule(id++, ops::reconstruct(events[pi][cand.j].key, idx("event.key", pi, cand.j)));
            eng.schedule(id++, ops::reconstruct(cand.c_share, idx("event.count", pi, cand.j)));
            eng.schedule(id++, ops::reconstruct(cand.w_share, idx("event.weight", pi, cand.j)));
            for (int oj = 0; oj < nq; ++oj) {
                if (oj == cand.oi) continue;
                const int pj = Q[static_cast<std::size_t>(oj)];
                fe rep = 0;
                for (std::size_t x = 0; x < eq_refs.size(); ++x)
                    if (eq_refs[x].oi == cand.oi && eq_refs[x].j == cand.j && eq_refs[x].oj == oj)
                        rep = f.add(rep, eq[x]);
                eng.schedule(id++, ops::reconstruct(rep, idx("event.reporter", pi, cand.j, pj)));
                ref.rep_peers.push_back(pj);
            }
            refs.push_back(std::move(ref));
        }
        if (id == 0) return result;
        eng.do_operations();
    }

    std::map<fe, std::size_t> by_key;  // de-duplicate by reconstructed key
    int id = 0;
    for (const auto& ref : refs) {
        const auto& cand = cands[ref.cand];
        const int pi = Q[static_cast<std::size_t>(cand.oi)];
        ReconstructedEvent ev;
        ev.key = eng.result_public_value(id++);
        ev.count = eng.result_public_value(id++);
        ev.weight_sum = eng.result_public_value(id++);
        ev.reporters.push_back(pi);
        for (int pj : ref.rep_peers) {
            if (eng.result_public_value(id++) == 1) ev.reporters.push_back(pj);
        }
        std::sort(ev.reporters.begin(), ev.reporters.end());
        if (ev.key == pad_key(f)) continue;  // reserved padding key
        auto it = by_key.find(ev.key);
        if (it == by_key.end()) {
            by_key[ev.key] = result.events.size();
            result.events.push_back(std::move(ev));
        } else {
            auto& have = result.events[it->second];
            std::vector<int> merged;
            std::set_union(have.reporters.begin(), have.reporters.end(), ev.reporters.begin(),
                           ev.reporters.end(), std::back_inserter(merged));
            have.reporters = std::move(merged);
        }
    }
    return result;
}

EventCorrelationCosts event_correlation_costs(const EventCorrelationConfig& cfg,
                                              const std::vector<int>& real_counts,
                                              const std::vector<int>& weight_disqualified,
                                              const std::vector<int>& key_disqualified) {
    EventCorrelationCosts c;
    std::vector<bool> wd(static_cast<std::size_t>(cfg.n), false), kd(static_cast<std::size_t>(cfg.n), false);
    for (int i : weight_disqualified) wd[static_cast<std::size_t>(i)] = true;
    for (int i : key_disqualified) kd[static_cast<std::size_t>(i)] = true;

    if (cfg.verify_weights) c.less_thans += static_cast<std::uint64_t>(cfg.n) * cfg.s;
    if (cfg.verify_keys)
        for (int i = 0; i < cfg.n; ++i) {
            if (wd[static_cast<std::size_t>(i)]) continue;
            const std::uint64_t rc = static_cast<std::uint64_t>(real_counts[static_cast<std::size_t>(i)]);
            c.equals += rc * (rc - 1) / 2;
        }

    std::vector<int> Q;
    for (int i = 0; i < cfg.n; ++i)
        if (!wd[static_cast<std::size_t>(i)] && !kd[static_cast<std::size_t>(i)]) Q.push_back(i);
    const int nq = static_cast<int>(Q.size());
    const int owners = std::min(nq - static_cast<int>(cfg.count_threshold) + 1, nq);
    if (owners <= 0) return c;

    std::uint64_t owner_events = 0, pair_terms = 0;
    for (int oi = 0; oi < owners; ++oi) {
        const std::uint64_t rc = static_cast<std::uint64_t>(real_counts[static_cast<std::size_t>(Q[static_cast<std::size_t>(oi)])]);
        owner_events += rc;
        std::uint64_t others = 0;
        for (int oj = 0; oj < nq; ++oj) {
            if (oj == oi) continue;
            others += static_cast<std::uint64_t>(real_counts[static_cast<std::size_t>(Q[static_cast<std::size_t>(oj)])]);
        }
        pair_terms += rc * others;
    }
    c.equals += pair_terms;
    c.multiplies += pair_terms;  // one weight product per equality
    c.short_ranges += owner_events;
    if (cfg.weight_threshold >= 1) {
        c.less_thans += owner_events;
        c.multiplies += owner_events;  // t1*t2
    }
    return c;
}

}  // namespace smpa
