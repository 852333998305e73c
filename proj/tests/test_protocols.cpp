#include <doctest.h>

#include <random>
#include <set>

#include "smpa/protocols.hpp"
#include "support/harness.hpp"
#include "support/oracles.hpp"

using namespace smpa;
using namespace smpa::testing;

namespace {

// Non-internal reveals must match the allowed label prefixes exactly; all
// internal reveals must come from the comparison machinery.
void audit_reveals(const std::vector<Reveal>& log, const std::vector<std::string>& allowed_prefixes) {
    static const std::set<std::string> machinery = {"random_bit.r2", "bitwise_random.range", "lsb.mask"};
    for (const auto& r : log) {
        if (r.internal) {
            CHECK(machinery.count(r.label) == 1);
            continue;
        }
        bool ok = false;
        for (const auto& p : allowed_prefixes)
            if (r.label.rfind(p, 0) == 0) {
                ok = true;
                break;
            }
        INFO("unexpected reveal label: ", r.label);
        CHECK(ok);
    }
}

std::vector<std::vector<SharedEvent>> deal_events(const Field& f, int m,
                                                  const std::vector<std::vector<OracleEvent>>& evs,
                                                  int s, Rng& rng,
                                                  std::vector<int>& real_counts) {
    // returns per-peer [input_peer][slot] views, padded to s
    ShamirScheme scheme(f, m);
    const int n = static_cast<int>(evs.size());
    std::vector<std::vector<SharedEvent>> out;  // placeholder shape [pp] built below
    std::vector<std::vector<std::vector<SharedEvent>>> per_pp(
        static_cast<std::size_t>(m),
        std::vector<std::vector<SharedEvent>>(static_cast<std::size_t>(n),
                                              std::vector<SharedEvent>(static_cast<std::size_t>(s))));
    real_counts.assign(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        real_counts[static_cast<std::size_t>(i)] = static_cast<int>(evs[static_cast<std::size_t>(i)].size());
        for (int j = 0; j < s; ++j) {
            fe key = pad_key(f), weight = 0;
            if (j < real_counts[static_cast<std::size_t>(i)]) {
                key = evs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].key;
                weight = evs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].weight;
            }
            const auto ks = scheme.share(key, rng);
            const auto ws = scheme.share(weight, rng);
            for (int pp = 0; pp < m; ++pp) {
                per_pp[static_cast<std::size_t>(pp)][static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    SharedEvent{ks[static_cast<std::size_t>(pp)], ws[static_cast<std::size_t>(pp)]};
            }
        }
    }
    // flatten: caller indexes per peer
    out.reserve(per_pp.size() * per_pp[0].size());
    (void)out;
    // store in a static-free way: we return via lambda capture instead
    // (kept simple: caller uses per_pp through the returned value)
    std::vector<std::vector<SharedEvent>> flat;
    for (auto& pp : per_pp)
        for (auto& peer : pp) flat.push_back(peer);
    return flat;  // [pp*n + input_peer]
}

}  // namespace

TEST_CASE("vector addition: examples and oracle") {
    Field f(find_prime(31, 3));
    SeededRng rng(1);

    // (1,2,3) + (4,5,6) = (5,7,9)
    const auto p1 = deal(f, 3, {1, 2, 3}, rng);
    const auto p2 = deal(f, 3, {4, 5, 6}, rng);
    auto results = run_peers(f, 3, 2, [&](int i, Engine& eng) {
        auto out = run_vector_addition(
            eng, {p1[static_cast<std::size_t>(i)], p2[static_cast<std::size_t>(i)]});
        CHECK(eng.window_counters().multiplications == 0);
        CHECK(eng.window_counters().rounds == 1);
        audit_reveals(eng.reveal_log(), {"D["});
        return out;
    });
    CHECK(results[0] == std::vector<fe>{5, 7, 9});
    CHECK(results[1] == results[0]);
    CHECK(results[2] == results[0]);

    // all-zero vectors stay zero
    const auto z = deal(f, 3, {0, 0}, rng);
    auto zres = run_peers(f, 3, 3, [&](int i, Engine& eng) {
        return run_vector_addition(eng, {z[static_cast<std::size_t>(i)], z[static_cast<std::size_t>(i)]});
    });
    CHECK(zres[0] == std::vector<fe>{0, 0});

    // randomized oracle check, n=4 peers, r=32
    std::mt19937_64 gen(4);
    std::vector<std::vector<std::uint64_t>> vecs(4, std::vector<std::uint64_t>(32));
    for (auto& v : vecs)
        for (auto& x : v) x = gen() % 1000;
    std::vector<std::vector<std::vector<fe>>> dealt;
    for (const auto& v : vecs) dealt.push_back(deal(f, 5, std::vector<fe>(v.begin(), v.end()), rng));
    auto rres = run_peers(f, 5, 5, [&](int i, Engine& eng) {
        std::vector<std::vector<fe>> slices;
        for (const auto& dv : dealt) slices.push_back(dv[static_cast<std::size_t>(i)]);
        return run_vector_addition(eng, slices);
    });
    const auto want = oracle_addition(vecs);
    CHECK(rres[0] == std::vector<fe>(want.begin(), want.end()));

    CHECK_THROWS_AS(run_peers(f, 3, 6,
                              [&](int i, Engine& eng) {
                                  return run_vector_addition(
                                      eng, {p1[static_cast<std::size_t>(i)],
                                            std::vector<fe>{1, 2}});  // wrong dimension
                              }),
                    ValidationError);
}

TEST_CASE("entropy: closed-form examples") {
    Field f(find_prime(31, 3));
    SeededRng rng(7);

    // q=2, two items with counts (2,2): S=4, sigma=8, H = 0.5
    const auto h1 = deal(f, 3, {1, 1}, rng);
    const auto h2 = deal(f, 3, {1, 1}, rng);
    auto res = run_peers(f, 3, 8, [&](int i, Engine& eng) {
        auto out = run_tsallis_entropy(
            eng, {h1[static_cast<std::size_t>(i)], h2[static_cast<std::size_t>(i)]}, 2, 1000);
        CHECK(eng.window_counters().multiplications == 2);  // r * log2(q)
        audit_reveals(eng.reveal_log(), {"entropy.S", "entropy.sigma"});
        return out;
    });
    CHECK(res[0].total == 4);
    CHECK(res[0].sigma == 8);
    CHECK(std::abs(static_cast<double>(res[0].h) - 0.5) < 1e-12);

    // single item: zero entropy
    const auto s1 = deal(f, 3, {5}, rng);
    const auto s2 = deal(f, 3, {2}, rng);
    auto res1 = run_peers(f, 3, 9, [&](int i, Engine& eng) {
        return run_tsallis_entropy(eng, {s1[static_cast<std::size_t>(i)], s2[static_cast<std::size_t>(i)]},
                                   2, 1000);
    });
    CHECK(res1[0].total == 7);
    CHECK(res1[0].sigma == 49);
    CHECK(std::abs(static_cast<double>(res1[0].h)) < 1e-12);

    // uniform over r items: H_2 = 1 - 1/r
    const int r = 16;
    std::vector<fe> uni(r, 3);
    const auto hu = deal(f, 3, uni, rng);
    auto res2 = run_peers(f, 3, 10, [&](int i, Engine& eng) {
        return run_tsallis_entropy(eng, {hu[static_cast<std::size_t>(i)]}, 2, 1000);
    });
    CHECK(std::abs(static_cast<double>(res2[0].h) - (1.0 - 1.0 / r)) < 1e-9);
}

TEST_CASE("entropy: general q, oracle, and guards") {
    Field f(find_prime(40, 3));
    SeededRng rng(11);
    std::mt19937_64 gen(12);

    for (std::uint64_t q : {2ULL, 4ULL, 3ULL, 5ULL}) {
        std::vector<std::vector<std::uint64_t>> hists(3, std::vector<std::uint64_t>(20));
        for (auto& h : hists)
            for (auto& x : h) x = gen() % 50;
        hists[0][0] += 1;  // keep S > 0
        std::vector<std::vector<std::vector<fe>>> dealt;
        for (const auto& h : hists) dealt.push_back(deal(f, 3, std::vector<fe>(h.begin(), h.end()), rng));
        auto res = run_peers(f, 3, 13 + q, [&](int i, Engine& eng) {
            std::vector<std::vector<fe>> slices;
            for (const auto& dv : dealt) slices.push_back(dv[static_cast<std::size_t>(i)]);
            auto out = run_tsallis_entropy(eng, slices, q, 150);
            // r * (floor(log2 q) + popcount(q) - 1) multiplications
            const std::uint64_t per_item =
                static_cast<std::uint64_t>(std::bit_width(q)) - 1 +
                static_cast<std::uint64_t>(std::popcount(q)) - 1;
            CHECK(eng.window_counters().multiplications == 20 * per_item);
            return out;
        });
        const auto want = oracle_entropy(hists, q);
        CHECK(res[0].total == want.total);
        CHECK(res[0].sigma == want.sigma);
        CHECK(std::abs(static_cast<double>(res[0].h - want.h)) < 1e-9);
    }

    // S = 0 is an error
    const auto z = deal(f, 3, {0, 0}, rng);
    CHECK_THROWS_AS(run_peers(f, 3, 20,
                              [&](int i, Engine& eng) {
                                  return run_tsallis_entropy(eng, {z[static_cast<std::size_t>(i)]}, 2, 10);
                              }),
                    ProtocolError);

    // overflow guard: bound^q must stay below p
    Field f13(13);
    const auto h13 = deal(f13, 3, {1}, rng);
    CHECK_THROWS_AS(run_peers(f13, 3, 21,
                              [&](int i, Engine& eng) {
                                  return run_tsallis_entropy(eng, {h13[static_cast<std::size_t>(i)]}, 2, 4);
                              }),
                    ValidationError);
}

TEST_CASE("distinct count: example, oracle, costs") {
    Field f(find_prime(31, 3));
    SeededRng rng(22);

    // peer1 sees {0,2}, peer2 sees {2,3} of K=4: distinct = 3
    auto negate = [](const std::vector<int>& seen) {
        std::vector<fe> neg;
        for (int b : seen) neg.push_back(b ? 0 : 1);
        return neg;
    };
    const auto c1 = deal(f, 3, negate({1, 0, 1, 0}), rng);
    const auto c2 = deal(f, 3, negate({0, 0, 1, 1}), rng);
    auto res = run_peers(f, 3, 23, [&](int i, Engine& eng) {
        auto count = run_distinct_count(
            eng, {c1[static_cast<std::size_t>(i)], c2[static_cast<std::size_t>(i)]});
        CHECK(eng.window_counters().multiplications == (2 - 1) * 4);  // (n-1)K
        audit_reveals(eng.reveal_log(), {"distinct.sigma"});
        return count;
    });
    CHECK(res[0] == 3);

    // nobody sees anything / everyone sees everything
    const auto all0 = deal(f, 3, negate({0, 0, 0}), rng);
    const auto all1 = deal(f, 3, negate({1, 1, 1}), rng);
    auto res2 = run_peers(f, 3, 24, [&](int i, Engine& eng) {
        const auto a = run_distinct_count(eng, {all0[static_cast<std::size_t>(i)], all0[static_cast<std::size_t>(i)]});
        const auto b = run_distinct_count(eng, {all1[static_cast<std::size_t>(i)], all1[static_cast<std::size_t>(i)]});
        return std::pair{a, b};
    });
    CHECK(res2[0].first == 0);
    CHECK(res2[0].second == 3);

    // randomized oracle + AND-tree round count
    std::mt19937_64 gen(25);
    for (int n : {3, 5, 10}) {
        const int K = 64;
        std::vector<std::vector<int>> seen(static_cast<std::size_t>(n), std::vector<int>(K));
        for (auto& p : seen)
            for (auto& b : p) b = static_cast<int>(gen() % 3 == 0);
        std::vector<std::vector<std::vector<fe>>> dealt;
        for (const auto& p : seen) dealt.push_back(deal(f, 3, negate(p), rng));
        auto rres = run_peers(f, 3, 26 + static_cast<std::uint64_t>(n), [&](int i, Engine& eng) {
            std::vector<std::vector<fe>> slices;
            for (const auto& dv : dealt) slices.push_back(dv[static_cast<std::size_t>(i)]);
            const auto count = run_distinct_count(eng, slices);
            CHECK(eng.window_counters().multiplications ==
                  static_cast<std::uint64_t>(n - 1) * K);
            return count;
        });
        CHECK(rres[0] == oracle_distinct(seen));
    }
}

TEST_CASE("event correlation: threshold example") {
    Field f(find_prime(16, 3));
    SeededRng rng(30);

    // three peers, one event each: two share key 10
    std::vector<std::vector<OracleEvent>> evs = {{{10, 3}}, {{10, 4}}, {{99, 1}}};
    EventCorrelationConfig cfg;
    cfg.n = 3;
    cfg.s = 1;
    cfg.count_threshold = 1;
    cfg.weight_threshold = 4;
    cfg.max_weight = 100;

    std::vector<int> rc;
    const auto flat = deal_events(f, 3, evs, cfg.s, rng, rc);
    auto res = run_peers(f, 3, 31, [&](int i, Engine& eng) {
        std::vector<std::vector<SharedEvent>> mine;
        for (int peer = 0; peer < cfg.n; ++peer)
            mine.push_back(flat[static_cast<std::size_t>(i * cfg.n + peer)]);
        auto out = run_event_correlation(eng, cfg, mine, rc);
        audit_reveals(eng.reveal_log(),
                      {"qualify[", "event.key[", "event.count[", "event.weight[", "event.reporter["});
        return out;
    });
    REQUIRE(res[0].events.size() == 1);
    CHECK(res[0].events[0].key == 10);
    CHECK(res[0].events[0].count == 1);
    CHECK(res[0].events[0].weight_sum == 4);
    CHECK(res[0].events[0].reporters == std::vector<int>{0, 1});
    CHECK(res[0].disqualified.empty());
    // all peers agree
    CHECK(res[1].events[0].key == res[0].events[0].key);
    CHECK(res[2].events.size() == 1);

    // raising the weight threshold blocks reconstruction
    cfg.weight_threshold = 5;
    auto res2 = run_peers(f, 3, 32, [&](int i, Engine& eng) {
        std::vector<std::vector<SharedEvent>> mine;
        for (int peer = 0; peer < cfg.n; ++peer)
            mine.push_back(flat[static_cast<std::size_t>(i * cfg.n + peer)]);
        return run_event_correlation(eng, cfg, mine, rc);
    });
    CHECK(res2[0].events.empty());
}

TEST_CASE("event correlation: verification disqualifies cheaters") {
    Field f(find_prime(16, 3));
    SeededRng rng(33);

    // peer 1 reports weight 7 with w_max 5; peer 2 duplicates a key
    std::vector<std::vector<OracleEvent>> evs = {{{10, 3}, {11, 2}}, {{10, 7}, {12, 1}}, {{13, 1}, {13, 2}}, {{10, 2}, {11, 1}}};
    EventCorrelationConfig cfg;
    cfg.n = 4;
    cfg.s = 2;
    cfg.count_threshold = 1;
    cfg.weight_threshold = 1;
    cfg.max_weight = 5;
    cfg.verify_weights = true;
    cfg.verify_keys = true;

    std::vector<int> rc;
    const auto flat = deal_events(f, 3, evs, cfg.s, rng, rc);
    auto res = run_peers(f, 3, 34, [&](int i, Engine& eng) {
        std::vector<std::vector<SharedEvent>> mine;
        for (int peer = 0; peer < cfg.n; ++peer)
            mine.push_back(flat[static_cast<std::size_t>(i * cfg.n + peer)]);
        auto out = run_event_correlation(eng, cfg, mine, rc);
        audit_reveals(eng.reveal_log(),
                      {"verify.weight[", "verify.key[", "qualify[", "event.key[", "event.count[",
                       "event.weight[", "event.reporter["});
        // scheduled op counts match the exact combinatorial expansion
        const auto want = event_correlation_costs(cfg, rc, {1}, {2});
        const auto& sched = eng.window_counters().scheduled;
        auto at = [&](const char* k) {
            auto it = sched.find(k);
            return it == sched.end() ? 0ULL : it->second;
        };
        CHECK(at("equal") == want.equals);
        CHECK(at("less_than") == want.less_thans);
        CHECK(at("short_range") == want.short_ranges);
        CHECK(at("multiply") == want.multiplies);
        return out;
    });
    CHECK(res[0].disqualified == std::vector<int>{1, 2});

    const auto want = oracle_event_correlation(cfg, evs);
    CHECK(want.disqualified == std::set<int>{1, 2});
    REQUIRE(res[0].events.size() == want.events.size());
    for (const auto& ev : res[0].events) {
        REQUIRE(want.events.count(ev.key) == 1);
        const auto& [c, w, rep] = want.events.at(ev.key);
        CHECK(ev.count == c);
        CHECK(ev.weight_sum == w);
        CHECK(ev.reporters == rep);
    }
}

TEST_CASE("event correlation: padding, dedup, randomized oracle") {
    Field f(find_prime(16, 3));
    SeededRng rng(35);
    std::mt19937_64 gen(36);

    for (int trial = 0; trial < 12; ++trial) {
        EventCorrelationConfig cfg;
        cfg.n = 3 + static_cast<int>(gen() % 3);
        cfg.s = 3;
        cfg.count_threshold = 1 + gen() % 2;
        cfg.weight_threshold = gen() % 4;  // 0 disables the weight test
        cfg.max_weight = 20;
        cfg.verify_weights = (gen() % 2) == 0;
        cfg.verify_keys = true;

        // random events with a small key universe to force collisions,
        // distinct keys within each peer, variable real counts
        std::vector<std::vector<OracleEvent>> evs(static_cast<std::size_t>(cfg.n));
        for (auto& peer : evs) {
            const int count = 1 + static_cast<int>(gen() % static_cast<std::uint64_t>(cfg.s));
            std::set<std::uint64_t> used;
            while (static_cast<int>(peer.size()) < count) {
                const std::uint64_t key = gen() % 6;
                if (used.count(key)) continue;
                used.insert(key);
                peer.push_back(OracleEvent{key, 1 + gen() % 10});
            }
        }

        std::vector<int> rc;
        const auto flat = deal_events(f, 3, evs, cfg.s, rng, rc);
        auto res = run_peers(f, 3, 40 + static_cast<std::uint64_t>(trial), [&](int i, Engine& eng) {
            std::vector<std::vector<SharedEvent>> mine;
            for (int peer = 0; peer < cfg.n; ++peer)
                mine.push_back(flat[static_cast<std::size_t>(i * cfg.n + peer)]);
            return run_event_correlation(eng, cfg, mine, rc);
        });

        const auto want = oracle_event_correlation(cfg, evs);
        CHECK(res[0].disqualified.size() == want.disqualified.size());
        REQUIRE(res[0].events.size() == want.events.size());
        for (const auto& ev : res[0].events) {
            REQUIRE(want.events.count(ev.key) == 1);
            const auto& [c, w, rep] = want.events.at(ev.key);
            CHECK(ev.count == c);
            CHECK(ev.weight_sum == w);
            CHECK(ev.reporters == rep);
        }
    }
}

TEST_CASE("event correlation: config validation") {
    Field f(find_prime(16, 3));
    EventCorrelationConfig cfg;
    cfg.n = 3;
    cfg.s = 2;
    cfg.count_threshold = 0;  // rejected
    CHECK_THROWS_AS(cfg.validate(f), ValidationError);
    cfg.count_threshold = 4;  // > n
    CHECK_THROWS_AS(cfg.validate(f), ValidationError);
    cfg.count_threshold = 2;
    cfg.max_weight = 0;
    CHECK_THROWS_AS(cfg.validate(f), ValidationError);
}
