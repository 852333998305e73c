#pragma once

#include <exception>
#include <functional>
#include <thread>
#include <vector>

#include "smpa/engine.hpp"
#include "smpa/sim_transport.hpp"

namespace smpa::testing {

// Runs fn(peer_index, engine) for every privacy peer on its own thread
// over an in-process network, and returns the per-peer results. Each peer
// draws from an independent deterministic stream derived from `seed`.
template <typename F>
auto run_peers(const Field& field, int m, std::uint64_t seed, F&& fn, LatencyModel lat = {}) {
    using R = std::invoke_result_t<F&, int, Engine&>;
    SimNetwork net(m, 0, seed, lat);
    std::vector<R> results(static_cast<std::size_t>(m));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(m));
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        threads.emplace_back([&, i] {
            try {
                auto mesh = net.privacy_mesh(i);
                SeededRng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
                Engine eng(ShamirScheme(field, m), *mesh, rng);
                results[static_cast<std::size_t>(i)] = fn(i, eng);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

// Shares each value among m peers; returns slices[peer][value_index].
inline std::vector<std::vector<fe>> deal(const Field& field, int m, const std::vector<fe>& values,
                                         Rng& rng) {
    ShamirScheme scheme(field, m);
    std::vector<std::vector<fe>> slices(static_cast<std::size_t>(m),
                                        std::vector<fe>(values.size()));
    for (std::size_t v = 0; v < values.size(); ++v) {
        auto sh = scheme.share(values[v], rng);
        for (int i = 0; i < m; ++i) slices[static_cast<std::size_t>(i)][v] = sh[static_cast<std::size_t>(i)];
    }
    return slices;
}

// Reconstructs a value from one share per peer.
inline fe undeal(const Field& field, int m, const std::vector<fe>& shares_by_peer) {
    ShamirScheme scheme(field, m);
    std::vector<std::pair<int, fe>> indexed;
    for (int i = 0; i < m; ++i) indexed.emplace_back(i, shares_by_peer[static_cast<std::size_t>(i)]);
    return scheme.reconstruct(indexed);
}

}  // namespace smpa::testing
