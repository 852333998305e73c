#pragma once

#include <condition_variable>
#include <chrono>
#include <deque>
#include <memory>
#include <mutex>
#include <vector>

#include "smpa/rng.hpp"
#include "smpa/transport.hpp"

namespace smpa {

// Per-message delay injected by the simulator: fixed_ms plus a uniform
// draw from [0, jitter_ms), from a per-channel deterministic stream.
struct LatencyModel {
    double fixed_ms = 0.0;
    double jitter_ms = 0.0;
    bool enabled() const { return fixed_ms > 0 || jitter_ms > 0; }
};

// In-process network between m privacy peers and n input peers.
// Every ordered node pair gets its own FIFO queue, so delivery order per
// channel matches send order regardless of injected latency. All message
// content is deterministic given the run seed; latency affects timing only.
class SimNetwork {
public:
    SimNetwork(int m, int n, std::uint64_t seed, LatencyModel latency = {});

    int m() const { return m_; }
    int n() const { return n_; }
    std::uint64_t seed() const { return seed_; }

    // Engine-facing mesh view for one privacy peer.
    std::unique_ptr<MeshTransport> privacy_mesh(int pp);

    // Privacy-peer mesh channels (used by the MeshTransport facade).
    void pp_send(int from_pp, int to_pp, Frame f);
    Frame pp_recv(int at_pp, int from_pp);

    // Input-peer <-> privacy-peer links.
    void input_to_pp(int input, int pp, Frame f);
    Frame pp_recv_input(int pp, int input);
    void pp_to_input(int pp, int input, Frame f);
    Frame input_recv_pp(int input, int pp);

    const Traffic& pp_traffic(int pp) const { return pp_traffic_[static_cast<std::size_t>(pp)]; }

private:

    struct Message {
        Frame frame;
        std::chrono::steady_clock::time_point deliver_at;
    };
    struct Channel {
        std::mutex mu;
        std::condition_variable cv;
        std::deque<Message> q;
        std::unique_ptr<SeededRng> lat_rng;
    };

    // Node numbering: privacy peers 0..m-1, input peers m..m+n-1.
    std::size_t chan_index(int from, int to) const;
    void push(int from, int to, Frame f);
    Frame pop(int from, int to);

    int m_, n_;
    std::uint64_t seed_;
    LatencyModel latency_;
    std::vector<std::unique_ptr<Channel>> channels_;
    std::vector<Traffic> pp_traffic_;
    std::mutex traffic_mu_;
};

}  // namespace smpa
