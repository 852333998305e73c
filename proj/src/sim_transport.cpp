#include "smpa/sim_transport.hpp"

#include <thread>

namespace smpa {

SimNetwork::SimNetwork(int m, int n, std::uint64_t seed, LatencyModel latency)
    : m_(m), n_(n), seed_(seed), latency_(latency) {
    const std::size_t nodes = static_cast<std::size_t>(m_ + n_);
    channels_.resize(nodes * nodes);
    for (std::size_t i = 0; i < channels_.size(); ++i) {
        channels_[i] = std::make_unique<Channel>();
        channels_[i]->lat_rng = std::make_unique<SeededRng>(mix_seed(seed_, 0x10000 + i));
    }
    pp_traffic_.resize(static_cast<std::size_t>(m_));
}

std::size_t SimNetwork::chan_index(int from, int to) const {
    const std::size_t nodes = static_cast<std::size_t>(m_ + n_);
    return static_cast<std::size_t>(from) * nodes + static_cast<std::size_t>(to);
}

void SimNetwork::push(int from, int to, Frame f) {
    Channel& ch = *channels_[chan_index(from, to)];
    auto deliver = std::chrono::steady_clock::now();
    if (latency_.enabled()) {
        double ms = latency_.fixed_ms;
        if (latency_.jitter_ms > 0) {
            const double u = static_cast<double>(ch.lat_rng->next_u64() >> 11) / 9007199254740992.0;
            ms += u * latency_.jitter_ms;
        }
        deliver += std::chrono::microseconds(static_cast<long>(ms * 1000.0));
    }
    {
        std::lock_guard<std::mutex> lk(ch.mu);
        ch.q.push_back(Message{std::move(f), deliver});
    }
    ch.cv.notify_one();
}

Frame SimNetwork::pop(int from, int to) {
    Channel& ch = *channels_[chan_index(from, to)];
    std::unique_lock<std::mutex> lk(ch.mu);
    ch.cv.wait(lk, [&] { return !ch.q.empty(); });
    auto deliver_at = ch.q.front().deliver_at;
    lk.unlock();
    std::this_thread::sleep_until(deliver_at);
    lk.lock();
    Frame f = std::move(ch.q.front().frame);
    ch.q.pop_front();
    return f;
}

void SimNetwork::pp_send(int from_pp, int to_pp, Frame f) {
    {
        std::lock_guard<std::mutex> lk(traffic_mu_);
        auto& t = pp_traffic_[static_cast<std::size_t>(from_pp)];
        t.bytes_sent += f.encoded_size();
        t.frames_sent += 1;
    }
    push(from_pp, to_pp, std::move(f));
}

Frame SimNetwork::pp_recv(int at_pp, int from_pp) {
    Frame f = pop(from_pp, at_pp);
    {
        std::lock_guard<std::mutex> lk(traffic_mu_);
        auto& t = pp_traffic_[static_cast<std::size_t>(at_pp)];
        t.bytes_received += f.encoded_size();
        t.frames_received += 1;
    }
    return f;
}

namespace {

class PpMesh final : public MeshTransport {
public:
    PpMesh(SimNetwork& net, int self) : net_(net), self_(self) {}
    int self() const override { return self_; }
    int peer_count() const override { return net_.m(); }
    void send(int dest, Frame f) override { net_.pp_send(self_, dest, std::move(f)); }
    Frame recv(int src) override { return net_.pp_recv(self_, src); }
    const Traffic& traffic() const override { return net_.pp_traffic(self_); }

private:
    SimNetwork& net_;
    int self_;
};

}  // namespace

std::unique_ptr<MeshTransport> SimNetwork::privacy_mesh(int pp) {
    return std::make_unique<PpMesh>(*this, pp);
}

void SimNetwork::input_to_pp(int input, int pp, Frame f) {
    push(m_ + input, pp, std::move(f));
}

Frame SimNetwork::pp_recv_input(int pp, int input) {
    Frame f = pop(m_ + input, pp);
    std::lock_guard<std::mutex> lk(traffic_mu_);
    auto& t = pp_traffic_[static_cast<std::size_t>(pp)];
    t.bytes_received += f.encoded_size();
    t.frames_received += 1;
    return f;
}

void SimNetwork::pp_to_input(int pp, int input, Frame f) {
    {
        std::lock_guard<std::mutex> lk(traffic_mu_);
        auto& t = pp_traffic_[static_cast<std::size_t>(pp)];
        t.bytes_sent += f.encoded_size();
        t.frames_sent += 1;
    }
    push(pp, m_ + input, std::move(f));
}

Frame SimNetwork::input_recv_pp(int input, int pp) {
    return pop(pp, m_ + input);
}

}  // namespace smpa
