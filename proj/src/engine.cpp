#include "smpa/engine.hpp"

#include <algorithm>

namespace smpa {

// ---- OpCtx ----

int OpCtx::self() const { return eng_.self(); }
int OpCtx::m() const { return eng_.m(); }
const Field& OpCtx::field() const { return eng_.field(); }
const ShamirScheme& OpCtx::scheme() const { return eng_.scheme_; }
Rng& OpCtx::rng() { return eng_.rng_; }
fe OpCtx::inv2() const { return eng_.inv2_; }

void OpCtx::emit(int dest, fe v) {
    if (dest == eng_.self()) {
        eng_.self_loop_.push_back(v);
        return;
    }
    auto& out = eng_.outgoing_[static_cast<std::size_t>(dest)];
    out.push_back(WireEntry{static_cast<std::uint32_t>(out.size()), v});
}

fe OpCtx::take(int src) {
    auto& q = eng_.inbox_[static_cast<std::size_t>(src)];
    if (q.empty()) throw ProtocolError("ProtocolDesync: inbox underrun");
    fe v = q.front();
    q.pop_front();
    return v;
}

void OpCtx::share_out(fe secret) {
    const auto shares = eng_.scheme_.share(secret, eng_.rng_);
    for (int j = 0; j < eng_.m(); ++j) emit(j, shares[static_cast<std::size_t>(j)]);
}

fe OpCtx::collect_weighted() {
    const Field& f = eng_.field();
    fe acc = 0;
    for (int j = 0; j < eng_.m(); ++j)
        acc = f.add(acc, f.mul(eng_.lambda_full_[static_cast<std::size_t>(j)], take(j)));
    return acc;
}

fe OpCtx::collect_sum() {
    const Field& f = eng_.field();
    fe acc = 0;
    for (int j = 0; j < eng_.m(); ++j) acc = f.add(acc, take(j));
    return acc;
}

fe OpCtx::collect_checked() {
    const Field& f = eng_.field();
    const int t = eng_.scheme_.t();
    std::vector<fe> sh(static_cast<std::size_t>(eng_.m()));
    for (int j = 0; j < eng_.m(); ++j) sh[static_cast<std::size_t>(j)] = take(j);

    fe value = 0;
    for (int j = 0; j <= t; ++j)
        value = f.add(value, f.mul(eng_.lambda_low_[static_cast<std::size_t>(j)], sh[static_cast<std::size_t>(j)]));

    // Every extra share must lie on the degree-t polynomial through the
    // first t+1; a mismatch means a corrupted or inconsistent sharing.
    for (int e = t + 1; e < eng_.m(); ++e) {
        const auto& row = eng_.check_rows_[static_cast<std::size_t>(e - t - 1)];
        fe pred = 0;
        for (int j = 0; j <= t; ++j)
            pred = f.add(pred, f.mul(row[static_cast<std::size_t>(j)], sh[static_cast<std::size_t>(j)]));
        if (pred != sh[static_cast<std::size_t>(e)])
            throw ProtocolError("InconsistentShares: reconstruction cross-check failed");
    }
    return value;
}

void OpCtx::count_mult() {
    ++eng_.batch_.multiplications;
    ++eng_.window_total_.multiplications;
}

void OpCtx::count_reconstruct() {
    ++eng_.batch_.reconstructions;
    ++eng_.window_total_.reconstructions;
}

void OpCtx::count_random_sharing() {
    ++eng_.batch_.random_sharings;
    ++eng_.window_total_.random_sharings;
}

void OpCtx::count_random_bit_attempt(bool retry) {
    ++eng_.batch_.random_bit_attempts;
    ++eng_.window_total_.random_bit_attempts;
    if (retry) {
        ++eng_.batch_.random_bit_retries;
        ++eng_.window_total_.random_bit_retries;
    }
}

void OpCtx::count_bitwise_attempt(bool retry) {
    ++eng_.batch_.bitwise_attempts;
    ++eng_.window_total_.bitwise_attempts;
    if (retry) {
        ++eng_.batch_.bitwise_retries;
        ++eng_.window_total_.bitwise_retries;
    }
}

void OpCtx::log_reveal(std::string_view label, fe value, bool internal) {
    eng_.reveals_.push_back(Reveal{std::string(label), value, internal});
}

// ---- Engine ----

Engine::Engine(ShamirScheme scheme, MeshTransport& net, Rng& rng)
    : scheme_(std::move(scheme)), net_(net), rng_(rng) {
    if (net_.peer_count() != scheme_.m()) throw ValidationError("engine: transport size != m");
    outgoing_.resize(static_cast<std::size_t>(m()));
    inbox_.resize(static_cast<std::size_t>(m()));
    precompute_weights();
}

void Engine::precompute_weights() {
    const Field& f = field();
    const int t = scheme_.t();
    std::vector<fe> all_points, low_points;
    for (int j = 0; j < m(); ++j) all_points.push_back(static_cast<fe>(j + 1));
    for (int j = 0; j <= t; ++j) low_points.push_back(static_cast<fe>(j + 1));
    lambda_full_ = f.lagrange_weights(all_points, 0);
    lambda_low_ = f.lagrange_weights(low_points, 0);
    check_rows_.clear();
    for (int e = t + 1; e < m(); ++e)
        check_rows_.push_back(f.lagrange_weights(low_points, static_cast<fe>(e + 1)));
    inv2_ = f.inv(2 % f.p());
}

void Engine::set_window(std::uint64_t window) {
    if (!pending_.empty()) throw ProtocolError("set_window: operations pending");
    window_ = window;
    window_round_ = 0;
    window_total_ = Counters{};
    batch_ = Counters{};
    reveals_.clear();
    completed_.clear();
}

void Engine::schedule(int id, std::unique_ptr<Operation> op) {
    if (pending_.count(id)) throw ValidationError("schedule: DuplicateId");
    ++batch_.scheduled[std::string(op->kind())];
    ++window_total_.scheduled[std::string(op->kind())];
    pending_.emplace(id, std::move(op));
}

void Engine::do_operations() {
    // Reset per-batch counters, keep scheduled-op tallies made since the
    // previous batch.
    auto scheduled = std::move(batch_.scheduled);
    batch_ = Counters{};
    batch_.scheduled = std::move(scheduled);

    if (pending_.empty()) return;

    // Caller-assigned ids must be unique (checked at schedule) and dense.
    const int lo = pending_.begin()->first;
    const int hi = pending_.rbegin()->first;
    if (hi - lo + 1 != static_cast<int>(pending_.size()))
        throw ValidationError("do_operations: operation ids not dense");

    std::vector<int> active;
    active.reserve(pending_.size());
    for (auto& [id, op] : pending_) active.push_back(id);

    OpCtx ctx(*this);
    while (!active.empty()) {
        std::vector<int> still;
        still.reserve(active.size());
        for (int id : active) {
            Operation& op = *pending_.at(id);
            if (op.step(ctx))
                completed_[id] = Completed{std::string(op.kind()), op.result_public(), op.result()};
            else
                still.push_back(id);
        }
        for (auto& q : inbox_)
            if (!q.empty()) throw ProtocolError("ProtocolDesync: unconsumed round data");
        if (still.empty()) break;
        active = std::move(still);
        exchange();
    }
    pending_.clear();
}

void Engine::exchange() {
    ++window_round_;
    ++batch_.rounds;
    ++window_total_.rounds;

    const fe p = field().p();
    for (int dest = 0; dest < m(); ++dest) {
        if (dest == self()) continue;
        Frame f;
        f.type = MsgType::RoundBatch;
        f.window = window_;
        f.round = window_round_;
        f.entries = std::move(outgoing_[static_cast<std::size_t>(dest)]);
        outgoing_[static_cast<std::size_t>(dest)].clear();
        net_.send(dest, std::move(f));
    }

    inbox_[static_cast<std::size_t>(self())].assign(self_loop_.begin(), self_loop_.end());
    self_loop_.clear();

    for (int src = 0; src < m(); ++src) {
        if (src == self()) continue;
        Frame f = net_.recv(src);
        if (f.type != MsgType::RoundBatch) throw ProtocolError("ProtocolDesync: unexpected frame type");
        if (f.window != window_) throw ProtocolError("ProtocolDesync: window mismatch");
        if (f.round != window_round_) throw ProtocolError("ProtocolDesync: round mismatch");
        auto& q = inbox_[static_cast<std::size_t>(src)];
        for (const auto& e : f.entries) {
            if (e.value >= p) throw ProtocolError("round batch value out of field");
            q.push_back(e.value);
        }
    }
}

fe Engine::result_share(int id) const {
    const auto& c = completed_.at(id);
    if (c.is_public) throw ValidationError("result_share: operation produced a public value");
    if (c.values.size() != 1) throw ValidationError("result_share: not a scalar result");
    return c.values[0];
}

fe Engine::result_public_value(int id) const {
    const auto& c = completed_.at(id);
    if (!c.is_public) throw ValidationError("result_public_value: result is a share");
    if (c.values.size() != 1) throw ValidationError("result_public_value: not a scalar result");
    return c.values[0];
}

const std::vector<fe>& Engine::result_vector(int id) const { return completed_.at(id).values; }

}  // namespace smpa
