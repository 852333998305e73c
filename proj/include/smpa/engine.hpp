#pragma once

#include <deque>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "smpa/sharing.hpp"
#include "smpa/transport.hpp"

namespace smpa {

// Instrumentation. "multiplications" counts distributed multiplications
// (one resharing exchange per peer); reconstructions and random sharings
// are tracked separately so cost formulas stay auditable. Attempt counters
// expose how often the randomized subprotocols had to retry, which is the
// only source of run-to-run variation in the counts.
struct Counters {
    std::uint64_t multiplications = 0;
    std::uint64_t reconstructions = 0;
    std::uint64_t random_sharings = 0;
    std::uint64_t rounds = 0;
    std::uint64_t random_bit_attempts = 0;
    std::uint64_t random_bit_retries = 0;
    std::uint64_t bitwise_attempts = 0;
    std::uint64_t bitwise_retries = 0;
    std::map<std::string, std::uint64_t, std::less<>> scheduled;
};

// One public opening. Protocol-level reveals carry the label the protocol
// assigned; internal reveals come from comparison machinery (masked values
// and verdicts on protocol randomness).
struct Reveal {
    std::string label;
    fe value = 0;
    bool internal = false;
};

class Engine;

// What an operation sees while stepping. emit() queues one field element
// for one peer this round; take() consumes the next element that peer sent
// last round. Both sides walk operations in identical order, so matching
// emit/take sequences line up without per-value addressing.
class OpCtx {
public:
    explicit OpCtx(Engine& e) : eng_(e) {}

    int self() const;
    int m() const;
    const Field& field() const;
    const ShamirScheme& scheme() const;
    Rng& rng();

    void emit(int dest, fe v);
    fe take(int src);

    // Shares `secret` with a fresh random polynomial and emits slot j to
    // peer j (the self slot loops back locally).
    void share_out(fe secret);

    // Combines the m values received for a resharing: weighted for a
    // degree-2t product, plain sum for a joint random value.
    fe collect_weighted();
    fe collect_sum();

    // Degree-t opening: interpolates from the t+1 lowest slots and checks
    // every remaining share against that polynomial.
    fe collect_checked();

    void count_mult();
    void count_reconstruct();
    void count_random_sharing();
    void count_random_bit_attempt(bool retry);
    void count_bitwise_attempt(bool retry);
    void log_reveal(std::string_view label, fe value, bool internal);

    fe inv2() const;  // (p+1)/2, cached

private:
    Engine& eng_;
};

class Operation {
public:
    virtual ~Operation() = default;

    // Called once per engine round until it returns true. A step consumes
    // values delivered by the previous exchange and queues values for the
    // next one; an operation must not emit in the step that completes it.
    virtual bool step(OpCtx& ctx) = 0;

    virtual std::string_view kind() const = 0;

    const std::vector<fe>& result() const { return result_; }
    bool result_public() const { return public_result_; }

protected:
    std::vector<fe> result_;
    bool public_result_ = false;
};

// Round-synchronized scheduler run identically by every privacy peer.
// schedule() queues operations under caller-chosen dense ids;
// do_operations() steps them all, exchanging one batch frame per peer per
// round until every operation completes.
class Engine {
public:
    Engine(ShamirScheme scheme, MeshTransport& net, Rng& rng);

    const ShamirScheme& scheme() const { return scheme_; }
    const Field& field() const { return scheme_.field(); }
    int self() const { return net_.self(); }
    int m() const { return scheme_.m(); }
    Rng& rng() { return rng_; }
    MeshTransport& transport() { return net_; }

    void set_window(std::uint64_t window);
    std::uint64_t window() const { return window_; }

    void schedule(int id, std::unique_ptr<Operation> op);
    void do_operations();

    // Results of completed operations, by id, valid until the window resets.
    fe result_share(int id) const;
    fe result_public_value(int id) const;
    const std::vector<fe>& result_vector(int id) const;

    // Counters for the last do_operations() batch and for the whole window.
    const Counters& batch_counters() const { return batch_; }
    const Counters& window_counters() const { return window_total_; }
    std::uint64_t mult_counter() const { return batch_.multiplications; }
    std::uint64_t round_counter() const { return batch_.rounds; }

    const std::vector<Reveal>& reveal_log() const { return reveals_; }

private:
    friend class OpCtx;

    struct Completed {
        std::string kind;
        bool is_public = false;
        std::vector<fe> values;
    };

    void exchange();
    void precompute_weights();

    ShamirScheme scheme_;
    MeshTransport& net_;
    Rng& rng_;

    std::uint64_t window_ = 0;
    std::uint32_t window_round_ = 0;

    std::map<int, std::unique_ptr<Operation>> pending_;
    std::map<int, Completed> completed_;

    // Per-round IO state.
    std::vector<std::vector<WireEntry>> outgoing_;  // per dest, slot = sequence
    std::vector<fe> self_loop_;
    std::vector<std::deque<fe>> inbox_;

    Counters batch_;
    Counters window_total_;
    std::vector<Reveal> reveals_;

    // Interpolation weights: full-set at 0 (degree-2t combine), t+1 lowest
    // at 0 (openings), and per extra slot the weights that predict it from
    // the t+1 lowest (consistency check).
    std::vector<fe> lambda_full_;
    std::vector<fe> lambda_low_;
    std::vector<std::vector<fe>> check_rows_;
    fe inv2_ = 0;
};

}  // namespace smpa
