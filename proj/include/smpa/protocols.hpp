#pragma once

#include <cstdint>
#include <vector>

#include "smpa/compare.hpp"
#include "smpa/engine.hpp"

namespace smpa {

// Protocol drivers, run identically by every privacy peer on its local
// slice of the input sharings. All per-item work inside a step is
// scheduled as one parallel operation batch, and only the values a
// protocol is allowed to publish are opened non-internally.

// ---- vector addition ----

// D = sum of the peers' vectors; no multiplications, one opening round.
std::vector<fe> run_vector_addition(Engine& eng, const std::vector<std::vector<fe>>& vectors);

// ---- Tsallis entropy ----

struct EntropyResult {
    fe total = 0;       // S
    fe sigma = 0;       // sum of (s_k)^q
    long double h = 0;  // (1 - sigma/S^q) / (q-1)
};

// histograms[i][k] = share of input peer i's count for item k.
// max_item_total bounds the aggregated per-item count; (bound)^q must stay
// below p or the run refuses to start.
EntropyResult run_tsallis_entropy(Engine& eng, const std::vector<std::vector<fe>>& histograms,
                                  std::uint64_t q, std::uint64_t max_item_total);

// ---- distinct count ----

// negated[i][k] = share of NOT seen(i,k); input peers negate before
// sharing. Returns the number of items seen by at least one peer.
std::uint64_t run_distinct_count(Engine& eng, const std::vector<std::vector<fe>>& negated);

// ---- event correlation ----

struct EventCorrelationConfig {
    int n = 0;                 // input peers
    int s = 0;                 // event slots per peer per window
    fe count_threshold = 1;    // T_c: other peers reporting the same key
    fe weight_threshold = 0;   // T_w; 0 disables the weight test
    fe max_weight = 1;         // w_max
    bool verify_weights = false;
    bool verify_keys = false;

    void validate(const Field& f) const;
};

// Reserved key used to pad short event lists; weight 0. Real keys must
// stay below it and the output filters it out.
inline fe pad_key(const Field& f) { return f.p() - 1; }

struct SharedEvent {
    fe key = 0;
    fe weight = 0;
};

struct ReconstructedEvent {
    fe key = 0;
    fe count = 0;       // C: other reporters of the same key
    fe weight_sum = 0;  // W: their aggregated weight
    std::vector<int> reporters;
};

struct EventCorrelationResult {
    std::vector<ReconstructedEvent> events;
    std::vector<int> disqualified;
};

// events[i] = peer i's s event share pairs (padded); real_counts[i] gives
// how many of them carry real data (pads trail, publicly declared).
EventCorrelationResult run_event_correlation(Engine& eng, const EventCorrelationConfig& cfg,
                                             const std::vector<std::vector<SharedEvent>>& events,
                                             const std::vector<int>& real_counts);

// Exact operation counts the correlation run will schedule, given which
// peers fail each verification step: {equal, less_than, short_range,
// multiply} invocations.
struct EventCorrelationCosts {
    std::uint64_t equals = 0;
    std::uint64_t less_thans = 0;
    std::uint64_t short_ranges = 0;
    std::uint64_t multiplies = 0;
};
EventCorrelationCosts event_correlation_costs(const EventCorrelationConfig& cfg,
                                              const std::vector<int>& real_counts,
                                              const std::vector<int>& weight_disqualified,
                                              const std::vector<int>& key_disqualified);

}  // namespace smpa
