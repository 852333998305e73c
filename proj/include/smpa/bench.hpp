#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "smpa/protocols.hpp"
#include "smpa/sim_transport.hpp"

namespace smpa {

// One measured configuration. predicted_mults is the count the
// implementation guarantees deterministically (net of randomness retries,
// which the attempt counters fold back in); exact records whether the
// measurement matched it.
struct CostReport {
    std::string name;
    int l = 0, k = 0, m = 0, n = 0;
    std::uint64_t s = 0, r = 0, q = 0, t_c = 0;
    std::uint64_t measured_mults = 0;
    std::uint64_t predicted_mults = 0;
    std::uint64_t measured_rounds = 0;
    std::int64_t predicted_rounds = -1;  // -1: no exact round contract
    std::uint64_t bytes_per_pp = 0;
    double ops_per_second = 0;
    bool exact = false;
};

// Measures every operation and protocol formula at the given fields and
// peer counts. All reports must come back exact.
std::vector<CostReport> verify_costs(const std::vector<FieldParams>& fields,
                                     const std::vector<int>& peer_counts, std::uint64_t seed);

// Throws ProtocolError("FormulaMismatch ...") naming the first offender.
void assert_costs(const std::vector<CostReport>& reports);

// Amortized operations per second for one op kind at the given parallelism
// (simulator transport, optional injected latency).
double throughput(const std::string& op, int parallelism, int m, double latency_ms,
                  std::uint64_t seed, int batches = 10);

// CSV with a fixed column order (documented in the README).
void write_cost_csv(std::ostream& out, const std::vector<CostReport>& reports);

}  // namespace smpa
