#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "smpa/config.hpp"
#include "smpa/engine.hpp"
#include "smpa/protocols.hpp"
#include "smpa/sim_transport.hpp"

namespace smpa {

// Plaintext window input parsed at an input peer.
struct WindowInput {
    std::uint64_t window_id = 0;
    std::vector<fe> values;                       // addition/entropy; distinct: negated bits
    std::vector<std::pair<fe, fe>> events;        // event correlation (real events only)
};

// Parses and validates one window_<id>.csv per the configured protocol.
WindowInput parse_window_file(const std::string& path, std::uint64_t window_id,
                              const PeerConfig& cfg, const Field& field);

// Window ids found in a directory (from window_<id>.csv names), ascending.
std::vector<std::uint64_t> list_window_ids(const std::string& dir);

// Public outcome of one window.
struct WindowOutcome {
    std::uint64_t window_id = 0;
    Protocol protocol = Protocol::Addition;
    std::vector<fe> vector_result;
    EntropyResult entropy;
    std::uint64_t distinct = 0;
    EventCorrelationResult ec;
};

// Result frame (PP -> input peer) encoding and its inverse.
Frame encode_result(const WindowOutcome& o);
WindowOutcome decode_result(const Frame& f, Protocol protocol, std::uint64_t q);

// Canonical result-file text; identical bytes at privacy and input peers.
std::string format_result(const WindowOutcome& o);

// Channel abstractions shared by the TLS and simulator runners.
class InputPeerLinks {
public:
    virtual ~InputPeerLinks() = default;
    virtual int count() const = 0;
    virtual Frame recv_from(int input) = 0;
    virtual void send_to(int input, Frame f) = 0;
};

class PrivacyPeerLinks {
public:
    virtual ~PrivacyPeerLinks() = default;
    virtual int count() const = 0;
    virtual void send_to(int pp, Frame f) = 0;
    virtual Frame recv_from(int pp) = 0;
};

// Privacy-peer window loop: collects input shares, runs the configured
// protocol, writes result + log files, pushes results back. Returns the
// number of windows processed.
int pp_window_loop(Engine& eng, const PeerConfig& cfg, InputPeerLinks& inputs,
                   std::ostream& log, const std::string& result_dir);

// Input-peer window loop over pre-parsed windows.
int input_window_loop(const PeerConfig& cfg, const Field& field, Rng& rng,
                      PrivacyPeerLinks& pps, const std::vector<WindowInput>& windows,
                      const std::string& result_dir, bool realtime = false);

// Process entry points (exit code semantics per errors.hpp).
int run_input_peer(const PeerConfig& cfg, bool realtime = false);
int run_privacy_peer(const PeerConfig& cfg);

struct SimOptions {
    int n = 3;
    int m = 3;
    std::uint64_t seed = 1;
    LatencyModel latency;
};
int run_local_sim(const PeerConfig& cfg, const SimOptions& opt);

}  // namespace smpa
