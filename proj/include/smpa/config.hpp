#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "smpa/errors.hpp"

namespace smpa {

enum class Role { Input, Privacy };

enum class Protocol : std::uint8_t {
    Addition = 1,
    Entropy = 2,
    DistinctCount = 3,
    EventCorrelation = 4,
};

Protocol protocol_from_string(const std::string& s);
std::string to_string(Protocol p);

// Flat key=value configuration for one peer process. The protocol section
// must agree across all peers; its SHA-256 digest travels in HELLO.
struct PeerConfig {
    Role role = Role::Privacy;
    int peer_id = 0;
    Protocol protocol = Protocol::Addition;

    std::string listen;                       // privacy peers
    std::vector<std::string> privacy_peers;   // endpoints, index = pp id
    int num_input_peers = 0;                  // n
    int min_input_peers = 0;                  // start gate (defaults to n)
    int min_privacy_peers = 0;                // start gate (defaults to m)
    int window_seconds = 300;
    int connect_timeout_seconds = 30;

    std::string input_dir;
    std::string output_dir;
    std::string key_file;
    std::string cert_file;
    std::string trust_file;

    int field_bits = 62;
    int field_max_k = 3;

    // protocol parameters
    std::uint64_t vector_length = 0;     // r or K
    std::uint64_t entropy_q = 2;         // q
    std::uint64_t max_count = 1 << 20;   // per-item local bound (entropy)
    int events_per_peer = 1;             // s
    std::uint64_t count_threshold = 1;   // T_c
    std::uint64_t weight_threshold = 0;  // T_w
    std::uint64_t max_weight = 1;        // w_max
    bool verify_weights = false;
    bool verify_keys = false;

    int m() const { return static_cast<int>(privacy_peers.size()); }
    void validate() const;

    // Digest of the subset every peer must agree on, as 4 words for HELLO.
    std::array<std::uint64_t, 4> shared_hash() const;
};

PeerConfig parse_config_file(const std::string& path);
PeerConfig parse_config_text(const std::string& text, const std::string& origin);

// Trusted fingerprints: lines "<input|privacy> <id> <sha256hex>".
struct TrustStore {
    std::map<std::pair<int, int>, std::string> fp;  // (role, id) -> hex

    static TrustStore load(const std::string& path);
    const std::string& expect(Role role, int id) const;
};

}  // namespace smpa
