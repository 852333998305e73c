#pragma once

#include <cstdint>

#include "smpa/wire.hpp"

namespace smpa {

struct Traffic {
    std::uint64_t bytes_sent = 0;
    std::uint64_t bytes_received = 0;
    std::uint64_t frames_sent = 0;
    std::uint64_t frames_received = 0;
};

// One privacy peer's view of the fully connected peer mesh. Channels are
// FIFO per (src,dst) pair; recv blocks. Implementations: the in-process
// simulator and the TLS mesh.
class MeshTransport {
public:
    virtual ~MeshTransport() = default;
    virtual int self() const = 0;
    virtual int peer_count() const = 0;
    virtual void send(int dest, Frame f) = 0;
    virtual Frame recv(int src) = 0;
    virtual const Traffic& traffic() const = 0;
};

}  // namespace smpa
