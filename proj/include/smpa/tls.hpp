#pragma once

#include <memory>
#include <string>

#include "smpa/wire.hpp"

namespace smpa {

// Self-signed credential generation (P-256, SHA-256). Peers authenticate
// each other by certificate fingerprint, distributed out of band.
void generate_credentials(const std::string& key_path, const std::string& cert_path,
                          const std::string& common_name, int days = 3650);
std::string cert_fingerprint(const std::string& cert_path);

// One mutually-authenticated TLS connection with blocking frame IO.
class TlsConn {
public:
    TlsConn() = default;
    TlsConn(TlsConn&&) noexcept;
    TlsConn& operator=(TlsConn&&) noexcept;
    ~TlsConn();
    TlsConn(const TlsConn&) = delete;
    TlsConn& operator=(const TlsConn&) = delete;

    bool valid() const { return ssl_ != nullptr; }
    std::string peer_fingerprint() const;  // sha256 hex of the peer cert

    void write_frame(const Frame& f);
    Frame read_frame();  // throws ConnectionError on EOF/timeout

    // receive timeout for subsequent reads; 0 disables
    void set_recv_timeout(int seconds);
    void close();

private:
    friend class TlsEndpoint;
    void* ssl_ = nullptr;  // SSL*
    int fd_ = -1;
};

// Shared identity (key + certificate) from which connections are made.
class TlsEndpoint {
public:
    TlsEndpoint(const std::string& key_path, const std::string& cert_path);
    ~TlsEndpoint();
    TlsEndpoint(const TlsEndpoint&) = delete;
    TlsEndpoint& operator=(const TlsEndpoint&) = delete;

    // Client connect with retry until the deadline (seconds).
    TlsConn connect(const std::string& host, int port, int timeout_seconds);

    // Server side.
    void listen(int port);
    TlsConn accept(int timeout_seconds);  // throws ConnectionError on deadline
    void close_listener();

private:
    void* ctx_ = nullptr;  // SSL_CTX*
    int listen_fd_ = -1;
};

// "host:port" split helper.
std::pair<std::string, int> parse_endpoint(const std::string& ep);

}  // namespace smpa
