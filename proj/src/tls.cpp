#include "smpa/tls.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <openssl/err.h>
#include <openssl/evp.h>
#include <openssl/pem.h>
#include <openssl/ssl.h>
#include <openssl/x509.h>

#include <chrono>
#include <cstring>
#include <thread>
#include <vector>

#include "smpa/errors.hpp"

namespace smpa {

namespace {

[[noreturn]] void throw_ssl(const std::string& what) {
    char buf[256] = {0};
    ERR_error_string_n(ERR_get_error(), buf, sizeof(buf));
    throw ConnectionError(what + ": " + buf);
}

std::string digest_hex(X509* cert) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int n = 0;
    if (X509_digest(cert, EVP_sha256(), md, &n) != 1) throw_ssl("X509_digest");
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(2 * n);
    for (unsigned int i = 0; i < n; ++i) {
        s.push_back(digits[md[i] >> 4]);
        s.push_back(digits[md[i] & 0xf]);
    }
    return s;
}

int accept_any_cert(int, X509_STORE_CTX*) {
    // Chain validation is replaced by fingerprint pinning after the
    // handshake; certificates are self-signed by design.
    return 1;
}

}  // namespace

void generate_credentials(const std::string& key_path, const std::string& cert_path,
                          const std::string& common_name, int days) {
    EVP_PKEY* pkey = EVP_EC_gen("P-256");
    if (!pkey) throw_ssl("key generation");

    X509* x = X509_new();
    ASN1_INTEGER_set(X509_get_serialNumber(x), static_cast<long>(std::chrono::system_clock::now().time_since_epoch().count() & 0x7fffffff));
    X509_gmtime_adj(X509_get_notBefore(x), -3600);
    X509_gmtime_adj(X509_get_notAfter(x), 60L * 60 * 24 * days);
    X509_set_pubkey(x, pkey);
    X509_NAME* name = X509_get_subject_name(x);
    X509_NAME_add_entry_by_txt(name, "CN", MBSTRING_ASC,
                               reinterpret_cast<const unsigned char*>(common_name.c_str()), -1, -1, 0);
    X509_set_issuer_name(x, name);
    if (X509_sign(x, pkey, EVP_sha256()) == 0) throw_ssl("X509_sign");

    FILE* kf = std::fopen(key_path.c_str(), "w");
    if (!kf) throw ConnectionError("cannot write key file: " + key_path);
    PEM_write_PrivateKey(kf, pkey, nullptr, nullptr, 0, nullptr, nullptr);
    std::fclose(kf);

    FILE* cf = std::fopen(cert_path.c_str(), "w");
    if (!cf) throw ConnectionError("cannot write cert file: " + cert_path);
    PEM_write_X509(cf, x);
    std::fclose(cf);

    X509_free(x);
    EVP_PKEY_free(pkey);
}

std::string cert_fingerprint(const std::string& cert_path) {
    FILE* cf = std::fopen(cert_path.c_str(), "r");
    if (!cf) throw ConnectionError("cannot read cert file: " + cert_path);
    X509* x = PEM_read_X509(cf, nullptr, nullptr, nullptr);
    std::fclose(cf);
    if (!x) throw_ssl("PEM_read_X509");
    std::string fp = digest_hex(x);
    X509_free(x);
    return fp;
}

// ---- TlsConn ----

TlsConn::TlsConn(TlsConn&& o) noexcept : ssl_(o.ssl_), fd_(o.fd_) {
    o.ssl_ = nullptr;
    o.fd_ = -1;
}

TlsConn& TlsConn::operator=(TlsConn&& o) noexcept {
    if (this != &o) {
        close();
        ssl_ = o.ssl_;
        fd_ = o.fd_;
        o.ssl_ = nullptr;
        o.fd_ = -1;
    }
    return *this;
}

TlsConn::~TlsConn() { close(); }

void TlsConn::close() {
    if (ssl_) {
        SSL_shutdown(static_cast<SSL*>(ssl_));
        SSL_free(static_cast<SSL*>(ssl_));
        ssl_ = nullptr;
    }
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

std::string TlsConn::peer_fingerprint() const {
    X509* cert = SSL_get1_peer_certificate(static_cast<SSL*>(ssl_));
    if (!cert) throw ConnectionError("AuthFailure: peer presented no certificate");
    std::string fp = digest_hex(cert);
    X509_free(cert);
    return fp;
}

void TlsConn::set_recv_timeout(int seconds) {
    timeval tv{};
    tv.tv_sec = seconds;
    setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
}

void TlsConn::write_frame(const Frame& f) {
    const auto bytes = encode_frame(f);
    std::size_t off = 0;
    while (off < bytes.size()) {
        const int n = SSL_write(static_cast<SSL*>(ssl_), bytes.data() + off,
                                static_cast<int>(bytes.size() - off));
        if (n <= 0) throw ConnectionError("PeerDisconnected: write failed");
        off += static_cast<std::size_t>(n);
    }
}

Frame TlsConn::read_frame() {
    auto read_all = [&](std::uint8_t* dst, std::size_t len) {
        std::size_t off = 0;
        while (off < len) {
            const int n =
                SSL_read(static_cast<SSL*>(ssl_), dst + off, static_cast<int>(len - off));
            if (n <= 0) {
                const int err = SSL_get_error(static_cast<SSL*>(ssl_), n);
                if (err == SSL_ERROR_WANT_READ || err == SSL_ERROR_SYSCALL) {
                    if (errno == EAGAIN || errno == EWOULDBLOCK)
                        throw ConnectionError("Timeout: no frame within the receive deadline");
                }
                throw ConnectionError("PeerDisconnected: read failed");
            }
            off += static_cast<std::size_t>(n);
        }
    };
    std::uint8_t head[kFrameHeaderSize];
    read_all(head, sizeof(head));
    const FrameHeader h = decode_header(head);
    std::vector<std::uint8_t> buf(kFrameHeaderSize + 12ULL * h.count);
    std::memcpy(buf.data(), head, sizeof(head));
    if (h.count) read_all(buf.data() + kFrameHeaderSize, buf.size() - kFrameHeaderSize);
    return decode_frame(buf.data(), buf.size());
}

// ---- TlsEndpoint ----

TlsEndpoint::TlsEndpoint(const std::string& key_path, const std::string& cert_path) {
    SSL_CTX* ctx = SSL_CTX_new(TLS_method());
    if (!ctx) throw_ssl("SSL_CTX_new");
    SSL_CTX_set_min_proto_version(ctx, TLS1_2_VERSION);
    if (SSL_CTX_use_certificate_file(ctx, cert_path.c_str(), SSL_FILETYPE_PEM) != 1)
        throw_ssl("use_certificate_file " + cert_path);
    if (SSL_CTX_use_PrivateKey_file(ctx, key_path.c_str(), SSL_FILETYPE_PEM) != 1)
        throw_ssl("use_PrivateKey_file " + key_path);
    SSL_CTX_set_verify(ctx, SSL_VERIFY_PEER | SSL_VERIFY_FAIL_IF_NO_PEER_CERT, accept_any_cert);
    ctx_ = ctx;
}

TlsEndpoint::~TlsEndpoint() {
    close_listener();
    if (ctx_) SSL_CTX_free(static_cast<SSL_CTX*>(ctx_));
}

void TlsEndpoint::listen(int port) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw ConnectionError("socket() failed");
    int one = 1;
    setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
        throw ConnectionError("bind failed on port " + std::to_string(port));
    if (::listen(listen_fd_, 64) != 0) throw ConnectionError("listen failed");
}

void TlsEndpoint::close_listener() {
    if (listen_fd_ >= 0) {
        ::close(listen_fd_);
        listen_fd_ = -1;
    }
}

TlsConn TlsEndpoint::accept(int timeout_seconds) {
    timeval tv{};
    tv.tv_sec = timeout_seconds;
    setsockopt(listen_fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    sockaddr_in peer{};
    socklen_t len = sizeof(peer);
    const int fd = ::accept(listen_fd_, reinterpret_cast<sockaddr*>(&peer), &len);
    if (fd < 0) throw ConnectionError("Timeout: no peer connected within the start deadline");
    int one = 1;
    setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));

    SSL* ssl = SSL_new(static_cast<SSL_CTX*>(ctx_));
    SSL_set_fd(ssl, fd);
    if (SSL_accept(ssl) != 1) {
        SSL_free(ssl);
        ::close(fd);
        throw ConnectionError("AuthFailure: TLS accept failed");
    }
    TlsConn c;
    c.ssl_ = ssl;
    c.fd_ = fd;
    return c;
}

TlsConn TlsEndpoint::connect(const std::string& host, int port, int timeout_seconds) {
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(timeout_seconds);
    for (;;) {
        addrinfo hints{};
        hints.ai_family = AF_INET;
        hints.ai_socktype = SOCK_STREAM;
        addrinfo* res = nullptr;
        if (getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) == 0 && res) {
            const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
            if (fd >= 0 && ::connect(fd, res->ai_addr, res->ai_addrlen) == 0) {
                freeaddrinfo(res);
                int one = 1;
                setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
                SSL* ssl = SSL_new(static_cast<SSL_CTX*>(ctx_));
                SSL_set_fd(ssl, fd);
                if (SSL_connect(ssl) != 1) {
                    SSL_free(ssl);
                    ::close(fd);
                    throw ConnectionError("AuthFailure: TLS connect failed");
                }
                TlsConn c;
                c.ssl_ = ssl;
                c.fd_ = fd;
                return c;
            }
            if (fd >= 0) ::close(fd);
            freeaddrinfo(res);
        }
        if (std::chrono::steady_clock::now() >= deadline)
            throw ConnectionError("Timeout: cannot reach " + host + ":" + std::to_string(port));
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
}

std::pair<std::string, int> parse_endpoint(const std::string& ep) {
    const auto pos = ep.rfind(':');
    if (pos == std::string::npos) throw ValidationError("bad endpoint (host:port): " + ep);
    return {ep.substr(0, pos), std::stoi(ep.substr(pos + 1))};
}

}  // namespace smpa
