#include "smpa/peers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <regex>
#include <sstream>
#include <thread>

#include "smpa/tls.hpp"

namespace smpa {

namespace fs = std::filesystem;

// ---- window files ----

std::vector<std::uint64_t> list_window_ids(const std::string& dir) {
    static const std::regex pat(R"(window_(\d+)\.csv)");
    std::vector<std::uint64_t> ids;
    if (!fs::is_directory(dir)) throw ValidationError("input directory does not exist: " + dir);
    for (const auto& e : fs::directory_iterator(dir)) {
        std::smatch m;
        const std::string name = e.path().filename().string();
        if (std::regex_match(name, m, pat)) ids.push_back(std::stoull(m[1].str()));
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

namespace {

std::vector<std::uint64_t> parse_int_line(const std::string& line, const std::string& where) {
    std::vector<std::uint64_t> out;
    std::size_t pos = 0;
    int column = 1;
    while (pos <= line.size()) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string::npos) comma = line.size();
        const std::string tok = line.substr(pos, comma - pos);
        if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
            throw ParseError(where + ": column " + std::to_string(column) +
                             ": expected a non-negative integer, got '" + tok + "'");
        out.push_back(std::stoull(tok));
        pos = comma + 1;
        ++column;
        if (comma == line.size()) break;
    }
    return out;
}

}  // namespace

WindowInput parse_window_file(const std::string& path, std::uint64_t window_id,
                              const PeerConfig& cfg, const Field& field) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open window file: " + path);
    WindowInput w;
    w.window_id = window_id;

    std::string line;
    int lineno = 0;
    std::vector<std::string> lines;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        lines.push_back(line);
    }

    const std::string where = path;
    switch (cfg.protocol) {
        case Protocol::Addition:
        case Protocol::Entropy:
        case Protocol::DistinctCount: {
            if (lines.size() != 1) throw ParseError(where + ": expected exactly one data line");
            auto vals = parse_int_line(lines[0], where + ":1");
            if (vals.size() != cfg.vector_length)
                throw ValidationError(where + ": expected " + std::to_string(cfg.vector_length) +
                                      " values, got " + std::to_string(vals.size()));
            for (std::size_t k = 0; k < vals.size(); ++k) {
                if (vals[k] >= field.p())
                    throw ValidationError(where + ": value at column " + std::to_string(k + 1) +
                                          " exceeds the field");
                if (cfg.protocol == Protocol::DistinctCount && vals[k] > 1)
                    throw ValidationError(where + ": distinct count inputs must be 0/1 (column " +
                                          std::to_string(k + 1) + ")");
                if (cfg.protocol == Protocol::Entropy && vals[k] > cfg.max_count)
                    throw ValidationError(where + ": count at column " + std::to_string(k + 1) +
                                          " exceeds max_count");
            }
            if (cfg.protocol == Protocol::DistinctCount) {
                // share the negated indicator
                w.values.reserve(vals.size());
                for (auto v : vals) w.values.push_back(v ? 0 : 1);
            } else {
                w.values.assign(vals.begin(), vals.end());
            }
            break;
        }
        case Protocol::EventCorrelation: {
            if (static_cast<int>(lines.size()) > cfg.events_per_peer)
                throw ValidationError(where + ": more than events_per_peer lines");
            for (std::size_t i = 0; i < lines.size(); ++i) {
                const std::string lw = where + ":" + std::to_string(i + 1);
                auto vals = parse_int_line(lines[i], lw);
                if (vals.size() != 2) throw ParseError(lw + ": expected 'key,weight'");
                const fe key = vals[0], weight = vals[1];
                if (key >= field.p() - 1)
                    throw ValidationError(lw + ": key collides with the reserved padding value");
                if (weight >= cfg.max_weight)
                    throw ValidationError(lw + ": weight exceeds max_weight");
                w.events.emplace_back(key, weight);
            }
            break;
        }
    }
    return w;
}

// ---- result encoding ----

Frame encode_result(const WindowOutcome& o) {
    Frame f;
    f.type = MsgType::Result;
    f.window = o.window_id;
    std::vector<std::uint64_t> vals;
    switch (o.protocol) {
        case Protocol::Addition:
            vals = o.vector_result;
            break;
        case Protocol::Entropy:
            vals = {o.entropy.total, o.entropy.sigma};
            break;
        case Protocol::DistinctCount:
            vals = {o.distinct};
            break;
        case Protocol::EventCorrelation: {
            vals.push_back(o.ec.disqualified.size());
            for (int d : o.ec.disqualified) vals.push_back(static_cast<std::uint64_t>(d));
            vals.push_back(o.ec.events.size());
            for (const auto& ev : o.ec.events) {
                vals.push_back(ev.key);
                vals.push_back(ev.count);
                vals.push_back(ev.weight_sum);
                vals.push_back(ev.reporters.size());
                for (int r : ev.reporters) vals.push_back(static_cast<std::uint64_t>(r));
            }
            break;
        }
    }
    f.entries.reserve(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i)
        f.entries.push_back(WireEntry{static_cast<std::uint32_t>(i), vals[i]});
    return f;
}

WindowOutcome decode_result(const Frame& f, Protocol protocol, std::uint64_t q) {
    WindowOutcome o;
    o.window_id = f.window;
    o.protocol = protocol;
    std::size_t at = 0;
    auto next = [&]() -> std::uint64_t {
        if (at >= f.entries.size()) throw ParseError("result frame truncated");
        return f.entries[at++].value;
    };
    switch (protocol) {
        case Protocol::Addition:
            for (const auto& e : f.entries) o.vector_result.push_back(e.value);
            break;
        case Protocol::Entropy: {
            o.entropy.total = next();
            o.entropy.sigma = next();
            const long double sq = std::pow(static_cast<long double>(o.entropy.total),
                                            static_cast<long double>(q));
            o.entropy.h = (1.0L - static_cast<long double>(o.entropy.sigma) / sq) /
                          (static_cast<long double>(q) - 1.0L);
            break;
        }
        case Protocol::DistinctCount:
            o.distinct = next();
            break;
        case Protocol::EventCorrelation: {
            const auto nd = next();
            for (std::uint64_t i = 0; i < nd; ++i) o.ec.disqualified.push_back(static_cast<int>(next()));
            const auto ne = next();
            for (std::uint64_t i = 0; i < ne; ++i) {
                ReconstructedEvent ev;
                ev.key = next();
                ev.count = next();
                ev.weight_sum = next();
                const auto nr = next();
                for (std::uint64_t r = 0; r < nr; ++r) ev.reporters.push_back(static_cast<int>(next()));
                o.ec.events.push_back(std::move(ev));
            }
            break;
        }
    }
    return o;
}

std::string format_result(const WindowOutcome& o) {
    std::ostringstream s;
    switch (o.protocol) {
        case Protocol::Addition:
            for (std::size_t i = 0; i < o.vector_result.size(); ++i) {
                if (i) s << ',';
                s << o.vector_result[i];
            }
            s << '\n';
            break;
        case Protocol::Entropy: {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.12Lg", o.entropy.h);
            s << o.entropy.total << ',' << o.entropy.sigma << ',' << buf << '\n';
            break;
        }
        case Protocol::DistinctCount:
            s << o.distinct << '\n';
            break;
        case Protocol::EventCorrelation: {
            s << "disqualified,";
            if (o.ec.disqualified.empty()) s << '-';
            for (std::size_t i = 0; i < o.ec.disqualified.size(); ++i) {
                if (i) s << '|';
                s << o.ec.disqualified[i];
            }
            s << '\n';
            for (const auto& ev : o.ec.events) {
                s << ev.key << ',' << ev.count << ',' << ev.weight_sum << ',';
                for (std::size_t i = 0; i < ev.reporters.size(); ++i) {
                    if (i) s << '|';
                    s << ev.reporters[i];
                }
                s << '\n';
            }
            break;
        }
    }
    return s.str();
}

// ---- privacy-peer window loop ----

namespace {

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + path);
    out << text;
}

}  // namespace

int pp_window_loop(Engine& eng, const PeerConfig& cfg, InputPeerLinks& inputs, std::ostream& log,
                   const std::string& result_dir) {
    const Field& f = eng.field();
    const int n = inputs.count();
    int processed = 0;

    for (;;) {
        std::vector<Frame> frames;
        int byes = 0;
        for (int i = 0; i < n; ++i) {
            Frame fr = inputs.recv_from(i);
            if (fr.type == MsgType::Bye) ++byes;
            else if (fr.type != MsgType::InputShares)
                throw ProtocolError("ProtocolDesync: unexpected frame from input peer " + std::to_string(i));
            frames.push_back(std::move(fr));
        }
        if (byes == n) break;
        if (byes != 0) throw ProtocolError("ProtocolDesync: input peers disagree on remaining windows");
        const std::uint64_t window = frames[0].window;
        for (const auto& fr : frames)
            if (fr.window != window) throw ProtocolError("ProtocolDesync: window id mismatch across inputs");

        eng.set_window(window);
        WindowOutcome o;
        o.window_id = window;
        o.protocol = cfg.protocol;
        const auto t0 = std::chrono::steady_clock::now();

        if (cfg.protocol == Protocol::EventCorrelation) {
            const int s = cfg.events_per_peer;
            std::vector<std::vector<SharedEvent>> events(static_cast<std::size_t>(n));
            std::vector<int> real_counts(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) {
                const auto& fr = frames[static_cast<std::size_t>(i)];
                if (static_cast<int>(fr.entries.size()) != 2 * s)
                    throw ProtocolError("input peer " + std::to_string(i) + ": expected " +
                                        std::to_string(2 * s) + " share slots");
                const int rc = static_cast<int>(fr.round);  // declared real event count
                if (rc < 0 || rc > s)
                    throw ProtocolError("input peer " + std::to_string(i) + ": bad event count");
                real_counts[static_cast<std::size_t>(i)] = rc;
                auto& evs = events[static_cast<std::size_t>(i)];
                evs.resize(static_cast<std::size_t>(s));
                for (int j = 0; j < s; ++j) {
                    const fe k = fr.entries[static_cast<std::size_t>(2 * j)].value;
                    const fe w = fr.entries[static_cast<std::size_t>(2 * j + 1)].value;
                    if (k >= f.p() || w >= f.p()) throw ProtocolError("input share out of field");
                    evs[static_cast<std::size_t>(j)] = SharedEvent{k, w};
                }
            }
            EventCorrelationConfig ec;
            ec.n = n;
            ec.s = s;
            ec.count_threshold = cfg.count_threshold;
            ec.weight_threshold = cfg.weight_threshold;
            ec.max_weight = cfg.max_weight;
            ec.verify_weights = cfg.verify_weights;
            ec.verify_keys = cfg.verify_keys;
            o.ec = run_event_correlation(eng, ec, events, real_counts);
        } else {
            const std::size_t r = cfg.vector_length;
            std::vector<std::vector<fe>> slices(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) {
                const auto& fr = frames[static_cast<std::size_t>(i)];
                if (fr.entries.size() != r)
                    throw ProtocolError("input peer " + std::to_string(i) + ": expected " +
                                        std::to_string(r) + " share slots");
                auto& sl = slices[static_cast<std::size_t>(i)];
                sl.resize(r);
                for (std::size_t k = 0; k < r; ++k) {
                    if (fr.entries[k].value >= f.p()) throw ProtocolError("input share out of field");
                    sl[k] = fr.entries[k].value;
                }
            }
            switch (cfg.protocol) {
                case Protocol::Addition:
                    o.vector_result = run_vector_addition(eng, slices);
                    break;
                case Protocol::Entropy:
                    o.entropy = run_tsallis_entropy(
                        eng, slices, cfg.entropy_q,
                        cfg.max_count * static_cast<std::uint64_t>(n));
                    break;
                case Protocol::DistinctCount:
                    o.distinct = run_distinct_count(eng, slices);
                    break;
                default:
                    break;
            }
        }

        const auto wall =
            std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0);
        const auto& wc = eng.window_counters();
        const auto& tr = eng.transport().traffic();
        log << "window=" << window << " protocol=" << to_string(cfg.protocol)
            << " rounds=" << wc.rounds << " mults=" << wc.multiplications
            << " reconstructions=" << wc.reconstructions << " random_sharings=" << wc.random_sharings
            << " reveals=" << eng.reveal_log().size() << " bytes_sent=" << tr.bytes_sent
            << " bytes_received=" << tr.bytes_received << " wall_ms=" << wall.count() << '\n';
        if (cfg.protocol == Protocol::EventCorrelation)
            for (int d : o.ec.disqualified) log << "window=" << window << " disqualified input peer " << d << '\n';
        log.flush();

        if (!result_dir.empty())
            write_file(result_dir + "/window_" + std::to_string(window) + "_result.csv", format_result(o));

        // Results back to every input peer; cheaters get a disqualify notice.
        const Frame result = encode_result(o);
        for (int i = 0; i < n; ++i) {
            const bool disq = cfg.protocol == Protocol::EventCorrelation &&
                              std::find(o.ec.disqualified.begin(), o.ec.disqualified.end(), i) !=
                                  o.ec.disqualified.end();
            if (disq) {
                Frame d;
                d.type = MsgType::Disqualify;
                d.window = window;
                inputs.send_to(i, std::move(d));
            } else {
                inputs.send_to(i, result);
            }
        }
        ++processed;
    }
    return processed;
}

// ---- input-peer window loop ----

int input_window_loop(const PeerConfig& cfg, const Field& field, Rng& rng, PrivacyPeerLinks& pps,
                      const std::vector<WindowInput>& windows, const std::string& result_dir,
                      bool realtime) {
    const int m = pps.count();
    ShamirScheme scheme(field, m);
    int processed = 0;

    for (const auto& w : windows) {
        if (realtime && processed > 0)
            std::this_thread::sleep_for(std::chrono::seconds(cfg.window_seconds));

        // Share every value; entry layout is protocol specific.
        std::vector<Frame> out(static_cast<std::size_t>(m));
        for (int pp = 0; pp < m; ++pp) {
            out[static_cast<std::size_t>(pp)].type = MsgType::InputShares;
            out[static_cast<std::size_t>(pp)].window = w.window_id;
        }
        std::uint32_t slot = 0;
        auto push_shares = [&](fe value) {
            const auto sh = scheme.share(value, rng);
            for (int pp = 0; pp < m; ++pp)
                out[static_cast<std::size_t>(pp)].entries.push_back(
                    WireEntry{slot, sh[static_cast<std::size_t>(pp)]});
            ++slot;
        };

        if (cfg.protocol == Protocol::EventCorrelation) {
            const int s = cfg.events_per_peer;
            const int rc = static_cast<int>(w.events.size());
            for (int j = 0; j < s; ++j) {
                const fe key = j < rc ? w.events[static_cast<std::size_t>(j)].first : pad_key(field);
                const fe weight = j < rc ? w.events[static_cast<std::size_t>(j)].second : 0;
                push_shares(key);
                push_shares(weight);
            }
            for (int pp = 0; pp < m; ++pp)
                out[static_cast<std::size_t>(pp)].round = static_cast<std::uint32_t>(rc);
        } else {
            for (fe v : w.values) push_shares(v);
        }
        for (int pp = 0; pp < m; ++pp) pps.send_to(pp, std::move(out[static_cast<std::size_t>(pp)]));

        // Every privacy peer reports the same public outcome.
        std::optional<Frame> agreed;
        bool disqualified = false;
        for (int pp = 0; pp < m; ++pp) {
            Frame fr = pps.recv_from(pp);
            if (fr.window != w.window_id) throw ProtocolError("ProtocolDesync: result window mismatch");
            if (fr.type == MsgType::Disqualify) {
                disqualified = true;
                continue;
            }
            if (fr.type != MsgType::Result) throw ProtocolError("ProtocolDesync: unexpected result frame");
            if (!agreed) {
                agreed = fr;
            } else if (!(fr == *agreed)) {
                throw ProtocolError("InconsistentShares: privacy peers disagree on the result");
            }
        }

        if (!result_dir.empty()) {
            const std::string path =
                result_dir + "/window_" + std::to_string(w.window_id) + "_result.csv";
            if (disqualified) {
                write_file(path, "disqualified\n");
            } else if (agreed) {
                write_file(path, format_result(decode_result(*agreed, cfg.protocol, cfg.entropy_q)));
            }
        }
        ++processed;
    }

    for (int pp = 0; pp < m; ++pp) {
        Frame bye;
        bye.type = MsgType::Bye;
        pps.send_to(pp, std::move(bye));
    }
    return processed;
}

// ---- HELLO handshake ----

namespace {

constexpr std::uint64_t kHelloVersion = 1;

Frame make_hello(const PeerConfig& cfg, const Field& field, Role role, int id) {
    const auto hash = cfg.shared_hash();
    Frame h;
    h.type = MsgType::Hello;
    const std::uint64_t vals[] = {kHelloVersion,
                                  role == Role::Privacy ? 1ULL : 0ULL,
                                  static_cast<std::uint64_t>(id),
                                  field.p(),
                                  static_cast<std::uint64_t>(cfg.m()),
                                  static_cast<std::uint64_t>(cfg.num_input_peers),
                                  static_cast<std::uint64_t>(cfg.protocol),
                                  static_cast<std::uint64_t>(cfg.window_seconds),
                                  hash[0], hash[1], hash[2], hash[3]};
    for (std::uint32_t i = 0; i < 12; ++i) h.entries.push_back(WireEntry{i, vals[i]});
    return h;
}

struct HelloInfo {
    Role role;
    int id;
};

HelloInfo check_hello(const Frame& h, const PeerConfig& cfg, const Field& field) {
    if (h.type != MsgType::Hello || h.entries.size() != 12)
        throw ConnectionError("handshake: malformed HELLO");
    auto v = [&](std::size_t i) { return h.entries[i].value; };
    if (v(0) != kHelloVersion) throw ConnectionError("VersionMismatch");
    if (v(3) != field.p()) throw ConnectionError("PrimeMismatch");
    if (v(4) != static_cast<std::uint64_t>(cfg.m()) ||
        v(5) != static_cast<std::uint64_t>(cfg.num_input_peers))
        throw ConnectionError("ConfigMismatch: peer counts differ");
    if (v(6) != static_cast<std::uint64_t>(cfg.protocol)) throw ConnectionError("ConfigMismatch: protocol");
    if (v(7) != static_cast<std::uint64_t>(cfg.window_seconds))
        throw ConnectionError("ConfigMismatch: window length");
    const auto hash = cfg.shared_hash();
    for (int i = 0; i < 4; ++i)
        if (v(static_cast<std::size_t>(8 + i)) != hash[static_cast<std::size_t>(i)])
            throw ConnectionError("ConfigMismatch: config hash");
    HelloInfo info;
    info.role = v(1) == 1 ? Role::Privacy : Role::Input;
    info.id = static_cast<int>(v(2));
    return info;
}

// Outbound PP link with its writer thread: the engine never blocks on a
// send, which keeps the all-write-then-all-read round exchange safe for
// arbitrarily large batches.
struct OutLink {
    TlsConn conn;
    std::thread writer;
    std::mutex mu;
    std::condition_variable cv;
    std::deque<Frame> q;
    bool closing = false;
    std::exception_ptr error;
    std::uint64_t bytes = 0, frames = 0;

    void start() {
        writer = std::thread([this] {
            try {
                for (;;) {
                    Frame f;
                    {
                        std::unique_lock<std::mutex> lk(mu);
                        cv.wait(lk, [&] { return closing || !q.empty(); });
                        if (q.empty() && closing) return;
                        f = std::move(q.front());
                        q.pop_front();
                    }
                    conn.write_frame(f);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lk(mu);
                error = std::current_exception();
            }
        });
    }
    void push(Frame f) {
        std::lock_guard<std::mutex> lk(mu);
        if (error) std::rethrow_exception(error);
        bytes += f.encoded_size();
        frames += 1;
        q.push_back(std::move(f));
        cv.notify_one();
    }
    void stop() {
        {
            std::lock_guard<std::mutex> lk(mu);
            closing = true;
            cv.notify_one();
        }
        if (writer.joinable()) writer.join();
    }
};

class TlsMesh final : public MeshTransport {
public:
    TlsMesh(int self, int m)
        : out_(static_cast<std::size_t>(m)), in_(static_cast<std::size_t>(m)), self_(self), m_(m) {}

    ~TlsMesh() override {
        for (auto& o : out_)
            if (o) o->stop();
    }

    int self() const override { return self_; }
    int peer_count() const override { return m_; }

    void send(int dest, Frame f) override { out_[static_cast<std::size_t>(dest)]->push(std::move(f)); }

    Frame recv(int src) override {
        Frame f = in_[static_cast<std::size_t>(src)].read_frame();
        traffic_.bytes_received += f.encoded_size();
        traffic_.frames_received += 1;
        return f;
    }

    const Traffic& traffic() const override {
        traffic_.bytes_sent = 0;
        traffic_.frames_sent = 0;
        for (const auto& o : out_)
            if (o) {
                traffic_.bytes_sent += o->bytes;
                traffic_.frames_sent += o->frames;
            }
        return traffic_;
    }

    std::vector<std::unique_ptr<OutLink>> out_;
    std::vector<TlsConn> in_;

private:
    int self_ = 0;
    int m_ = 0;
    mutable Traffic traffic_;
};

}  // namespace

// ---- networked privacy peer ----

namespace {

class TlsInputLinks final : public InputPeerLinks {
public:
    explicit TlsInputLinks(int n) : conns_(static_cast<std::size_t>(n)) {}
    int count() const override { return static_cast<int>(conns_.size()); }
    Frame recv_from(int input) override { return conns_[static_cast<std::size_t>(input)].read_frame(); }
    void send_to(int input, Frame f) override {
        conns_[static_cast<std::size_t>(input)].write_frame(f);
    }
    std::vector<TlsConn> conns_;
};

}  // namespace

int run_privacy_peer(const PeerConfig& cfg) {
    cfg.validate();
    const Field field(find_prime(cfg.field_bits, cfg.field_max_k));
    const int m = cfg.m();
    const int self = cfg.peer_id;
    const auto trust = TrustStore::load(cfg.trust_file);

    fs::create_directories(cfg.output_dir);
    std::ofstream log(cfg.output_dir + "/pp" + std::to_string(self) + ".log", std::ios::app);
    log << "starting privacy peer " << self << " of " << m << ", field prime p=" << field.p()
        << " (l=" << field.l() << ", k=" << field.k() << "), protocol=" << to_string(cfg.protocol)
        << '\n';
    log.flush();

    TlsEndpoint ep(cfg.key_file, cfg.cert_file);
    const auto [host, port] = parse_endpoint(cfg.listen.empty() ? cfg.privacy_peers[static_cast<std::size_t>(self)] : cfg.listen);
    (void)host;
    ep.listen(port);

    TlsMesh mesh(self, m);
    TlsInputLinks inputs(cfg.num_input_peers);

    // Dial an outbound link to every other privacy peer in the background.
    std::exception_ptr dial_error;
    std::thread dialer([&] {
        try {
            for (int j = 0; j < m; ++j) {
                if (j == self) continue;
                const auto [h, p] = parse_endpoint(cfg.privacy_peers[static_cast<std::size_t>(j)]);
                TlsConn c = ep.connect(h, p, cfg.connect_timeout_seconds);
                c.set_recv_timeout(cfg.connect_timeout_seconds);
                c.write_frame(make_hello(cfg, field, Role::Privacy, self));
                const auto info = check_hello(c.read_frame(), cfg, field);
                if (info.role != Role::Privacy || info.id != j)
                    throw ConnectionError("AuthFailure: dialed peer claims a different identity");
                if (c.peer_fingerprint() != trust.expect(Role::Privacy, j))
                    throw ConnectionError("AuthFailure: fingerprint mismatch for privacy peer " +
                                          std::to_string(j));
                auto link = std::make_unique<OutLink>();
                link->conn = std::move(c);
                link->start();
                mesh.out_[static_cast<std::size_t>(j)] = std::move(link);
            }
        } catch (...) {
            dial_error = std::current_exception();
        }
    });

    // Accept inbound links until the start gate is satisfied: every other
    // privacy peer plus at least min_input_peers input peers.
    int have_pp = 0, have_inputs = 0;
    std::vector<bool> seen_pp(static_cast<std::size_t>(m), false), seen_in(static_cast<std::size_t>(cfg.num_input_peers), false);
    try {
        while (have_pp < m - 1 || have_inputs < std::max(cfg.min_input_peers, cfg.num_input_peers)) {
            TlsConn c = ep.accept(cfg.connect_timeout_seconds);
            Frame hello = c.read_frame();
            const auto info = check_hello(hello, cfg, field);
            c.write_frame(make_hello(cfg, field, Role::Privacy, self));
            if (c.peer_fingerprint() != trust.expect(info.role, info.id))
                throw ConnectionError("AuthFailure: fingerprint mismatch for inbound peer");
            if (info.role == Role::Privacy) {
                if (info.id < 0 || info.id >= m || info.id == self || seen_pp[static_cast<std::size_t>(info.id)])
                    throw ConnectionError("AuthFailure: bad privacy peer id in HELLO");
                seen_pp[static_cast<std::size_t>(info.id)] = true;
                c.set_recv_timeout(std::max(60, cfg.window_seconds * 4));
                mesh.in_[static_cast<std::size_t>(info.id)] = std::move(c);
                ++have_pp;
            } else {
                if (info.id < 0 || info.id >= cfg.num_input_peers || seen_in[static_cast<std::size_t>(info.id)])
                    throw ConnectionError("AuthFailure: bad input peer id in HELLO");
                seen_in[static_cast<std::size_t>(info.id)] = true;
                c.set_recv_timeout(std::max(60, cfg.window_seconds * 4));
                inputs.conns_[static_cast<std::size_t>(info.id)] = std::move(c);
                ++have_inputs;
            }
        }
    } catch (...) {
        log << "start gate failed: waiting for peers timed out or handshake failed\n";
        log.flush();
        dialer.join();
        throw;
    }
    dialer.join();
    if (dial_error) std::rethrow_exception(dial_error);
    log << "mesh established: " << (m - 1) << " privacy links, " << have_inputs << " input peers\n";
    log.flush();

    SecureRng rng;
    Engine eng(ShamirScheme(field, m), mesh, rng);
    const int windows = pp_window_loop(eng, cfg, inputs, log, cfg.output_dir);
    log << "done after " << windows << " windows\n";
    return EXIT_OK;
}

// ---- networked input peer ----

namespace {

class TlsPpLinks final : public PrivacyPeerLinks {
public:
    explicit TlsPpLinks(int m) : conns_(static_cast<std::size_t>(m)) {}
    int count() const override { return static_cast<int>(conns_.size()); }
    void send_to(int pp, Frame f) override { conns_[static_cast<std::size_t>(pp)].write_frame(f); }
    Frame recv_from(int pp) override { return conns_[static_cast<std::size_t>(pp)].read_frame(); }
    std::vector<TlsConn> conns_;
};

}  // namespace

int run_input_peer(const PeerConfig& cfg, bool realtime) {
    cfg.validate();
    const Field field(find_prime(cfg.field_bits, cfg.field_max_k));
    const auto trust = TrustStore::load(cfg.trust_file);
    const int m = cfg.m();

    // Parse all windows up front so malformed input fails fast.
    std::vector<WindowInput> windows;
    for (std::uint64_t id : list_window_ids(cfg.input_dir))
        windows.push_back(parse_window_file(cfg.input_dir + "/window_" + std::to_string(id) + ".csv",
                                            id, cfg, field));

    TlsEndpoint ep(cfg.key_file, cfg.cert_file);
    TlsPpLinks pps(m);
    for (int j = 0; j < m; ++j) {
        const auto [h, p] = parse_endpoint(cfg.privacy_peers[static_cast<std::size_t>(j)]);
        TlsConn c = ep.connect(h, p, cfg.connect_timeout_seconds);
        c.set_recv_timeout(cfg.connect_timeout_seconds);
        c.write_frame(make_hello(cfg, field, Role::Input, cfg.peer_id));
        const auto info = check_hello(c.read_frame(), cfg, field);
        if (info.role != Role::Privacy || info.id != j)
            throw ConnectionError("AuthFailure: privacy peer claims a different identity");
        if (c.peer_fingerprint() != trust.expect(Role::Privacy, j))
            throw ConnectionError("AuthFailure: fingerprint mismatch for privacy peer " + std::to_string(j));
        c.set_recv_timeout(std::max(60, cfg.window_seconds * 4));
        pps.conns_[static_cast<std::size_t>(j)] = std::move(c);
    }

    fs::create_directories(cfg.output_dir);
    SecureRng rng;
    input_window_loop(cfg, field, rng, pps, windows, cfg.output_dir, realtime);
    return EXIT_OK;
}

// ---- single-process simulator ----

namespace {

class SimInputLinks final : public InputPeerLinks {
public:
    SimInputLinks(SimNetwork& net, int pp) : net_(net), pp_(pp) {}
    int count() const override { return net_.n(); }
    Frame recv_from(int input) override { return net_.pp_recv_input(pp_, input); }
    void send_to(int input, Frame f) override { net_.pp_to_input(pp_, input, std::move(f)); }

private:
    SimNetwork& net_;
    int pp_;
};

class SimPpLinks final : public PrivacyPeerLinks {
public:
    SimPpLinks(SimNetwork& net, int input) : net_(net), input_(input) {}
    int count() const override { return net_.m(); }
    void send_to(int pp, Frame f) override { net_.input_to_pp(input_, pp, std::move(f)); }
    Frame recv_from(int pp) override { return net_.input_recv_pp(input_, pp); }

private:
    SimNetwork& net_;
    int input_;
};

}  // namespace

int run_local_sim(const PeerConfig& cfg, const SimOptions& opt) {
    PeerConfig sim_cfg = cfg;
    sim_cfg.num_input_peers = opt.n;
    sim_cfg.privacy_peers.assign(static_cast<std::size_t>(opt.m), "sim:0");
    sim_cfg.min_input_peers = opt.n;
    sim_cfg.min_privacy_peers = opt.m;
    sim_cfg.validate();

    const Field field(find_prime(sim_cfg.field_bits, sim_cfg.field_max_k));
    fs::create_directories(sim_cfg.output_dir);

    // Every input peer reads its own window set from input_dir/peer<i>/.
    std::vector<std::vector<WindowInput>> inputs(static_cast<std::size_t>(opt.n));
    for (int i = 0; i < opt.n; ++i) {
        const std::string dir = sim_cfg.input_dir + "/peer" + std::to_string(i);
        for (std::uint64_t id : list_window_ids(dir)) {
            PeerConfig icfg = sim_cfg;
            icfg.role = Role::Input;
            icfg.peer_id = i;
            inputs[static_cast<std::size_t>(i)].push_back(
                parse_window_file(dir + "/window_" + std::to_string(id) + ".csv", id, icfg, field));
        }
    }
    for (int i = 1; i < opt.n; ++i)
        if (inputs[static_cast<std::size_t>(i)].size() != inputs[0].size())
            throw ValidationError("simulator: input peers have different window sets");

    SimNetwork net(opt.m, opt.n, opt.seed, opt.latency);
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(opt.m + opt.n));

    for (int pp = 0; pp < opt.m; ++pp) {
        threads.emplace_back([&, pp] {
            try {
                auto mesh = net.privacy_mesh(pp);
                SeededRng rng(mix_seed(opt.seed, static_cast<std::uint64_t>(pp)));
                Engine eng(ShamirScheme(field, opt.m), *mesh, rng);
                SimInputLinks links(net, pp);
                std::ofstream log(sim_cfg.output_dir + "/pp" + std::to_string(pp) + ".log",
                                  std::ios::app);
                log << "simulator privacy peer " << pp << ", p=" << field.p() << " (l=" << field.l()
                    << ", k=" << field.k() << ")\n";
                // Only peer 0 writes result files; all outcomes agree.
                pp_window_loop(eng, sim_cfg, links, log, pp == 0 ? sim_cfg.output_dir : std::string());
            } catch (...) {
                errors[static_cast<std::size_t>(pp)] = std::current_exception();
            }
        });
    }
    for (int i = 0; i < opt.n; ++i) {
        threads.emplace_back([&, i] {
            try {
                PeerConfig icfg = sim_cfg;
                icfg.role = Role::Input;
                icfg.peer_id = i;
                SeededRng rng(mix_seed(opt.seed, 0x1000 + static_cast<std::uint64_t>(i)));
                SimPpLinks links(net, i);
                input_window_loop(icfg, field, rng, links, inputs[static_cast<std::size_t>(i)],
                                  std::string());
            } catch (...) {
                errors[static_cast<std::size_t>(opt.m + i)] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return EXIT_OK;
}

}  // namespace smpa
