#include "smpa/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

namespace smpa {

Protocol protocol_from_string(const std::string& s) {
    if (s == "addition") return Protocol::Addition;
    if (s == "entropy") return Protocol::Entropy;
    if (s == "distinctcount") return Protocol::DistinctCount;
    if (s == "eventcorrelation") return Protocol::EventCorrelation;
    throw ValidationError("unknown protocol: " + s);
}

std::string to_string(Protocol p) {
    switch (p) {
        case Protocol::Addition: return "addition";
        case Protocol::Entropy: return "entropy";
        case Protocol::DistinctCount: return "distinctcount";
        case Protocol::EventCorrelation: return "eventcorrelation";
    }
    return "?";
}

namespace {

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ParseError("config: bad boolean for " + key + ": " + v);
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        while (!item.empty() && item.front() == ' ') item.erase(item.begin());
        while (!item.empty() && item.back() == ' ') item.pop_back();
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

PeerConfig parse_config_text(const std::string& text, const std::string& origin) {
    PeerConfig c;
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string trimmed = line;
        trimmed.erase(0, trimmed.find_first_not_of(" \t"));
        if (trimmed.empty() || trimmed[0] == '#') continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw ParseError(origin + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = trimmed.substr(0, eq);
        std::string val = trimmed.substr(eq + 1);
        auto strip = [](std::string& s) {
            s.erase(0, s.find_first_not_of(" \t"));
            s.erase(s.find_last_not_of(" \t") + 1);
        };
        strip(key);
        strip(val);
        kv[key] = val;
    }

    auto get = [&](const char* key) -> const std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    auto geti = [&](const char* key, auto& out) {
        if (const auto* v = get(key)) out = static_cast<std::remove_reference_t<decltype(out)>>(std::stoll(*v));
    };

    if (const auto* v = get("role")) {
        if (*v == "input") c.role = Role::Input;
        else if (*v == "privacy") c.role = Role::Privacy;
        else throw ParseError("config: bad role: " + *v);
    }
    if (const auto* v = get("protocol")) c.protocol = protocol_from_string(*v);
    geti("peer_id", c.peer_id);
    if (const auto* v = get("listen")) c.listen = *v;
    if (const auto* v = get("privacy_peers")) c.privacy_peers = split_csv(*v);
    geti("num_input_peers", c.num_input_peers);
    geti("min_input_peers", c.min_input_peers);
    geti("min_privacy_peers", c.min_privacy_peers);
    geti("window_seconds", c.window_seconds);
    geti("connect_timeout_seconds", c.connect_timeout_seconds);
    if (const auto* v = get("input_dir")) c.input_dir = *v;
    if (const auto* v = get("output_dir")) c.output_dir = *v;
    if (const auto* v = get("key_file")) c.key_file = *v;
    if (const auto* v = get("cert_file")) c.cert_file = *v;
    if (const auto* v = get("trust_file")) c.trust_file = *v;
    geti("field_bits", c.field_bits);
    geti("field_max_k", c.field_max_k);
    geti("vector_length", c.vector_length);
    geti("entropy_q", c.entropy_q);
    geti("max_count", c.max_count);
    geti("events_per_peer", c.events_per_peer);
    geti("count_threshold", c.count_threshold);
    geti("weight_threshold", c.weight_threshold);
    geti("max_weight", c.max_weight);
    if (const auto* v = get("verify_weights")) c.verify_weights = parse_bool(*v, "verify_weights");
    if (const auto* v = get("verify_keys")) c.verify_keys = parse_bool(*v, "verify_keys");

    if (c.min_input_peers == 0) c.min_input_peers = c.num_input_peers;
    if (c.min_privacy_peers == 0) c.min_privacy_peers = c.m();
    return c;
}

PeerConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

void PeerConfig::validate() const {
    if (m() < 3) throw ValidationError("config: need at least 3 privacy peers");
    if (num_input_peers < 1) throw ValidationError("config: num_input_peers must be >= 1");
    if (peer_id < 0) throw ValidationError("config: bad peer_id");
    if (role == Role::Privacy && peer_id >= m()) throw ValidationError("config: privacy peer_id out of range");
    if (role == Role::Input && peer_id >= num_input_peers)
        throw ValidationError("config: input peer_id out of range");
    if (field_bits < 2 || field_bits > 62) throw ValidationError("config: field_bits out of range");
    if (field_max_k < 1) throw ValidationError("config: field_max_k out of range");
    if (vector_length == 0 &&
        (protocol == Protocol::Addition || protocol == Protocol::Entropy || protocol == Protocol::DistinctCount))
        throw ValidationError("config: vector_length required");
    if (protocol == Protocol::Entropy && entropy_q < 2)
        throw ValidationError("config: entropy_q must be >= 2");
    if (protocol == Protocol::EventCorrelation && events_per_peer < 1)
        throw ValidationError("config: events_per_peer must be >= 1");
}

std::array<std::uint64_t, 4> PeerConfig::shared_hash() const {
    // Canonical serialization of the fields every peer must agree on.
    std::ostringstream s;
    s << "count_threshold=" << count_threshold << '\n'
      << "entropy_q=" << entropy_q << '\n'
      << "events_per_peer=" << events_per_peer << '\n'
      << "field_bits=" << field_bits << '\n'
      << "field_max_k=" << field_max_k << '\n'
      << "max_count=" << max_count << '\n'
      << "max_weight=" << max_weight << '\n'
      << "num_input_peers=" << num_input_peers << '\n'
      << "num_privacy_peers=" << m() << '\n'
      << "protocol=" << to_string(protocol) << '\n'
      << "vector_length=" << vector_length << '\n'
      << "verify_keys=" << (verify_keys ? 1 : 0) << '\n'
      << "verify_weights=" << (verify_weights ? 1 : 0) << '\n'
      << "weight_threshold=" << weight_threshold << '\n'
      << "window_seconds=" << window_seconds << '\n';
    const std::string text = s.str();

    unsigned char md[32] = {0};
    unsigned int n = 0;
    EVP_Digest(text.data(), text.size(), md, &n, EVP_sha256(), nullptr);
    std::array<std::uint64_t, 4> out{};
    for (int w = 0; w < 4; ++w)
        for (int b = 0; b < 8; ++b) out[static_cast<std::size_t>(w)] = (out[static_cast<std::size_t>(w)] << 8) | md[w * 8 + b];
    return out;
}

TrustStore TrustStore::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open trust file: " + path);
    TrustStore ts;
    std::string role_s, fp;
    int id = 0;
    int lineno = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        if (!(ls >> role_s >> id >> fp))
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected '<role> <id> <fingerprint>'");
        int role;
        if (role_s == "input") role = 0;
        else if (role_s == "privacy") role = 1;
        else throw ParseError(path + ":" + std::to_string(lineno) + ": bad role " + role_s);
        std::transform(fp.begin(), fp.end(), fp.begin(), [](unsigned char ch) { return std::tolower(ch); });
        ts.fp[{role, id}] = fp;
    }
    return ts;
}

const std::string& TrustStore::expect(Role role, int id) const {
    auto it = fp.find({role == Role::Input ? 0 : 1, id});
    if (it == fp.end())
        throw ConnectionError("AuthFailure: no trusted fingerprint for peer " + std::to_string(id));
    return it->second;
}

}  // namespace smpa
