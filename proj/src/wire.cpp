#include "smpa/wire.hpp"

#include <cstring>

namespace smpa {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    put_u32(out, static_cast<std::uint32_t>(v >> 32));
    put_u32(out, static_cast<std::uint32_t>(v));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) |
           std::uint32_t(p[3]);
}

std::uint64_t get_u64(const std::uint8_t* p) {
    return (std::uint64_t(get_u32(p)) << 32) | get_u32(p + 4);
}

}  // namespace

std::vector<std::uint8_t> encode_frame(const Frame& f) {
    for (std::size_t i = 1; i < f.entries.size(); ++i)
        if (f.entries[i].slot <= f.entries[i - 1].slot)
            throw ParseError("encode_frame: entries not strictly ascending by slot");

    std::vector<std::uint8_t> out;
    out.reserve(f.encoded_size());
    out.insert(out.end(), kWireMagic, kWireMagic + 4);
    out.push_back(kWireVersion);
    out.push_back(static_cast<std::uint8_t>(f.type));
    put_u64(out, f.window);
    put_u32(out, f.round);
    put_u32(out, static_cast<std::uint32_t>(f.entries.size()));
    for (const auto& e : f.entries) {
        put_u32(out, e.slot);
        put_u64(out, e.value);
    }
    return out;
}

FrameHeader decode_header(const std::uint8_t* buf) {
    if (std::memcmp(buf, kWireMagic, 4) != 0) throw ParseError("frame: bad magic");
    if (buf[4] != kWireVersion) throw ParseError("frame: VersionMismatch");
    const std::uint8_t t = buf[5];
    if (t < 1 || t > 6) throw ParseError("frame: unknown message type");
    FrameHeader h;
    h.type = static_cast<MsgType>(t);
    h.window = get_u64(buf + 6);
    h.round = get_u32(buf + 14);
    h.count = get_u32(buf + 18);
    return h;
}

Frame decode_frame(const std::uint8_t* buf, std::size_t len) {
    if (len < kFrameHeaderSize) throw ParseError("frame: truncated header");
    const FrameHeader h = decode_header(buf);
    if (len != kFrameHeaderSize + 12ULL * h.count) throw ParseError("frame: length mismatch");
    Frame f;
    f.type = h.type;
    f.window = h.window;
    f.round = h.round;
    f.entries.resize(h.count);
    const std::uint8_t* p = buf + kFrameHeaderSize;
    for (std::uint32_t i = 0; i < h.count; ++i, p += 12) {
        f.entries[i].slot = get_u32(p);
        f.entries[i].value = get_u64(p + 4);
        if (i > 0 && f.entries[i].slot <= f.entries[i - 1].slot)
            throw ParseError("frame: entries not ascending");
    }
    return f;
}

std::string hex_dump(const std::vector<std::uint8_t>& bytes) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xf]);
    }
    return s;
}

}  // namespace smpa
