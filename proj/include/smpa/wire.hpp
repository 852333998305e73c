#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smpa/errors.hpp"

namespace smpa {

// Wire protocol: every message is one frame.
//
//   magic   "SMPA"            4 bytes
//   version u8 = 1
//   type    u8
//   window  u64 big-endian
//   round   u32 big-endian
//   count   u32 big-endian
//   entries count x (slot u32, value u64), big-endian, slots ascending
//
// Total length = 22 + 12*count bytes. Share-carrying frames keep every
// value below the field prime; HELLO and RESULT entries carry protocol
// metadata and are exempt from that bound.
enum class MsgType : std::uint8_t {
    Hello = 1,
    InputShares = 2,
    RoundBatch = 3,
    Result = 4,
    Disqualify = 5,
    Bye = 6,
};

inline constexpr char kWireMagic[4] = {'S', 'M', 'P', 'A'};
inline constexpr std::uint8_t kWireVersion = 1;
inline constexpr std::size_t kFrameHeaderSize = 22;

struct WireEntry {
    std::uint32_t slot = 0;
    std::uint64_t value = 0;
    bool operator==(const WireEntry&) const = default;
};

struct Frame {
    MsgType type = MsgType::RoundBatch;
    std::uint64_t window = 0;
    std::uint32_t round = 0;
    std::vector<WireEntry> entries;

    bool operator==(const Frame&) const = default;
    std::size_t encoded_size() const { return kFrameHeaderSize + 12 * entries.size(); }
};

// Serialize; throws ParseError if entries are not sorted ascending by slot.
std::vector<std::uint8_t> encode_frame(const Frame& f);

// Header decode helpers for streaming reads: parse the fixed 22-byte
// header, then the body once 12*count more bytes are available.
struct FrameHeader {
    MsgType type;
    std::uint64_t window;
    std::uint32_t round;
    std::uint32_t count;
};
FrameHeader decode_header(const std::uint8_t* buf);
Frame decode_frame(const std::uint8_t* buf, std::size_t len);

std::string hex_dump(const std::vector<std::uint8_t>& bytes);

}  // namespace smpa
