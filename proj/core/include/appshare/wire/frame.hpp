#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace appshare::wire {

//
// Stream frame format
//
// +----+----+----+----+----+----+-----...-----+
// |   body length N (BE)  | ch | op |  body   |
// +----+----+----+----+----+----+-----...-----+
//
// Bytes 0..3   - body length, big-endian, must be < 2^24
// Byte 4       - channel id (0 global, 1 control, 2+ seamless)
// Byte 5       - opcode
// Bytes 6..N+5 - body
//

enum class Opcode : std::uint8_t {
    Hello = 0x01,
    Welcome = 0x02,
    Spawn = 0x03,
    SpawnAck = 0x04,
    Focus = 0x05,
    Input = 0x06,
    Update = 0x07,
    Bye = 0x08,
    Error = 0x09,
};

std::string_view to_string(Opcode op) noexcept;

inline constexpr std::uint8_t kGlobalChannel = 0;
inline constexpr std::uint8_t kControlChannel = 1;
inline constexpr std::uint8_t kFirstSeamlessChannel = 2;

inline constexpr std::size_t kFrameHeaderSize = 6;
inline constexpr std::size_t kMaxFrameBody = (std::size_t{1} << 24) - 1;

struct StreamFrame
{
    std::uint8_t channel = kGlobalChannel;
    Opcode opcode = Opcode::Hello;
    std::string body;

    bool operator==(const StreamFrame&) const = default;
};

/// Throws Error{OversizeFrame} when the body is 2^24 bytes or longer.
std::string encode_frame(const StreamFrame& f);

struct DecodedFrame
{
    StreamFrame frame;
    std::size_t consumed = 0;
};

/// Decodes the frame at the start of `bytes`. Returns nullopt when more bytes
/// are needed. Throws Error{OversizeFrame} for a declared length >= 2^24 and
/// Error{ProtocolViolation} for an unknown opcode; either leaves the stream
/// unusable (there is no resynchronization).
std::optional<DecodedFrame> decode_frame(std::string_view bytes);

/// Incremental decoder owned by one connection.
class FrameDecoder
{
public:
    void feed(std::string_view bytes);

    /// Next complete frame, or nullopt if more bytes are needed.
    std::optional<StreamFrame> next();

    std::size_t buffered() const noexcept { return buffer_.size() - read_pos_; }
    bool failed() const noexcept { return failed_; }

private:
    std::string buffer_;
    std::size_t read_pos_ = 0;
    bool failed_ = false;
};

} // namespace appshare::wire
