#include "appshare/wire/frame.hpp"

#include "appshare/error.hpp"

namespace appshare::wire {

std::string_view to_string(Opcode op) noexcept
{
    switch (op) {
    case Opcode::Hello: return "Hello";
    case Opcode::Welcome: return "Welcome";
    case Opcode::Spawn: return "Spawn";
    case Opcode::SpawnAck: return "SpawnAck";
    case Opcode::Focus: return "Focus";
    case Opcode::Input: return "Input";
    case Opcode::Update: return "Update";
    case Opcode::Bye: return "Bye";
    case Opcode::Error: return "Error";
    }
    return "Unknown";
}

std::string encode_frame(const StreamFrame& f)
{
    const std::size_t n = f.body.size();
    if (n > kMaxFrameBody)
        throw Error(Errc::OversizeFrame, "body of " + std::to_string(n) + " bytes");

    std::string out;
    out.reserve(kFrameHeaderSize + n);
    out.push_back(static_cast<char>((n >> 24) & 0xFF));
    out.push_back(static_cast<char>((n >> 16) & 0xFF));
    out.push_back(static_cast<char>((n >> 8) & 0xFF));
    out.push_back(static_cast<char>(n & 0xFF));
    out.push_back(static_cast<char>(f.channel));
    out.push_back(static_cast<char>(f.opcode));
    out += f.body;
    return out;
}

std::optional<DecodedFrame> decode_frame(std::string_view bytes)
{
    if (bytes.size() < 4)
        return std::nullopt;

    std::size_t n = 0;
    for (int i = 0; i < 4; ++i)
        n = (n << 8) | static_cast<unsigned char>(bytes[i]);
    if (n > kMaxFrameBody)
        throw Error(Errc::OversizeFrame, "declared length " + std::to_string(n));

    if (bytes.size() < kFrameHeaderSize + n)
        return std::nullopt;

    const auto op = static_cast<unsigned char>(bytes[5]);
    if (op < static_cast<unsigned char>(Opcode::Hello) || op > static_cast<unsigned char>(Opcode::Error))
        throw Error(Errc::ProtocolViolation, "unknown opcode " + std::to_string(op));

    DecodedFrame out;
    out.frame.channel = static_cast<std::uint8_t>(bytes[4]);
    out.frame.opcode = static_cast<Opcode>(op);
    out.frame.body.assign(bytes.substr(kFrameHeaderSize, n));
    out.consumed = kFrameHeaderSize + n;
    return out;
}

void FrameDecoder::feed(std::string_view bytes)
{
    if (read_pos_ > 0 && read_pos_ >= buffer_.size() / 2) {
        buffer_.erase(0, read_pos_);
        read_pos_ = 0;
    }
    buffer_.append(bytes);
}

std::optional<StreamFrame> FrameDecoder::next()
{
    if (failed_)
        throw Error(Errc::ProtocolViolation, "decoder failed earlier");
    try {
        auto decoded = decode_frame(std::string_view(buffer_).substr(read_pos_));
        if (!decoded)
            return std::nullopt;
        read_pos_ += decoded->consumed;
        return std::move(decoded->frame);
    } catch (...) {
        failed_ = true;
        throw;
    }
}

} // namespace appshare::wire
