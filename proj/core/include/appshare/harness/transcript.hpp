#pragma once

#include "appshare/types.hpp"
#include "appshare/wire/frame.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace appshare::harness {

/// Ordered record of what crossed the upstream link, interleaved with the
/// scheduler's allocations and the client-side facts needed to judge them.
///
/// Text form, one entry per line:
///   alloc <slice> <session> <focused win or ->
///   focus <session> <win>            client-side focus changed
///   queue <session> <payload hex>    client submitted an input
///   up <upstream> <opcode> <channel> <body hex>
struct TranscriptEntry
{
    enum class Kind { Allocation, Focus, Queue, Upstream };

    Kind kind = Kind::Upstream;
    std::uint64_t slice = 0;
    std::uint32_t id = 0; ///< session, or upstream for Upstream entries
    std::optional<WindowId> window;
    std::string payload;
    wire::StreamFrame frame;
};

class Transcript
{
public:
    void allocation(std::uint64_t slice, SessionId session, std::optional<WindowId> focus);
    void focus(SessionId session, WindowId win);
    void queued(SessionId session, std::string_view payload);
    void upstream(std::uint32_t upstream, const wire::StreamFrame& frame);

    const std::vector<TranscriptEntry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    std::string to_text() const;
    static Transcript parse(std::string_view text);

private:
    std::vector<TranscriptEntry> entries_;
};

struct ValidationResult
{
    bool ok = true;
    std::size_t bursts = 0;
    std::size_t inputs = 0;
    std::string error;
};

/// Checks slice discipline: each allocation burst opens with a Focus for the
/// allocated session's focused window (when it has one), every Focus in the
/// burst names that window, and every Input is the allocated session's next
/// queued input. Spawn frames may appear anywhere.
ValidationResult validate_transcript(const Transcript& t);

} // namespace appshare::harness
