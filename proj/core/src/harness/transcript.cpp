#include "appshare/harness/transcript.hpp"

#include "appshare/error.hpp"
#include "appshare/wire/messages.hpp"
#include "appshare/wire/text.hpp"

#include <deque>
#include <map>
#include <sstream>

namespace appshare::harness {

namespace {

std::string from_hex(std::string_view hex)
{
    if (hex.size() % 2 != 0)
        throw Error(Errc::ParseError, "odd hex length");
    std::string out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        const auto v = std::stoul(std::string(hex.substr(i, 2)), nullptr, 16);
        out.push_back(static_cast<char>(v));
    }
    return out;
}

std::uint64_t number(std::string_view s)
{
    const auto v = wire::parse_uint(s);
    if (!v)
        throw Error(Errc::ParseError, "bad number '" + std::string(s) + "'");
    return *v;
}

} // namespace

void Transcript::allocation(std::uint64_t slice, SessionId session, std::optional<WindowId> focus)
{
    TranscriptEntry e;
    e.kind = TranscriptEntry::Kind::Allocation;
    e.slice = slice;
    e.id = session;
    e.window = focus;
    entries_.push_back(std::move(e));
}

void Transcript::focus(SessionId session, WindowId win)
{
    TranscriptEntry e;
    e.kind = TranscriptEntry::Kind::Focus;
    e.id = session;
    e.window = win;
    entries_.push_back(std::move(e));
}

void Transcript::queued(SessionId session, std::string_view payload)
{
    TranscriptEntry e;
    e.kind = TranscriptEntry::Kind::Queue;
    e.id = session;
    e.payload = payload;
    entries_.push_back(std::move(e));
}

void Transcript::upstream(std::uint32_t upstream, const wire::StreamFrame& frame)
{
    TranscriptEntry e;
    e.kind = TranscriptEntry::Kind::Upstream;
    e.id = upstream;
    e.frame = frame;
    entries_.push_back(std::move(e));
}

std::string Transcript::to_text() const
{
    std::ostringstream out;
    for (const auto& e : entries_) {
        switch (e.kind) {
        case TranscriptEntry::Kind::Allocation:
            out << "alloc " << e.slice << ' ' << e.id << ' ' << (e.window ? std::to_string(*e.window) : "-");
            break;
        case TranscriptEntry::Kind::Focus:
            out << "focus " << e.id << ' ' << *e.window;
            break;
        case TranscriptEntry::Kind::Queue:
            out << "queue " << e.id << ' ' << wire::to_hex(e.payload);
            break;
        case TranscriptEntry::Kind::Upstream:
            out << "up " << e.id << ' ' << static_cast<int>(e.frame.opcode) << ' ' << static_cast<int>(e.frame.channel)
                << ' ' << wire::to_hex(e.frame.body);
            break;
        }
        out << '\n';
    }
    return out.str();
}

Transcript Transcript::parse(std::string_view text)
{
    Transcript t;
    std::size_t lineno = 0;
    for (auto line : wire::split(text, "\n")) {
        ++lineno;
        if (line.empty())
            continue;
        // Empty hex bodies leave a trailing blank field.
        auto f = wire::split(line, " ");
        try {
            if (f[0] == "alloc" && f.size() == 4) {
                std::optional<WindowId> w;
                if (f[3] != "-")
                    w = static_cast<WindowId>(number(f[3]));
                t.allocation(number(f[1]), static_cast<SessionId>(number(f[2])), w);
            } else if (f[0] == "focus" && f.size() == 3) {
                t.focus(static_cast<SessionId>(number(f[1])), static_cast<WindowId>(number(f[2])));
            } else if (f[0] == "queue" && f.size() == 3) {
                t.queued(static_cast<SessionId>(number(f[1])), from_hex(f[2]));
            } else if (f[0] == "up" && f.size() == 5) {
                wire::StreamFrame fr;
                fr.opcode = static_cast<wire::Opcode>(number(f[2]));
                fr.channel = static_cast<std::uint8_t>(number(f[3]));
                fr.body = from_hex(f[4]);
                t.upstream(static_cast<std::uint32_t>(number(f[1])), fr);
            } else {
                throw Error(Errc::ParseError, "unrecognized entry");
            }
        } catch (const Error& e) {
            throw Error(Errc::ParseError, "transcript line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return t;
}

ValidationResult validate_transcript(const Transcript& t)
{
    ValidationResult r;
    std::map<SessionId, std::optional<WindowId>> focus;
    std::map<SessionId, std::deque<std::string>> queues;
    std::optional<SessionId> allocated;
    bool expect_focus = false;

    auto fail = [&](std::size_t i, std::string msg) {
        r.ok = false;
        r.error = "entry " + std::to_string(i) + ": " + msg;
        return r;
    };

    const auto& es = t.entries();
    for (std::size_t i = 0; i < es.size(); ++i) {
        const auto& e = es[i];
        switch (e.kind) {
        case TranscriptEntry::Kind::Allocation:
            ++r.bursts;
            allocated = e.id;
            if (e.window != focus[e.id])
                return fail(i, "allocation records focus that differs from the client's");
            expect_focus = e.window.has_value();
            break;

        case TranscriptEntry::Kind::Focus:
            focus[e.id] = e.window;
            break;

        case TranscriptEntry::Kind::Queue:
            queues[e.id].push_back(e.payload);
            break;

        case TranscriptEntry::Kind::Upstream:
            switch (e.frame.opcode) {
            case wire::Opcode::Spawn:
                break;
            case wire::Opcode::Focus: {
                if (!allocated)
                    return fail(i, "Focus before any allocation");
                const auto req = wire::parse_focus(e.frame.body);
                if (!req)
                    return fail(i, "malformed Focus");
                if (focus[*allocated] != req->win_id)
                    return fail(i, "Focus for window " + std::to_string(req->win_id) + " while session "
                                       + std::to_string(*allocated) + " is allocated");
                expect_focus = false;
                break;
            }
            case wire::Opcode::Input: {
                if (!allocated)
                    return fail(i, "Input before any allocation");
                if (expect_focus)
                    return fail(i, "burst for session " + std::to_string(*allocated) + " does not open with Focus");
                const auto in = wire::parse_input(e.frame.body);
                if (!in)
                    return fail(i, "malformed Input");
                auto& q = queues[*allocated];
                if (q.empty() || q.front() != in->payload)
                    return fail(i, "Input out of FIFO order for session " + std::to_string(*allocated));
                q.pop_front();
                ++r.inputs;
                break;
            }
            default:
                return fail(i, "unexpected upstream " + std::string(wire::to_string(e.frame.opcode)));
            }
            break;
        }
    }
    return r;
}

} // namespace appshare::harness
