#include "appshare/client/slave.hpp"

#include "appshare/error.hpp"
#include "appshare/wire/text.hpp"

namespace appshare::client {

SlaveReply send_master_line(const net::Endpoint& master, std::string_view line, Duration timeout)
{
    auto fd = net::tcp_connect(master, std::min<Duration>(timeout, 2s));
    if (!fd)
        throw Error(Errc::NoMaster, master.to_string());

    std::string out(line);
    out += '\n';
    if (!net::write_all(fd, out, timeout))
        throw Error(Errc::Timeout, "writing to master");

    std::string buf;
    const auto deadline = Clock::now() + timeout;
    while (Clock::now() < deadline) {
        auto chunk = net::read_some(fd, deadline - Clock::now());
        buf += chunk.bytes;
        if (const auto nl = buf.find('\n'); nl != std::string::npos) {
            SlaveReply reply;
            reply.line = buf.substr(0, nl);
            if (reply.line == "ok") {
                reply.ok = true;
            } else if (reply.line.rfind("ok,", 0) == 0) {
                reply.ok = true;
                if (auto id = wire::parse_uint(std::string_view(reply.line).substr(3)))
                    reply.win_id = static_cast<WindowId>(*id);
            }
            return reply;
        }
        if (chunk.closed)
            throw Error(Errc::Timeout, "master went away before answering");
    }
    throw Error(Errc::Timeout, "no answer from master");
}

SlaveReply run_slave(const net::Endpoint& master, std::string_view command, Duration timeout)
{
    if (wire::trim(command).empty())
        throw Error(Errc::EmptyCommand, "usage: client run <command>");
    return send_master_line(master, command, timeout);
}

} // namespace appshare::client
