#pragma once

#include "appshare/net/socket.hpp"
#include "appshare/types.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace appshare::client {

struct SlaveReply
{
    bool ok = false;
    std::optional<WindowId> win_id;
    /// The raw response line without the newline.
    std::string line;
};

/// Sends one line to a master socket and waits for its one-line answer.
/// Throws Error{NoMaster} when nothing listens, Error{Timeout} when no
/// answer arrives (including the master dying mid-wait).
SlaveReply send_master_line(const net::Endpoint& master, std::string_view line, Duration timeout = 10s);

/// Slave mode: hands `command` to the running master.
/// Throws Error{EmptyCommand} without connecting when the command is blank.
SlaveReply run_slave(const net::Endpoint& master, std::string_view command, Duration timeout = 10s);

} // namespace appshare::client
