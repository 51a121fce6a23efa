#include "appshare/termhost/server.hpp"

#include "appshare/error.hpp"
#include "appshare/wire/messages.hpp"

#include <future>

namespace appshare::termhost {

HostServer::HostServer(HostServerOptions options)
    : options_(std::move(options))
    , host_(options_.mode, options_.host)
{
    auto listener = net::tcp_listen(options_.listen);
    port_ = net::local_port(listener);
    reactor_.listen(std::move(listener), [this](net::Fd fd, std::string) { on_accept(std::move(fd)); });
    thread_ = std::thread([this] { reactor_.run(); });
}

HostServer::~HostServer()
{
    stop();
}

void HostServer::stop()
{
    if (stopped_)
        return;
    stopped_ = true;
    reactor_.stop();
    if (thread_.joinable())
        thread_.join();
}

void HostServer::on_accept(net::Fd fd)
{
    const auto session = host_.open_session();
    if (!session) {
        const auto rid = reactor_.add(std::move(fd), nullptr, nullptr);
        reactor_.send(rid, wire::encode_frame(wire::error_frame(wire::kControlChannel, Errc::SessionLimit,
                                                                "single login in use")));
        reactor_.close(rid);
        return;
    }

    const auto rid = reactor_.add(
        std::move(fd),
        [this](net::Reactor::ConnId cid, std::string_view bytes) {
            auto it = session_of_.find(cid);
            if (it == session_of_.end())
                return;
            auto& decoder = decoders_[cid];
            decoder.feed(bytes);
            try {
                while (auto frame = decoder.next()) {
                    if (frame->opcode == wire::Opcode::Bye) {
                        reactor_.close(cid);
                        return;
                    }
                    if (frame->opcode == wire::Opcode::Spawn) {
                        if (auto cmd = wire::parse_spawn(frame->body))
                            spawned_.push_back(*cmd);
                    }
                    for (const auto& reply : host_.handle(it->second, *frame))
                        reactor_.send(cid, wire::encode_frame(reply));
                }
            } catch (const Error&) {
                reactor_.close(cid);
            }
        },
        [this](net::Reactor::ConnId cid) {
            decoders_.erase(cid);
            if (auto it = session_of_.find(cid); it != session_of_.end()) {
                host_.close_session(it->second);
                session_of_.erase(it);
            }
        });
    session_of_[rid] = *session;
}

template <typename F>
auto HostServer::on_loop(F&& fn) -> decltype(fn())
{
    using R = decltype(fn());
    if (stopped_)
        return fn();
    auto promise = std::make_shared<std::promise<R>>();
    auto future = promise->get_future();
    reactor_.post([promise, fn = std::forward<F>(fn)]() mutable { promise->set_value(fn()); });
    return future.get();
}

HostMetrics HostServer::metrics()
{
    return on_loop([this] { return host_.metrics(); });
}

std::vector<std::string> HostServer::spawned_commands()
{
    return on_loop([this] { return spawned_; });
}

} // namespace appshare::termhost
