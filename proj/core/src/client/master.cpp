#include "appshare/client/master.hpp"

#include "appshare/error.hpp"
#include "appshare/wire/text.hpp"

namespace appshare::client {

namespace {

struct Handshake
{
    net::Fd fd;
    wire::Welcome welcome;
    std::string leftover;
};

Handshake negotiate(const net::Endpoint& ep, Duration timeout)
{
    Handshake hs;
    hs.fd = net::tcp_connect(ep, timeout);
    if (!hs.fd)
        throw Error(Errc::BrokerUnreachable, ep.to_string());
    if (!net::write_all(hs.fd, wire::encode_frame(ClientProtocol::hello()), timeout))
        throw Error(Errc::BrokerUnreachable, ep.to_string() + ": write failed");

    wire::FrameDecoder decoder;
    const auto deadline = Clock::now() + timeout;
    while (Clock::now() < deadline) {
        auto chunk = net::read_some(hs.fd, deadline - Clock::now());
        if (chunk.closed)
            break;
        decoder.feed(chunk.bytes);
        std::optional<wire::StreamFrame> frame;
        try {
            frame = decoder.next();
        } catch (const Error& e) {
            throw Error(Errc::BrokerUnreachable, e.what());
        }
        if (!frame)
            continue;
        if (frame->opcode != wire::Opcode::Welcome)
            throw Error(Errc::BrokerUnreachable, ep.to_string() + " refused: " + frame->body);
        auto welcome = wire::parse_welcome(frame->body);
        if (!welcome)
            throw Error(Errc::BrokerUnreachable, "malformed Welcome");
        hs.welcome = *welcome;
        while (auto more = decoder.next())
            hs.leftover += wire::encode_frame(*more);
        return hs;
    }
    throw Error(Errc::BrokerUnreachable, ep.to_string() + ": no Welcome");
}

bool is_loopback(std::string_view peer)
{
    return peer.rfind("127.", 0) == 0;
}

} // namespace

template <typename F>
auto Master::on_loop(F&& fn) -> decltype(fn())
{
    using R = decltype(fn());
    if (stopped_)
        return fn();
    auto task = std::make_shared<std::packaged_task<R()>>(std::forward<F>(fn));
    auto result = task->get_future();
    reactor_.post([task] { (*task)(); });
    return result.get();
}

Master::Master(MasterOptions options)
    : options_(std::move(options))
{
    net::Fd listener;
    try {
        listener = net::tcp_listen(options_.master_socket);
    } catch (const Error&) {
        throw Error(Errc::MasterSocketInUse, options_.master_socket.to_string());
    }
    master_port_ = net::local_port(listener);

    auto hs = negotiate(options_.broker, options_.connect_timeout);
    session_id_ = hs.welcome.session_id;
    seamless_ = hs.welcome.seamless_channel;
    protocol_.on_frame({wire::kControlChannel, wire::Opcode::Welcome, wire::welcome_body(hs.welcome)});

    if (options_.log_path)
        log_.open(*options_.log_path, std::ios::trunc);

    broker_conn_ = reactor_.add(
        std::move(hs.fd),
        [this](net::Reactor::ConnId, std::string_view bytes) { on_broker_bytes(bytes); },
        [this](net::Reactor::ConnId) { on_broker_closed(); });
    decoder_.feed(hs.leftover);

    reactor_.listen(std::move(listener), [this](net::Fd fd, std::string peer) {
        if (!is_loopback(peer))
            return;
        reactor_.add(
            std::move(fd),
            [this](net::Reactor::ConnId cid, std::string_view bytes) {
                auto& buf = slave_buffers_[cid];
                buf.append(bytes);
                std::size_t nl;
                while ((nl = buf.find('\n')) != std::string::npos) {
                    auto line = buf.substr(0, nl);
                    buf.erase(0, nl + 1);
                    if (!line.empty() && line.back() == '\r')
                        line.pop_back();
                    on_slave_line(cid, line);
                }
            },
            [this](net::Reactor::ConnId cid) { slave_buffers_.erase(cid); });
    });

    thread_ = std::thread([this] { reactor_.run(); });
    // Frames that arrived with the Welcome.
    if (!hs.leftover.empty())
        reactor_.post([this] { on_broker_bytes({}); });
}

Master::~Master()
{
    stop();
}

void Master::stop()
{
    if (stopped_)
        return;
    stopped_ = true;
    reactor_.post([this] {
        if (reactor_.is_open(broker_conn_)) {
            send_frame(ClientProtocol::bye());
            reactor_.close(broker_conn_);
        }
    });
    // Let the Bye flush before the loop stops.
    const auto deadline = Clock::now() + 1s;
    {
        std::unique_lock lock(done_mutex_);
        done_cv_.wait_until(lock, deadline, [this] { return broker_gone_; });
    }
    reactor_.stop();
    if (thread_.joinable())
        thread_.join();
    for (auto& w : spawn_waiters_)
        if (auto* p = std::get_if<Promise>(&w))
            (*p)->set_exception(std::make_exception_ptr(Error(Errc::BrokerUnreachable, "master stopped")));
    spawn_waiters_.clear();
}

void Master::send_frame(const wire::StreamFrame& frame)
{
    reactor_.send(broker_conn_, wire::encode_frame(frame));
}

void Master::on_broker_bytes(std::string_view bytes)
{
    decoder_.feed(bytes);
    try {
        while (auto frame = decoder_.next()) {
            auto event = protocol_.on_frame(*frame);
            if (auto* ack = std::get_if<SpawnAcked>(&event)) {
                resolve_spawn(ack->win_id, {});
            } else if (std::get_if<Updated>(&event)) {
                if (log_.is_open())
                    log_ << frame->body << '\n' << std::flush;
            } else if (auto* f = std::get_if<Failed>(&event)) {
                const auto code = f->error.code();
                if (code == Errc::EmptyCommand || code == Errc::UpstreamUnreachable || code == Errc::ProtocolViolation)
                    resolve_spawn(std::nullopt, f->error.name);
            } else if (std::get_if<Closed>(&event)) {
                reactor_.close(broker_conn_);
            }
        }
    } catch (const Error&) {
        reactor_.close(broker_conn_);
    }
}

void Master::on_broker_closed()
{
    while (!spawn_waiters_.empty())
        resolve_spawn(std::nullopt, "BrokerUnreachable");
    std::lock_guard lock(done_mutex_);
    broker_gone_ = true;
    done_cv_.notify_all();
}

void Master::answer(net::Reactor::ConnId cid, const std::string& line)
{
    if (reactor_.is_open(cid))
        reactor_.send(cid, line + "\n");
}

void Master::on_slave_line(net::Reactor::ConnId cid, const std::string& line)
{
    const auto text = wire::trim(line);
    if (text.rfind("!focus", 0) == 0) {
        const auto win = wire::parse_uint(wire::trim(text.substr(6)));
        if (win && protocol_.windows().count(static_cast<WindowId>(*win)) != 0) {
            send_frame(protocol_.focus(static_cast<WindowId>(*win)));
            answer(cid, "ok," + std::to_string(*win));
        } else {
            answer(cid, "err,UnknownWindow");
        }
        return;
    }
    if (text.rfind("!input", 0) == 0) {
        auto payload = std::string(text.size() > 7 ? text.substr(7) : std::string_view{});
        if (!protocol_.focused()) {
            answer(cid, "err,NoFocusedWindow");
            return;
        }
        send_frame(protocol_.input(wire::InputKind::Key, payload));
        answer(cid, "ok");
        return;
    }
    if (text.empty()) {
        answer(cid, "err,EmptyCommand");
        return;
    }
    if (!reactor_.is_open(broker_conn_) || broker_gone_) {
        answer(cid, "err,BrokerUnreachable");
        return;
    }
    start_spawn(std::string(text), cid);
}

void Master::start_spawn(std::string command, Waiter waiter)
{
    spawn_waiters_.push_back(std::move(waiter));
    send_frame(protocol_.spawn(command));
}

void Master::resolve_spawn(std::optional<WindowId> win_id, const std::string& reason)
{
    if (spawn_waiters_.empty())
        return;
    auto waiter = std::move(spawn_waiters_.front());
    spawn_waiters_.pop_front();
    if (auto* cid = std::get_if<net::Reactor::ConnId>(&waiter)) {
        answer(*cid, win_id ? "ok," + std::to_string(*win_id) : "err," + reason);
        return;
    }
    auto& promise = std::get<Promise>(waiter);
    if (win_id)
        promise->set_value(*win_id);
    else
        promise->set_exception(std::make_exception_ptr(Error(Errc::BrokerUnreachable, reason)));
}

std::future<WindowId> Master::spawn(std::string command)
{
    auto promise = std::make_shared<std::promise<WindowId>>();
    auto future = promise->get_future();
    if (wire::trim(command).empty()) {
        promise->set_exception(std::make_exception_ptr(Error(Errc::EmptyCommand)));
        return future;
    }
    if (stopped_) {
        promise->set_exception(std::make_exception_ptr(Error(Errc::BrokerUnreachable, "master stopped")));
        return future;
    }
    reactor_.post([this, promise, command = std::move(command)]() mutable {
        if (!reactor_.is_open(broker_conn_) || broker_gone_) {
            promise->set_exception(std::make_exception_ptr(Error(Errc::BrokerUnreachable)));
            return;
        }
        start_spawn(std::move(command), promise);
    });
    return future;
}

bool Master::focus(WindowId win_id, std::string flags)
{
    return on_loop([this, win_id, flags = std::move(flags)] {
        if (protocol_.windows().count(win_id) == 0)
            return false;
        send_frame(protocol_.focus(win_id, flags));
        return true;
    });
}

void Master::send_input(wire::InputKind kind, std::string payload)
{
    reactor_.post([this, kind, payload = std::move(payload)] { send_frame(protocol_.input(kind, payload)); });
}

std::map<WindowId, std::string> Master::windows()
{
    return on_loop([this] { return protocol_.windows(); });
}

std::optional<WindowId> Master::focused()
{
    return on_loop([this] { return protocol_.focused(); });
}

std::vector<std::string> Master::update_log()
{
    return on_loop([this] { return protocol_.update_log(); });
}

bool Master::log_gapless()
{
    return on_loop([this] { return protocol_.log_gapless(); });
}

bool Master::connected()
{
    std::lock_guard lock(done_mutex_);
    return !broker_gone_;
}

void Master::wait()
{
    std::unique_lock lock(done_mutex_);
    done_cv_.wait(lock, [this] { return broker_gone_; });
}

} // namespace appshare::client
