#pragma once

#include "appshare/apppool/app_pool.hpp"
#include "appshare/cluster/membership.hpp"
#include "appshare/cluster/peer.hpp"

#include <condition_variable>
#include <deque>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <thread>

namespace appshare::cluster {

struct PeerNodeOptions
{
    net::MulticastOptions network;
    /// Sessions currently served locally; consulted before answering requests.
    std::function<std::size_t()> active_sessions;
    /// Invoked on the coordinator thread for each first reply to our request.
    std::function<void(const ConnectDirective&)> on_connect;
    Duration tick = std::chrono::milliseconds(50);
};

/// A running cluster member: a Membership feeding one coordinator thread that
/// owns the Peer and the AppPool. Public calls are marshalled onto that thread.
class PeerNode
{
public:
    PeerNode(PeerConfig cfg, apppool::AppPool pool, PeerNodeOptions options);
    ~PeerNode();

    bool request(std::string app_name);
    void set_shared(std::string app_name, bool shared);

    std::vector<std::string> roster();
    std::size_t pending_count();
    std::size_t query_count();

    /// Leaves the group and stops the coordinator. Idempotent.
    void stop();

private:
    template <typename F>
    auto call(F&& fn) -> decltype(fn());
    bool enqueue(std::function<void()> task);
    void run();
    void send_all(const std::vector<wire::ClusterDatagram>& out);

    Peer peer_;
    apppool::AppPool pool_;
    PeerNodeOptions options_;

    std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<std::function<void()>> tasks_;
    bool stopping_ = false;

    std::unique_ptr<Membership> membership_;
    std::thread thread_;
};

} // namespace appshare::cluster
