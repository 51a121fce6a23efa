#include "appshare/broker/metrics_json.hpp"

#include "appshare/error.hpp"

#include <json.hpp>

namespace appshare::broker {

std::string stats_to_json(const StatsFile& s)
{
    const auto& m = s.metrics;
    nlohmann::json j;
    j["mode"] = s.mode;
    j["listen_port"] = s.listen_port;
    j["n_sessions"] = m.n_sessions;
    j["n_upstream_sessions"] = m.n_upstream_sessions;
    j["total_bytes_queued"] = m.total_bytes_queued;
    j["per_session_bytes"] = m.per_session_bytes;
    j["rtt_samples_ms"] = m.rtt_samples_ms;
    j["allocated"] = m.allocated ? nlohmann::json(*m.allocated) : nlohmann::json(nullptr);
    j["allocations"] = m.allocations;
    j["dropped_updates"] = m.dropped_updates;
    j["dropped_inputs"] = m.dropped_inputs;
    return j.dump(2) + "\n";
}

StatsFile stats_from_json(std::string_view text)
{
    try {
        const auto j = nlohmann::json::parse(text);
        StatsFile s;
        s.mode = j.value("mode", std::string{});
        s.listen_port = j.value("listen_port", std::uint16_t{0});
        auto& m = s.metrics;
        m.n_sessions = j.at("n_sessions").get<std::size_t>();
        m.n_upstream_sessions = j.at("n_upstream_sessions").get<std::size_t>();
        m.total_bytes_queued = j.at("total_bytes_queued").get<std::uint64_t>();
        m.per_session_bytes = j.at("per_session_bytes").get<std::vector<std::uint64_t>>();
        m.rtt_samples_ms = j.value("rtt_samples_ms", std::vector<double>{});
        if (j.contains("allocated") && !j["allocated"].is_null())
            m.allocated = j["allocated"].get<SessionId>();
        m.allocations = j.value("allocations", std::uint64_t{0});
        m.dropped_updates = j.value("dropped_updates", std::uint64_t{0});
        m.dropped_inputs = j.value("dropped_inputs", std::uint64_t{0});
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, e.what());
    }
}

} // namespace appshare::broker
