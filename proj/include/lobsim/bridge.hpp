#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lobsim/episode_env.hpp"
#include "lobsim/normalizer.hpp"

namespace lobsim {

/// Days available to a bridge session, keyed by date.
class DayLibrary {
public:
    void add(DayBookPtr day);
    DayBookPtr get(Date date) const;  ///< throws std::out_of_range
    DayBookPtr first() const;
    bool empty() const noexcept { return days_.empty(); }
    std::vector<Date> dates() const;

private:
    std::map<Date, DayBookPtr> days_;
};

struct BridgeOptions {
    EngineParams engine;
    RewardParams reward;
    int horizon_s = 3600;
    double initial_btc = 1.0;
    double target_fraction = 0.0;
    double trade_fraction = 0.1;
};

struct BridgeReply {
    std::string line;  ///< one JSON message, no trailing newline
    bool close = false;
};

/// One wire connection driving one environment, episode after episode.
///
/// Requests (one JSON object per line):
///   {"kind":"reset", "day":"YYYYMMDD"?, "start_index":n?, "horizon_s":h?, "seed":s?}
///   {"kind":"act", "action":x}
/// Replies:
///   {"kind":"obs", "obs":[93], "reward":r, "done":false, "step":k, "info":{...}}
///   {"kind":"done", "obs":[93], "reward":r, "done":true, "step":k, "info":{... pnl_percent ...}}
///   {"kind":"error", "message":"..."}   and the session closes
/// Observations are passed through the frozen stats when given; the stats
/// are never updated. Numbers carry 17 significant digits.
class BridgeSession {
public:
    BridgeSession(const DayLibrary& days, BridgeOptions options, const NormalizerStats* frozen = nullptr);

    BridgeReply handle(std::string_view line);
    bool closed() const noexcept { return closed_; }
    const Environment& environment() const noexcept { return env_; }

private:
    BridgeReply reset(const nlohmann::json& msg);
    BridgeReply act(const nlohmann::json& msg);
    BridgeReply error(const std::string& message);
    std::vector<double> wire_obs(const Observation& o) const;

    const DayLibrary& days_;
    BridgeOptions options_;
    const NormalizerStats* frozen_;
    Environment env_;
    bool closed_ = false;
};

/// Serves one session over a line stream until EOF or a protocol error.
/// Returns 0 on clean EOF, 1 when the session closed on an error.
int serve_stream(std::istream& in, std::ostream& out, BridgeSession& session);

/// Listens on 127.0.0.1:port (0 picks a free port, reported through
/// `on_listen`) and serves connections one after another, each with a fresh
/// session. Stops after `max_connections` when non-zero.
void serve_socket(std::uint16_t port, const std::function<std::unique_ptr<BridgeSession>()>& make_session,
                  std::size_t max_connections, const std::function<void(std::uint16_t)>& on_listen = {});

}  // namespace lobsim
