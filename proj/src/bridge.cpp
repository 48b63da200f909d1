#include "lobsim/bridge.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

namespace lobsim {

using nlohmann::json;

void DayLibrary::add(DayBookPtr day) {
    if (!day) throw std::invalid_argument("DayLibrary: null day");
    days_[day->date] = std::move(day);
}

DayBookPtr DayLibrary::get(Date date) const {
    const auto it = days_.find(date);
    if (it == days_.end()) throw std::out_of_range("day " + date.str() + " not loaded");
    return it->second;
}

DayBookPtr DayLibrary::first() const {
    if (days_.empty()) throw std::out_of_range("no days loaded");
    return days_.begin()->second;
}

std::vector<Date> DayLibrary::dates() const {
    std::vector<Date> out;
    for (const auto& [d, _] : days_) out.push_back(d);
    return out;
}

BridgeSession::BridgeSession(const DayLibrary& days, BridgeOptions options, const NormalizerStats* frozen)
    : days_(days), options_(options), frozen_(frozen), env_(options.engine, options.reward) {
    if (frozen_ != nullptr && frozen_->mode() != NormalizerMode::frozen) {
        throw std::invalid_argument("bridge: normalizer stats must be frozen");
    }
}

std::vector<double> BridgeSession::wire_obs(const Observation& o) const {
    std::vector<double> out(o.begin(), o.end());
    if (frozen_ != nullptr) frozen_->transform(o, out);
    return out;
}

BridgeReply BridgeSession::error(const std::string& message) {
    closed_ = true;
    return {json{{"kind", "error"}, {"message", message}}.dump(), true};
}

BridgeReply BridgeSession::handle(std::string_view line) {
    if (closed_) return error("session closed");
    json msg;
    try {
        msg = json::parse(line);
    } catch (const json::parse_error& e) {
        return error(std::string("malformed message: ") + e.what());
    }
    if (!msg.is_object() || !msg.contains("kind") || !msg["kind"].is_string()) {
        return error("message needs a string 'kind'");
    }
    const std::string kind = msg["kind"].get<std::string>();
    try {
        if (kind == "reset") return reset(msg);
        if (kind == "act") return act(msg);
    } catch (const json::exception& e) {
        return error(std::string("bad field: ") + e.what());
    } catch (const std::exception& e) {
        return error(e.what());
    }
    return error("unknown kind '" + kind + "'");
}

BridgeReply BridgeSession::reset(const json& msg) {
    EpisodeConfig cfg;
    cfg.day = msg.contains("day") ? days_.get(Date::parse(msg["day"].get<std::string>())) : days_.first();
    cfg.start_index = msg.value("start_index", std::size_t{0});
    cfg.horizon_s = msg.value("horizon_s", options_.horizon_s);
    cfg.initial_btc = msg.value("initial_btc", options_.initial_btc);
    cfg.target_fraction = options_.target_fraction;
    cfg.trade_fraction = options_.trade_fraction;
    cfg.seed = msg.value("seed", std::uint64_t{0});
    const Observation o = env_.reset(cfg);
    json reply = {{"kind", "obs"},
                  {"obs", wire_obs(o)},
                  {"reward", 0.0},
                  {"done", false},
                  {"step", 0},
                  {"info",
                   {{"day", cfg.day->date.str()},
                    {"start_index", cfg.start_index},
                    {"horizon_s", cfg.horizon_s},
                    {"episode_length", env_.episode_length()},
                    {"arrival_mid", env_.arrival_mid()}}}};
    return {reply.dump(), false};
}

BridgeReply BridgeSession::act(const json& msg) {
    if (!env_.active()) return error("act without an active episode; send reset first");
    if (!msg.contains("action") || !msg["action"].is_number()) return error("act needs a numeric 'action'");
    const StepResult r = env_.step(msg["action"].get<double>());
    json info = {{"filled", r.info.fill.filled_qty},
                 {"avg_price", r.info.fill.avg_price},
                 {"fee", r.info.fill.fee_paid},
                 {"executed", r.info.execution_index.has_value()},
                 {"cash", env_.portfolio().cash},
                 {"inventory", env_.portfolio().inventory}};
    if (r.done) {
        const EpisodeOutcome out = env_.outcome();
        info["pnl_percent"] = out.pnl_percent;
        info["cumulative_reward"] = out.cumulative_reward;
        info["residual_fraction"] = out.residual_fraction;
        info["fills"] = out.fills;
    }
    json reply = {{"kind", r.done ? "done" : "obs"},
                  {"obs", wire_obs(r.observation)},
                  {"reward", r.reward},
                  {"done", r.done},
                  {"step", env_.steps_taken()},
                  {"info", info}};
    return {reply.dump(), false};
}

int serve_stream(std::istream& in, std::ostream& out, BridgeSession& session) {
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const BridgeReply reply = session.handle(line);
        out << reply.line << '\n';
        out.flush();
        if (reply.close) return 1;
    }
    return 0;
}

namespace {

class FdLineReader {
public:
    explicit FdLineReader(int fd) : fd_(fd) {}

    bool next(std::string& line) {
        while (true) {
            const auto nl = buf_.find('\n');
            if (nl != std::string::npos) {
                line = buf_.substr(0, nl);
                buf_.erase(0, nl + 1);
                if (!line.empty() && line.back() == '\r') line.pop_back();
                return true;
            }
            char chunk[4096];
            const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
            if (n < 0 && errno == EINTR) continue;
            if (n <= 0) return false;
            buf_.append(chunk, static_cast<std::size_t>(n));
        }
    }

private:
    int fd_;
    std::string buf_;
};

bool send_all(int fd, const std::string& data) {
    std::size_t sent = 0;
    while (sent < data.size()) {
        const ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return false;
        sent += static_cast<std::size_t>(n);
    }
    return true;
}

struct Fd {
    int fd = -1;
    ~Fd() {
        if (fd >= 0) ::close(fd);
    }
};

}  // namespace

void serve_socket(std::uint16_t port, const std::function<std::unique_ptr<BridgeSession>()>& make_session,
                  std::size_t max_connections, const std::function<void(std::uint16_t)>& on_listen) {
    Fd listener{::socket(AF_INET, SOCK_STREAM, 0)};
    if (listener.fd < 0) throw std::runtime_error(std::string("socket: ") + std::strerror(errno));
    const int one = 1;
    ::setsockopt(listener.fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    if (::bind(listener.fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        throw std::runtime_error(std::string("bind: ") + std::strerror(errno));
    }
    if (::listen(listener.fd, 4) != 0) throw std::runtime_error(std::string("listen: ") + std::strerror(errno));
    socklen_t len = sizeof addr;
    ::getsockname(listener.fd, reinterpret_cast<sockaddr*>(&addr), &len);
    if (on_listen) on_listen(ntohs(addr.sin_port));

    for (std::size_t served = 0; max_connections == 0 || served < max_connections; ++served) {
        Fd conn{::accept(listener.fd, nullptr, nullptr)};
        if (conn.fd < 0) {
            if (errno == EINTR) continue;
            throw std::runtime_error(std::string("accept: ") + std::strerror(errno));
        }
        auto session = make_session();
        FdLineReader reader(conn.fd);
        std::string line;
        while (reader.next(line)) {
            if (line.empty()) continue;
            const BridgeReply reply = session->handle(line);
            if (!send_all(conn.fd, reply.line + "\n") || reply.close) break;
        }
    }
}

}  // namespace lobsim
