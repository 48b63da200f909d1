#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <future>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "lobsim/bridge.hpp"
#include "lobsim/hashing.hpp"
#include "lobsim/normalizer.hpp"
#include "lobsim/synthetic.hpp"
#include "../support.hpp"

namespace lobsim {
namespace {

using nlohmann::json;

DayLibrary library() {
    DayLibrary lib;
    synthetic::MarketParams p;
    p.snapshots = 1500;
    for (int i = 0; i < 2; ++i) {
        const Date d(20200220 + i);
        lib.add(std::make_shared<DayBook>(synthetic::generate_day(d, p, 3)));
    }
    return lib;
}

BridgeOptions options(int h = 120) {
    BridgeOptions o;
    o.horizon_s = h;
    return o;
}

TEST(Bridge, EpisodeMatchesDirectEnvironment) {
    const DayLibrary lib = library();
    BridgeSession session(lib, options());
    json r = json::parse(session.handle(R"({"kind":"reset","day":"20200221","start_index":40})").line);
    EXPECT_EQ(r["kind"], "obs");
    EXPECT_EQ(r["info"]["episode_length"], 120);
    EXPECT_EQ(r["info"]["day"], "20200221");

    Environment env(options().engine, options().reward);
    EpisodeConfig c;
    c.day = lib.get(Date(20200221));
    c.start_index = 40;
    c.horizon_s = 120;
    Observation o = env.reset(c);
    EXPECT_EQ(r["obs"].get<std::vector<double>>(), std::vector<double>(o.begin(), o.end()));

    double total = 0.0;
    for (int k = 0;; ++k) {
        const double action = (k % 3) * 0.05;
        const StepResult direct = env.step(action);
        r = json::parse(session.handle(json{{"kind", "act"}, {"action", action}}.dump()).line);
        EXPECT_EQ(r["reward"].get<double>(), direct.reward);
        EXPECT_EQ(r["obs"].get<std::vector<double>>(),
                  std::vector<double>(direct.observation.begin(), direct.observation.end()));
        EXPECT_EQ(r["info"]["filled"].get<double>(), direct.info.fill.filled_qty);
        EXPECT_EQ(r["step"], k + 1);
        total += direct.reward;
        if (direct.done) break;
        EXPECT_EQ(r["kind"], "obs");
    }
    EXPECT_EQ(r["kind"], "done");
    EXPECT_TRUE(r["done"].get<bool>());
    EXPECT_EQ(r["info"]["pnl_percent"].get<double>(), env.outcome().pnl_percent);
    EXPECT_EQ(r["info"]["cumulative_reward"].get<double>(), total);

    // A new reset starts the next episode on the same connection.
    r = json::parse(session.handle(R"({"kind":"reset"})").line);
    EXPECT_EQ(r["info"]["day"], "20200220");
    EXPECT_FALSE(session.closed());
}

TEST(Bridge, ErrorsCloseTheSession) {
    const DayLibrary lib = library();
    for (const char* bad : {"not json", R"({"kind":3})", R"({"kind":"fly"})", R"({"kind":"act","action":0.1})",
                            R"({"kind":"reset","day":"20190101"})", R"({"kind":"reset","start_index":1490})",
                            R"({"kind":"reset","day":17})"}) {
        BridgeSession session(lib, options());
        const BridgeReply reply = session.handle(bad);
        EXPECT_TRUE(reply.close) << bad;
        EXPECT_EQ(json::parse(reply.line)["kind"], "error") << bad;
        EXPECT_TRUE(session.closed());
        EXPECT_TRUE(session.handle(R"({"kind":"reset"})").close);
    }
    BridgeSession session(lib, options());
    session.handle(R"({"kind":"reset"})");
    EXPECT_TRUE(session.handle(R"({"kind":"act","action":"big"})").close);
}

TEST(Bridge, FrozenStatsAppliedNeverUpdated) {
    const DayLibrary lib = library();
    test::TempDir dir;
    NormalizerStats fit(obs::kSize);
    std::mt19937_64 eng(1);
    for (int i = 0; i < 50; ++i) {
        std::vector<double> x(obs::kSize);
        for (auto& v : x) v = rng::standard_normal(eng);
        fit.update(x);
    }
    save_stats(fit, dir / "norm.bin");
    const std::string before = sha256_file(dir / "norm.bin");
    const NormalizerStats frozen = load_stats(dir / "norm.bin");
    BridgeSession session(lib, options(), &frozen);
    const json r = json::parse(session.handle(R"({"kind":"reset","start_index":5})").line);
    Environment env(options().engine);
    EpisodeConfig c;
    c.day = lib.first();
    c.start_index = 5;
    c.horizon_s = 120;
    const Observation o = env.reset(c);
    std::vector<double> expected(obs::kSize);
    frozen.transform(o, expected);
    EXPECT_EQ(r["obs"].get<std::vector<double>>(), expected);
    while (!json::parse(session.handle(R"({"kind":"act","action":0.1})").line)["done"].get<bool>()) {
    }
    save_stats(frozen, dir / "after.bin");
    EXPECT_EQ(sha256_file(dir / "after.bin"), before);
    EXPECT_THROW(BridgeSession(lib, options(), &fit), std::invalid_argument);
}

TEST(Bridge, StreamTransport) {
    const DayLibrary lib = library();
    BridgeSession session(lib, options(3));
    std::istringstream in("{\"kind\":\"reset\"}\n\n{\"kind\":\"act\",\"action\":0.1}\r\n"
                          "{\"kind\":\"act\",\"action\":0.1}\n{\"kind\":\"act\",\"action\":0.1}\n");
    std::ostringstream out;
    EXPECT_EQ(serve_stream(in, out, session), 0);
    std::istringstream lines(out.str());
    std::vector<std::string> kinds;
    for (std::string l; std::getline(lines, l);) kinds.push_back(json::parse(l)["kind"]);
    EXPECT_EQ(kinds, (std::vector<std::string>{"obs", "obs", "obs", "done"}));

    BridgeSession s2(lib, options(3));
    std::istringstream bad("{\"kind\":\"act\",\"action\":0.1}\n{\"kind\":\"reset\"}\n");
    std::ostringstream out2;
    EXPECT_EQ(serve_stream(bad, out2, s2), 1);
    const std::string text = out2.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
}

std::string roundtrip(int fd, const std::string& line) {
    const std::string msg = line + "\n";
    EXPECT_EQ(::send(fd, msg.data(), msg.size(), 0), static_cast<ssize_t>(msg.size()));
    std::string reply;
    char c = 0;
    while (::recv(fd, &c, 1, 0) == 1 && c != '\n') reply += c;
    return reply;
}

TEST(Bridge, SocketTransport) {
    const DayLibrary lib = library();
    std::promise<std::uint16_t> port_promise;
    auto port_future = port_promise.get_future();
    std::thread server([&] {
        serve_socket(
            0, [&] { return std::make_unique<BridgeSession>(lib, options(2)); }, 2,
            [&](std::uint16_t p) { port_promise.set_value(p); });
    });
    const std::uint16_t port = port_future.get();
    for (int conn = 0; conn < 2; ++conn) {
        const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        ASSERT_GE(fd, 0);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(port);
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        ASSERT_EQ(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr), 0);
        EXPECT_EQ(json::parse(roundtrip(fd, R"({"kind":"reset","horizon_s":2})"))["kind"], "obs");
        EXPECT_EQ(json::parse(roundtrip(fd, R"({"kind":"act","action":0.1})"))["kind"], "obs");
        const json done = json::parse(roundtrip(fd, R"({"kind":"act","action":0.1})"));
        EXPECT_EQ(done["kind"], "done");
        EXPECT_TRUE(done["info"].contains("pnl_percent"));
        ::close(fd);
    }
    server.join();
}

TEST(DayLibraryTest, Lookup) {
    const DayLibrary lib = library();
    EXPECT_EQ(lib.dates().size(), 2u);
    EXPECT_EQ(lib.first()->date, Date(20200220));
    EXPECT_THROW(lib.get(Date(20200101)), std::out_of_range);
    DayLibrary empty;
    EXPECT_TRUE(empty.empty());
    EXPECT_THROW(empty.first(), std::out_of_range);
}

}  // namespace
}  // namespace lobsim
