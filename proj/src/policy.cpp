#include "lobsim/policy.hpp"

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

#include <json.hpp>
#include <sys/wait.h>
#include <unistd.h>

#include "lobsim/baselines.hpp"
#include "lobsim/rng.hpp"

namespace lobsim {

double RandomPolicy::act(const PolicyInput& /*input*/) { return rng::uniform(eng_, -1.0, 1.0); }

double ThresholdOraclePolicy::act(const PolicyInput& input) {
    // Decisions at steps 0 .. length-2 can execute; the last one is dropped.
    if (input.step + 1 >= input.episode_length) return 0.0;
    const double executable_left = static_cast<double>(input.episode_length - 1 - input.step);
    const double pace = 1.0 / executable_left;
    return input.raw[obs::kDeltaMid] > 0.0 ? boost_ * pace : 0.0;
}

double TwapPacePolicy::act(const PolicyInput& input) {
    if (input.step + 1 >= input.episode_length) return 0.0;
    return 1.0 / static_cast<double>(input.episode_length - 1 - input.step);
}

void VwapPacePolicy::begin_episode(const EpisodeConfig& cfg) {
    const std::size_t steps = episode_window(*cfg.day, cfg.start_index, cfg.horizon_s).length();
    weight_ = vwap_like_schedule(*cfg.day, cfg.start_index, steps, 1.0).schedule;
    // The decision at the last snapshot never executes.
    weight_.back() = 0.0;
    remaining_weight_.assign(steps + 1, 0.0);
    for (std::size_t t = steps; t-- > 0;) remaining_weight_[t] = remaining_weight_[t + 1] + weight_[t];
}

double VwapPacePolicy::act(const PolicyInput& input) {
    if (input.step >= weight_.size() || !(remaining_weight_[input.step] > 0.0)) return 0.0;
    return weight_[input.step] / remaining_weight_[input.step];
}

struct ExternalPolicy::Process {
    pid_t pid = -1;
    std::FILE* to_child = nullptr;
    std::FILE* from_child = nullptr;

    void send(const nlohmann::json& msg) {
        const std::string line = msg.dump() + "\n";
        if (std::fwrite(line.data(), 1, line.size(), to_child) != line.size() || std::fflush(to_child) != 0) {
            throw std::runtime_error("external policy: write failed (process exited?)");
        }
    }

    nlohmann::json receive() {
        char* buf = nullptr;
        std::size_t cap = 0;
        const ssize_t n = ::getline(&buf, &cap, from_child);
        std::string line = n > 0 ? std::string(buf, static_cast<std::size_t>(n)) : std::string();
        std::free(buf);
        if (n <= 0) throw std::runtime_error("external policy: no reply (process exited?)");
        return nlohmann::json::parse(line);
    }
};

ExternalPolicy::ExternalPolicy(const std::string& command) : proc_(std::make_unique<Process>()) {
    std::signal(SIGPIPE, SIG_IGN);
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0) throw std::runtime_error("external policy: pipe failed");
    if (::pipe(from_child) != 0) {
        ::close(to_child[0]);
        ::close(to_child[1]);
        throw std::runtime_error("external policy: pipe failed");
    }
    const pid_t pid = ::fork();
    if (pid < 0) throw std::runtime_error("external policy: fork failed");
    if (pid == 0) {
        ::dup2(to_child[0], STDIN_FILENO);
        ::dup2(from_child[1], STDOUT_FILENO);
        ::close(to_child[0]);
        ::close(to_child[1]);
        ::close(from_child[0]);
        ::close(from_child[1]);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    proc_->pid = pid;
    proc_->to_child = ::fdopen(to_child[1], "w");
    proc_->from_child = ::fdopen(from_child[0], "r");
    if (proc_->to_child == nullptr || proc_->from_child == nullptr) {
        throw std::runtime_error("external policy: fdopen failed");
    }
}

ExternalPolicy::~ExternalPolicy() {
    if (!proc_) return;
    if (proc_->to_child != nullptr) std::fclose(proc_->to_child);
    if (proc_->from_child != nullptr) std::fclose(proc_->from_child);
    if (proc_->pid > 0) {
        int status = 0;
        ::waitpid(proc_->pid, &status, 0);
    }
}

void ExternalPolicy::begin_episode(const EpisodeConfig& cfg) {
    proc_->send({{"kind", "reset"},
                 {"day", cfg.day->date.str()},
                 {"start_index", cfg.start_index},
                 {"horizon_s", cfg.horizon_s},
                 {"seed", cfg.seed}});
}

double ExternalPolicy::act(const PolicyInput& input) {
    proc_->send({{"kind", "obs"},
                 {"obs", std::vector<double>(input.normalized.begin(), input.normalized.end())},
                 {"step", input.step}});
    const auto reply = proc_->receive();
    if (reply.value("kind", "") != "act" || !reply.contains("action") || !reply["action"].is_number()) {
        throw std::runtime_error("external policy: expected {\"kind\":\"act\",\"action\":x}, got " + reply.dump());
    }
    return reply["action"].get<double>();
}

void ExternalPolicy::end_episode(const EpisodeOutcome& outcome) {
    proc_->send({{"kind", "done"},
                 {"pnl_percent", outcome.pnl_percent},
                 {"cumulative_reward", outcome.cumulative_reward}});
}

namespace {

template <class Transform>
EpisodeOutcome drive(Policy& policy, Environment& env, const EpisodeConfig& cfg, Transform&& transform) {
    Observation o = env.reset(cfg);
    policy.begin_episode(cfg);
    std::vector<double> norm(obs::kSize);
    while (true) {
        transform(o, norm);
        const double action = policy.act({o, norm, env.steps_taken(), env.episode_length()});
        const StepResult r = env.step(action);
        if (r.done) break;
        o = r.observation;
    }
    EpisodeOutcome out = env.outcome();
    policy.end_episode(out);
    return out;
}

}  // namespace

EpisodeOutcome run_policy(Policy& policy, Environment& env, const EpisodeConfig& cfg, const NormalizerStats* frozen) {
    if (frozen != nullptr && frozen->mode() != NormalizerMode::frozen) {
        throw std::invalid_argument("run_policy: evaluation requires frozen normalizer stats");
    }
    return drive(policy, env, cfg, [frozen](const Observation& o, std::vector<double>& out) {
        if (frozen != nullptr) {
            frozen->transform(o, out);
        } else {
            std::copy(o.begin(), o.end(), out.begin());
        }
    });
}

EpisodeOutcome fit_observations(Policy& policy, Environment& env, const EpisodeConfig& cfg,
                                NormalizerStats& fitting) {
    if (fitting.mode() != NormalizerMode::fitting) throw std::invalid_argument("fit_observations: stats are frozen");
    return drive(policy, env, cfg, [&fitting](const Observation& o, std::vector<double>& out) {
        out = normalize(o, fitting);
    });
}

}  // namespace lobsim
