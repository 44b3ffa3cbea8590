#include "maxgen/remote_victim.hpp"

#include <chrono>
#include <cstdlib>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace maxgen {

namespace {

class SystemClock : public Clock {
public:
    double now_s() override {
        const auto t = std::chrono::steady_clock::now().time_since_epoch();
        return std::chrono::duration<double>(t).count();
    }
    void sleep_s(double seconds) override {
        if (seconds > 0.0) std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
    }
};

// Whitespace-delimited fallback when the API reports no token usage.
std::int64_t estimate_tokens(const std::string& text) {
    std::istringstream in(text);
    std::string word;
    std::int64_t count = 0;
    while (in >> word) ++count;
    return count;
}

} // namespace

std::shared_ptr<Clock> system_clock() {
    static auto clock = std::make_shared<SystemClock>();
    return clock;
}

RateLimiter::RateLimiter(double min_interval_s, std::shared_ptr<Clock> clock)
    : min_interval_s_(min_interval_s), clock_(std::move(clock)) {}

double RateLimiter::acquire() {
    std::lock_guard<std::mutex> lock(mutex_);
    double now = clock_->now_s();
    if (!first_ && now < next_allowed_s_) {
        clock_->sleep_s(next_allowed_s_ - now);
        now = next_allowed_s_;
    }
    first_ = false;
    next_allowed_s_ = now + min_interval_s_;
    return now;
}

RemoteVictim::RemoteVictim(RemoteVictimConfig config, std::shared_ptr<Clock> clock)
    : config_(std::move(config)), clock_(clock), limiter_(config_.min_interval_s, clock) {}

QueryOutcome RemoteVictim::query(const Prompt& prompt, std::int64_t cap) {
    if (!config_.enabled) {
        throw SafetyError("remote victim is disabled; pass the explicit enable flag to use it");
    }
    if (prompt.token_ids.empty()) throw DimensionError("query: empty prompt");

    TransportError last("remote: no attempt made");
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        limiter_.acquire();
        try {
            return send_once(prompt, cap);
        } catch (const TransportError& e) {
            last = e;
            if (e.retry_after_s > 0.0) clock_->sleep_s(e.retry_after_s);
        }
    }
    throw last;
}

QueryOutcome RemoteVictim::send_once(const Prompt& prompt, std::int64_t cap) {
    nlohmann::json body{
        {"model", config_.model},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt.text}}})},
        {"max_tokens", cap},
        {"temperature", config_.temperature},
    };

    httplib::Client client(config_.base_url);
    client.set_connection_timeout(30, 0);
    client.set_read_timeout(600, 0);
    httplib::Headers headers;
    if (!config_.auth_env.empty()) {
        if (const char* token = std::getenv(config_.auth_env.c_str())) {
            headers.emplace("Authorization", std::string("Bearer ") + token);
        }
    }

    const double start = clock_->now_s();
    auto res = client.Post(config_.path, headers, body.dump(), "application/json");
    const double latency = clock_->now_s() - start;

    if (!res) {
        throw TransportError("remote: request failed: " + httplib::to_string(res.error()));
    }
    if (res->status == 429) {
        double retry_after = config_.min_interval_s;
        if (res->has_header("Retry-After")) {
            try {
                retry_after = std::stod(res->get_header_value("Retry-After"));
            } catch (...) {
            }
        }
        throw TransportError("remote: rate limited (429)", retry_after);
    }
    if (res->status < 200 || res->status >= 300) {
        throw TransportError("remote: HTTP " + std::to_string(res->status));
    }

    nlohmann::json reply;
    try {
        reply = nlohmann::json::parse(res->body);
    } catch (const std::exception& e) {
        throw TransportError(std::string("remote: bad JSON response: ") + e.what());
    }

    QueryOutcome out;
    out.latency_s = latency;
    if (reply.contains("usage") && reply["usage"].contains("completion_tokens")) {
        out.output_tokens = reply["usage"]["completion_tokens"].get<std::int64_t>();
    } else {
        std::string content;
        if (reply.contains("choices") && !reply["choices"].empty()) {
            const auto& choice = reply["choices"][0];
            if (choice.contains("message") && choice["message"].contains("content")) {
                content = choice["message"]["content"].get<std::string>();
            }
        }
        out.output_tokens = estimate_tokens(content);
        out.count_estimated = true;
    }
    out.truncated = cap > 0 && out.output_tokens >= cap;
    return out;
}

} // namespace maxgen
