#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <string>

#include "maxgen/victim.hpp"

namespace maxgen {

// Injectable time source so pacing is testable without real waits.
struct Clock {
    virtual ~Clock() = default;
    virtual double now_s() = 0;
    virtual void sleep_s(double seconds) = 0;
};

std::shared_ptr<Clock> system_clock();

// Enforces a minimum spacing between grants. Callers block until their turn;
// concurrent callers queue on the internal mutex.
class RateLimiter {
public:
    RateLimiter(double min_interval_s, std::shared_ptr<Clock> clock);

    // Blocks until a request may be sent; returns the grant time.
    double acquire();

private:
    double min_interval_s_;
    std::shared_ptr<Clock> clock_;
    std::mutex mutex_;
    double next_allowed_s_ = 0.0;
    bool first_ = true;
};

// Generic chat-completions-style endpoint. The auth token is read from the
// environment variable named in auth_env; it never lives in config files.
struct RemoteVictimConfig {
    std::string base_url;        // e.g. http://host:port
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string auth_env;        // environment variable holding the bearer token
    double temperature = 1.0;
    double min_interval_s = 6.0; // pacing between requests
    int max_retries = 2;
    bool enabled = false;        // must be set by the explicit CLI gate
};

class RemoteVictim : public Victim {
public:
    explicit RemoteVictim(RemoteVictimConfig config,
                          std::shared_ptr<Clock> clock = system_clock());

    // Sends prompt.text with max_tokens = cap. Token count comes from the
    // response usage block when present; otherwise a whitespace-token count
    // of the content is used and flagged as estimated.
    // Throws SafetyError unless the config was explicitly enabled.
    QueryOutcome query(const Prompt& prompt, std::int64_t cap) override;

private:
    QueryOutcome send_once(const Prompt& prompt, std::int64_t cap);

    RemoteVictimConfig config_;
    std::shared_ptr<Clock> clock_;
    RateLimiter limiter_;
};

} // namespace maxgen
