#include "maxgen/victim.hpp"

#include <algorithm>

#include "maxgen/rng.hpp"

namespace maxgen {

SyntheticVictim::SyntheticVictim(SyntheticVictimConfig config) : config_(std::move(config)) {
    if (config_.base_len < 1) throw ConfigError("synthetic victim: base_len must be >= 1");
    if (config_.gain < 0) throw ConfigError("synthetic victim: gain must be >= 0");
    if (config_.loop_threshold <= 0) throw ConfigError("synthetic victim: loop_threshold must be > 0");
    if (config_.repeat_period < 1) throw ConfigError("synthetic victim: repeat_period must be >= 1");
    if (config_.cap < 1) throw ConfigError("synthetic victim: cap must be >= 1");
    planted_.insert(config_.planted_tokens.begin(), config_.planted_tokens.end());
}

int SyntheticVictim::planted_hits(const Prompt& prompt) const {
    int hits = 0;
    for (auto id : prompt.token_ids) {
        if (planted_.count(id)) ++hits;
    }
    return hits;
}

std::int64_t SyntheticVictim::output_length(const Prompt& prompt, std::int64_t cap,
                                            bool* truncated) const {
    const std::int64_t effective_cap =
        cap > 0 ? std::min(cap, config_.cap) : config_.cap;
    const int hits = planted_hits(prompt);
    if (hits >= config_.loop_threshold) {
        // Non-terminating generation: only the cap stops it.
        *truncated = true;
        return effective_cap;
    }
    const std::int64_t natural = config_.base_len + config_.gain * hits;
    *truncated = natural >= effective_cap;
    return std::min(natural, effective_cap);
}

QueryOutcome SyntheticVictim::query(const Prompt& prompt, std::int64_t cap) {
    if (prompt.token_ids.empty()) throw DimensionError("query: empty prompt");
    QueryOutcome out;
    out.output_tokens = output_length(prompt, cap, &out.truncated);
    out.stream = stream(prompt, cap);
    return out;
}

std::vector<std::uint32_t> SyntheticVictim::stream(const Prompt& prompt, std::int64_t cap) const {
    if (prompt.token_ids.empty()) throw DimensionError("stream: empty prompt");
    bool truncated = false;
    const std::int64_t len = output_length(prompt, cap, &truncated);
    const bool looping = planted_hits(prompt) >= config_.loop_threshold;

    std::vector<std::uint32_t> ids;
    ids.reserve(static_cast<std::size_t>(len));

    // Stream content depends only on (config seed, prompt ids).
    std::uint64_t s = config_.seed;
    for (auto id : prompt.token_ids) s = mix_seed(s, id);
    Rng rng(s);

    if (looping && config_.stream_mode == StreamMode::Repetitive) {
        std::vector<std::uint32_t> cycle(static_cast<std::size_t>(config_.repeat_period));
        for (auto& c : cycle) c = static_cast<std::uint32_t>(rng.next_below(1u << 20));
        for (std::int64_t i = 0; i < len; ++i) {
            ids.push_back(cycle[static_cast<std::size_t>(i % config_.repeat_period)]);
        }
    } else {
        // Draws over a wide id space; repeated n-grams are vanishingly rare,
        // so these streams model outputs with no surface-level repetition.
        for (std::int64_t i = 0; i < len; ++i) {
            ids.push_back(static_cast<std::uint32_t>(rng.next_below(1u << 20)));
        }
    }
    return ids;
}

} // namespace maxgen
