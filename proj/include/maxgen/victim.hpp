#pragma once

#include <cstdint>
#include <optional>
#include <unordered_set>
#include <vector>

#include "maxgen/error.hpp"
#include "maxgen/vocab.hpp"

namespace maxgen {

// Result of one black-box query: the output length is the only signal the
// search ever sees. The token stream is populated by the synthetic victim
// only, for feeding the anomaly-detector evaluation.
struct QueryOutcome {
    std::int64_t output_tokens = 0;
    bool truncated = false;
    double latency_s = 0.0;
    std::optional<std::vector<std::uint32_t>> stream;
    bool count_estimated = false; // remote adapters without a reported count
};

// Black-box text generator. cap > 0 limits the emitted tokens for this call
// (the caller's max-token parameter); implementations may cap lower.
class Victim {
public:
    virtual ~Victim() = default;
    virtual QueryOutcome query(const Prompt& prompt, std::int64_t cap) = 0;
};

enum class StreamMode : std::uint8_t {
    Repetitive, // looping outputs cycle with a fixed period
    Diverse,    // looping outputs are a seeded non-repeating id stream
};

// Deterministic generator with a known output-length landscape: the output
// grows linearly with the number of prompt tokens that fall in a planted id
// set and saturates at the cap once loop_threshold planted hits occur.
struct SyntheticVictimConfig {
    std::int64_t cap = 4096;
    std::vector<std::uint32_t> planted_tokens;
    std::int64_t base_len = 32;
    std::int64_t gain = 64;
    int loop_threshold = 8;
    int repeat_period = 8;
    StreamMode stream_mode = StreamMode::Diverse;
    std::uint64_t seed = 0;
};

class SyntheticVictim : public Victim {
public:
    explicit SyntheticVictim(SyntheticVictimConfig config);

    QueryOutcome query(const Prompt& prompt, std::int64_t cap) override;

    // Emits exactly query(...).output_tokens ids. Looping prompts produce
    // either a cyclic stream (Repetitive) or a seeded pseudo-random one
    // (Diverse); short outputs are always pseudo-random.
    std::vector<std::uint32_t> stream(const Prompt& prompt, std::int64_t cap) const;

    // Number of prompt positions whose id is planted.
    int planted_hits(const Prompt& prompt) const;

    const SyntheticVictimConfig& config() const { return config_; }

private:
    std::int64_t output_length(const Prompt& prompt, std::int64_t cap, bool* truncated) const;

    SyntheticVictimConfig config_;
    std::unordered_set<std::uint32_t> planted_;
};

} // namespace maxgen
