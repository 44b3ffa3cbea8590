#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "maxgen/error.hpp"

namespace maxgen {

struct NgramDetectorConfig {
    std::size_t n = 4;
    std::size_t window = 512;  // tokens
    int threshold = 8;         // occurrences of one n-gram within the window

    void validate() const {
        if (n < 1) throw ConfigError("ngram: n must be >= 1");
        if (window <= n) throw ConfigError("ngram: window must exceed n");
        if (threshold < 2) throw ConfigError("ngram: threshold must be >= 2");
    }
};

// Incremental repetition monitor. Counts every n-gram fully inside the
// trailing window; push() returns the stream index at which some gram's
// count first reaches the threshold. One detector instance per stream.
class NgramDetector {
public:
    explicit NgramDetector(NgramDetectorConfig config);

    // Feeds one token; returns the termination index if this token tripped
    // the detector. Once tripped the detector stays latched.
    std::optional<std::int64_t> push(std::uint32_t token);

    bool tripped() const { return tripped_; }

private:
    NgramDetectorConfig config_;
    std::deque<std::uint32_t> recent_;
    std::deque<std::vector<std::uint32_t>> gram_order_;
    std::map<std::vector<std::uint32_t>, int> counts_;
    std::int64_t next_index_ = 0;
    std::int64_t oldest_gram_start_ = 0;
    bool tripped_ = false;
};

// Scans a whole stream; returns the earliest termination index or nullopt.
std::optional<std::int64_t> ngram_detect(std::span<const std::uint32_t> stream,
                                         const NgramDetectorConfig& config);

} // namespace maxgen
