#include "maxgen/ngram.hpp"

namespace maxgen {

NgramDetector::NgramDetector(NgramDetectorConfig config) : config_(config) {
    config_.validate();
}

std::optional<std::int64_t> NgramDetector::push(std::uint32_t token) {
    if (tripped_) return std::nullopt;
    const std::int64_t index = next_index_++;
    recent_.push_back(token);
    if (recent_.size() > config_.window) recent_.pop_front();

    const auto n = static_cast<std::int64_t>(config_.n);
    if (index + 1 < n) return std::nullopt;

    // Expire grams whose start slid out of the trailing window.
    const std::int64_t window_start = index - static_cast<std::int64_t>(config_.window) + 1;
    while (!gram_order_.empty() && oldest_gram_start_ < window_start) {
        auto it = counts_.find(gram_order_.front());
        if (--(it->second) == 0) counts_.erase(it);
        gram_order_.pop_front();
        ++oldest_gram_start_;
    }

    std::vector<std::uint32_t> gram(recent_.end() - n, recent_.end());
    const int count = ++counts_[gram];
    gram_order_.push_back(std::move(gram));
    if (count >= config_.threshold) {
        tripped_ = true;
        return index;
    }
    return std::nullopt;
}

std::optional<std::int64_t> ngram_detect(std::span<const std::uint32_t> stream,
                                         const NgramDetectorConfig& config) {
    NgramDetector detector(config);
    for (std::uint32_t token : stream) {
        if (auto hit = detector.push(token)) return hit;
    }
    return std::nullopt;
}

} // namespace maxgen
