#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "maxgen/error.hpp"
#include "maxgen/ngram.hpp"
#include "maxgen/victim.hpp"

namespace maxgen {

enum class SchedulerKind : std::uint8_t { Fifo, Vtc };
enum class DetectorKind : std::uint8_t { Off, Ngram };
enum class RequestKind : std::uint8_t { Benign, Attack };

// Server model: identical devices, each with a serialized prefill unit at
// prefill_rate and a decode unit whose decode_rate is shared equally among
// the device's active batch. Memory per device is baseline_mem plus
// kv_bytes_per_token for every resident prompt+generated token.
struct SimServerConfig {
    int devices = 1;
    double prefill_rate = 1000.0;       // tokens/s per device
    double decode_rate = 100.0;         // tokens/s per device, shared
    int batch_slots = 8;                // concurrent decoding requests per device
    double mem_capacity = 0.0;          // bytes per device (0 = unlimited)
    double kv_bytes_per_token = 0.0;    // bytes
    double baseline_mem = 0.0;          // bytes reserved per device
    std::int64_t output_cap = 0;        // tokens, 0 = uncapped
    SchedulerKind scheduler = SchedulerKind::Fifo;
    std::int64_t vtc_quantum = 1024;    // decode quota per scheduling round
    bool evict_on_preempt = false;      // drop KV of preempted requests
    DetectorKind detector = DetectorKind::Off;
    double detector_overhead = 0.95;    // decode-rate multiplier when detecting
    NgramDetectorConfig detector_config;

    void validate() const;
};

struct SimRequest {
    int id = 0;
    double arrival_s = 0.0;
    std::int64_t prompt_tokens = 1;
    std::int64_t intended_output = 0; // tokens absent caps/termination
    RequestKind kind = RequestKind::Benign;
    StreamMode stream_mode = StreamMode::Diverse;
    int repeat_period = 8; // cycle length when stream_mode is Repetitive
};

struct RequestRecord {
    int id = 0;
    RequestKind kind = RequestKind::Benign;
    double arrival_s = 0.0;
    std::optional<double> ttft_s;
    bool completed = false;
    std::int64_t emitted_tokens = 0;
    std::string status; // completed | failed_oom | terminated_detector | active | queued
    std::optional<double> admitted_s; // first admission to a device
    std::optional<double> finish_s;   // set when the request left the server
    double max_run_tokens = 0.0;      // longest uninterrupted decode run
};

struct TimeSample {
    double t_s = 0.0;
    double tps = 0.0; // server-wide output tokens/s over the last interval
    std::vector<double> mem_bytes;
    int queue_len = 0;
};

struct MetricsTimeline {
    std::vector<RequestRecord> requests;
    std::vector<TimeSample> samples;
};

// Effective decode-rate multiplier for the configured detector.
double detector_overhead(const SimServerConfig& config);

// Deterministic event-driven execution of the workload up to horizon_s,
// sampling the time series every sample_dt_s. Workload must be sorted by
// arrival; only arrivals strictly before the horizon are submitted.
MetricsTimeline run_sim(const SimServerConfig& config, const std::vector<SimRequest>& workload,
                        double horizon_s, double sample_dt_s);

struct WorkloadConfig {
    double attack_rpm = 10.0;  // exactly periodic arrivals
    double benign_rps = 0.0;   // Poisson arrivals
    double duration_s = 600.0;
    int attack_count = 100;
    std::int64_t attack_prompt_tokens = 20;
    std::int64_t attack_intended_output = 32768;
    StreamMode attack_stream_mode = StreamMode::Diverse;
    int attack_repeat_period = 8;
    double benign_prompt_median = 128.0; // log-normal
    double benign_prompt_sigma = 0.5;
    double benign_output_median = 200.0; // log-normal
    double benign_output_sigma = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

// Mixed workload sorted by arrival; ids assigned in arrival order.
std::vector<SimRequest> generate_workload(const WorkloadConfig& config);

} // namespace maxgen
