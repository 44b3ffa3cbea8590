#include "maxgen/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <queue>

#include "maxgen/rng.hpp"

namespace maxgen {

void SimServerConfig::validate() const {
    if (devices < 1) throw ConfigError("sim: devices must be >= 1");
    if (!(prefill_rate > 0.0)) throw ConfigError("sim: prefill_rate must be > 0");
    if (!(decode_rate > 0.0)) throw ConfigError("sim: decode_rate must be > 0");
    if (batch_slots < 1) throw ConfigError("sim: batch_slots must be >= 1");
    if (mem_capacity < 0.0 || baseline_mem < 0.0 || kv_bytes_per_token < 0.0) {
        throw ConfigError("sim: memory parameters must be >= 0");
    }
    if (mem_capacity > 0.0 && baseline_mem >= mem_capacity) {
        throw ConfigError("sim: baseline_mem must leave room under mem_capacity");
    }
    if (output_cap < 0) throw ConfigError("sim: output_cap must be >= 0");
    if (scheduler == SchedulerKind::Vtc && vtc_quantum < 1) {
        throw ConfigError("sim: vtc_quantum must be >= 1");
    }
    if (!(detector_overhead > 0.0 && detector_overhead <= 1.0)) {
        throw ConfigError("sim: detector_overhead must be in (0, 1]");
    }
    if (detector == DetectorKind::Ngram) detector_config.validate();
}

double detector_overhead(const SimServerConfig& config) {
    return config.detector == DetectorKind::Ngram ? config.detector_overhead : 1.0;
}

namespace {

constexpr double kTokenEps = 1e-6;
constexpr double kMemEps = 1e-3; // bytes

enum class Phase : std::uint8_t {
    Pending,
    Queued,
    PrefillWait,
    Prefilling,
    Decoding,
    Preempted,
    Done,
};

struct RunReq {
    const SimRequest* req = nullptr;
    Phase phase = Phase::Pending;
    int device = -1;
    double emitted = 0.0;
    double run_emitted = 0.0;       // since last admission to the batch
    double max_run = 0.0;
    std::int64_t prefill_tokens = 0;
    bool resident = false;          // holds KV on its device
    std::optional<double> first_token_time;
    std::optional<double> admit_time;
    std::optional<double> finish_time;
    std::int64_t target = 0;        // emission stops here
    bool detector_hit = false;      // target came from the detector
    std::string status;
    bool completed = false;
};

struct Dev {
    std::vector<int> decoding;
    std::vector<int> residents;
    std::deque<int> prefill_queue;
    int prefilling = -1;
    int slots_used = 0;
    std::uint64_t version = 0;
    double last_advance = 0.0;
};

// kind: 0 device boundary, 1 prefill done, 2 arrival, 3 sample
struct Event {
    double time = 0.0;
    int kind = 0;
    int target = 0;
    std::uint64_t version = 0;
    std::uint64_t seq = 0;
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) return a.time > b.time;
        if (a.kind != b.kind) return a.kind > b.kind;
        if (a.target != b.target) return a.target > b.target;
        return a.seq > b.seq;
    }
};

class Engine {
public:
    Engine(const SimServerConfig& config, const std::vector<SimRequest>& workload,
           double horizon_s, double sample_dt_s)
        : cfg_(config), workload_(workload), horizon_(horizon_s), dt_(sample_dt_s) {}

    MetricsTimeline run();

private:
    double rate_eff() const { return cfg_.decode_rate * detector_overhead(cfg_); }
    double share(const Dev& d) const {
        return d.decoding.empty() ? 0.0 : rate_eff() / static_cast<double>(d.decoding.size());
    }

    double device_mem(const Dev& d) const {
        double mem = cfg_.baseline_mem;
        for (int ri : d.residents) {
            const RunReq& rr = reqs_[static_cast<std::size_t>(ri)];
            mem += cfg_.kv_bytes_per_token *
                   (static_cast<double>(rr.req->prompt_tokens) + rr.emitted);
        }
        return mem;
    }

    void advance_device(int di, double now) {
        Dev& d = devs_[static_cast<std::size_t>(di)];
        const double dt = now - d.last_advance;
        if (dt <= 0.0) {
            d.last_advance = now;
            return;
        }
        const double rate = share(d);
        if (rate > 0.0) {
            for (int ri : d.decoding) {
                RunReq& rr = reqs_[static_cast<std::size_t>(ri)];
                const double delta = rate * dt;
                if (!rr.first_token_time && rr.emitted < 1.0 && rr.emitted + delta >= 1.0) {
                    rr.first_token_time = d.last_advance + (1.0 - rr.emitted) / rate;
                }
                rr.emitted += delta;
                rr.run_emitted += delta;
                rr.max_run = std::max(rr.max_run, rr.run_emitted);
                emitted_accum_ += delta;
            }
        }
        d.last_advance = now;
    }

    void advance_all(double now) {
        for (int di = 0; di < cfg_.devices; ++di) advance_device(di, now);
    }

    // Rescheduling bumps the device version, so at most one boundary event
    // per device is ever live; stale ones are dropped on pop.
    void push_boundary(int di, double now) {
        Dev& d = devs_[static_cast<std::size_t>(di)];
        d.version++;
        if (d.decoding.empty()) return;
        const double rate = share(d);
        double dt_min = std::numeric_limits<double>::infinity();
        for (int ri : d.decoding) {
            const RunReq& rr = reqs_[static_cast<std::size_t>(ri)];
            const double to_complete =
                (static_cast<double>(rr.target) - rr.emitted) / rate;
            dt_min = std::min(dt_min, to_complete);
            if (cfg_.scheduler == SchedulerKind::Vtc) {
                const double to_quantum =
                    (static_cast<double>(cfg_.vtc_quantum) - rr.run_emitted) / rate;
                dt_min = std::min(dt_min, to_quantum);
            }
        }
        if (cfg_.mem_capacity > 0.0 && cfg_.kv_bytes_per_token > 0.0) {
            const double growth = cfg_.kv_bytes_per_token * rate_eff();
            const double headroom = cfg_.mem_capacity - device_mem(d);
            dt_min = std::min(dt_min, std::max(headroom, 0.0) / growth);
        }
        if (!std::isfinite(dt_min)) return;
        events_.push(Event{now + std::max(dt_min, 0.0), 0, di, d.version, seq_++});
    }

    void start_next_prefill(int di, double now) {
        Dev& d = devs_[static_cast<std::size_t>(di)];
        if (d.prefilling >= 0 || d.prefill_queue.empty()) return;
        const int ri = d.prefill_queue.front();
        d.prefill_queue.pop_front();
        RunReq& rr = reqs_[static_cast<std::size_t>(ri)];
        rr.phase = Phase::Prefilling;
        d.prefilling = ri;
        const double duration = static_cast<double>(rr.prefill_tokens) / cfg_.prefill_rate;
        events_.push(Event{now + duration, 1, ri, 0, seq_++});
    }

    void join_decode(int ri, double now) {
        RunReq& rr = reqs_[static_cast<std::size_t>(ri)];
        if (rr.emitted >= static_cast<double>(rr.target) - kTokenEps) {
            finish(ri, rr.detector_hit ? "terminated_detector" : "completed",
                   !rr.detector_hit, now);
            return;
        }
        Dev& d = devs_[static_cast<std::size_t>(rr.device)];
        rr.phase = Phase::Decoding;
        rr.run_emitted = 0.0;
        d.decoding.push_back(ri);
    }

    void finish(int ri, const std::string& status, bool completed, double now) {
        RunReq& rr = reqs_[static_cast<std::size_t>(ri)];
        if (rr.phase == Phase::Done) return;
        if (rr.device >= 0) {
            Dev& d = devs_[static_cast<std::size_t>(rr.device)];
            auto dit = std::find(d.decoding.begin(), d.decoding.end(), ri);
            if (dit != d.decoding.end()) {
                d.decoding.erase(dit);
                d.slots_used--;
            } else if (rr.phase == Phase::Prefilling || rr.phase == Phase::PrefillWait) {
                d.slots_used--;
                if (d.prefilling == ri) {
                    d.prefilling = -1;
                    start_next_prefill(rr.device, now);
                } else {
                    auto pit = std::find(d.prefill_queue.begin(), d.prefill_queue.end(), ri);
                    if (pit != d.prefill_queue.end()) d.prefill_queue.erase(pit);
                }
            }
            if (rr.resident) {
                auto rit = std::find(d.residents.begin(), d.residents.end(), ri);
                if (rit != d.residents.end()) d.residents.erase(rit);
                rr.resident = false;
            }
        }
        rr.phase = Phase::Done;
        rr.status = status;
        rr.completed = completed;
        rr.finish_time = now;
        // Requests that ran to their target emit exactly that many tokens.
        if (status == "completed" || status == "terminated_detector") {
            rr.emitted = static_cast<double>(rr.target);
        }
    }

    void preempt(int ri, double now) {
        RunReq& rr = reqs_[static_cast<std::size_t>(ri)];
        Dev& d = devs_[static_cast<std::size_t>(rr.device)];
        auto dit = std::find(d.decoding.begin(), d.decoding.end(), ri);
        if (dit == d.decoding.end()) return;
        // Clamp any float overshoot so no run ever exceeds the quantum.
        // Clamp float overshoot; max_run keeps the raw value so a genuine
        // scheduling bug would still show up in the records.
        const double over = rr.run_emitted - static_cast<double>(cfg_.vtc_quantum);
        if (over > 0.0) {
            rr.emitted -= over;
            emitted_accum_ -= over;
            rr.run_emitted = static_cast<double>(cfg_.vtc_quantum);
        }
        d.decoding.erase(dit);
        d.slots_used--;
        rr.phase = Phase::Preempted;
        if (cfg_.evict_on_preempt && rr.resident) {
            auto rit = std::find(d.residents.begin(), d.residents.end(), ri);
            if (rit != d.residents.end()) d.residents.erase(rit);
            rr.resident = false;
            rr.device = -1;
        }
        queue_.push_back(ri);
    }

    bool never_fits(const RunReq& rr) const {
        if (cfg_.mem_capacity <= 0.0) return false;
        const double footprint = cfg_.kv_bytes_per_token *
                                 (static_cast<double>(rr.req->prompt_tokens) + rr.emitted);
        return cfg_.baseline_mem + footprint > cfg_.mem_capacity + kMemEps;
    }

    // Least-used device with a free slot that can hold the footprint.
    int pick_device(double footprint_bytes) const {
        int best = -1;
        double best_mem = 0.0;
        for (int di = 0; di < cfg_.devices; ++di) {
            const Dev& d = devs_[static_cast<std::size_t>(di)];
            if (d.slots_used >= cfg_.batch_slots) continue;
            const double mem = device_mem(d);
            if (cfg_.mem_capacity > 0.0 && mem + footprint_bytes > cfg_.mem_capacity + kMemEps) {
                continue;
            }
            if (best < 0 || mem < best_mem) {
                best = di;
                best_mem = mem;
            }
        }
        return best;
    }

    // Admits the queue entry if possible. Returns false when blocked.
    bool admit(int ri, double now) {
        RunReq& rr = reqs_[static_cast<std::size_t>(ri)];
        if (rr.resident) {
            // Preempted with cached state: resume on its own device.
            Dev& d = devs_[static_cast<std::size_t>(rr.device)];
            if (d.slots_used >= cfg_.batch_slots) return false;
            d.slots_used++;
            join_decode(ri, now);
            return true;
        }
        const double footprint = cfg_.kv_bytes_per_token *
                                 (static_cast<double>(rr.req->prompt_tokens) + rr.emitted);
        const int di = pick_device(footprint);
        if (di < 0) return false;
        if (!rr.admit_time) rr.admit_time = now;
        Dev& d = devs_[static_cast<std::size_t>(di)];
        d.slots_used++;
        rr.device = di;
        rr.resident = true;
        d.residents.push_back(ri);
        rr.phase = Phase::PrefillWait;
        // Evicted requests recompute their whole context.
        rr.prefill_tokens = rr.req->prompt_tokens +
                            static_cast<std::int64_t>(std::floor(rr.emitted + kTokenEps));
        d.prefill_queue.push_back(ri);
        start_next_prefill(di, now);
        return true;
    }

    void try_admit(double now) {
        advance_all(now);
        std::vector<int> touched;
        if (cfg_.scheduler == SchedulerKind::Fifo) {
            while (!queue_.empty()) {
                const int ri = queue_.front();
                RunReq& rr = reqs_[static_cast<std::size_t>(ri)];
                if (never_fits(rr)) {
                    queue_.pop_front();
                    finish(ri, "failed_oom", false, now);
                    continue;
                }
                if (!admit(ri, now)) break; // strict order: the head blocks
                touched.push_back(rr.device);
                queue_.pop_front();
            }
        } else {
            // Round-robin pass: blocked entries are skipped, not barriers.
            for (std::size_t i = 0; i < queue_.size();) {
                const int ri = queue_[i];
                RunReq& rr = reqs_[static_cast<std::size_t>(ri)];
                if (never_fits(rr)) {
                    queue_.erase(queue_.begin() + static_cast<std::ptrdiff_t>(i));
                    finish(ri, "failed_oom", false, now);
                    continue;
                }
                if (admit(ri, now)) {
                    touched.push_back(rr.device);
                    queue_.erase(queue_.begin() + static_cast<std::ptrdiff_t>(i));
                } else {
                    ++i;
                }
            }
        }
        std::sort(touched.begin(), touched.end());
        touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
        for (int di : touched) push_boundary(di, now);
    }

    void handle_boundary(int di, double now) {
        Dev& d = devs_[static_cast<std::size_t>(di)];
        advance_device(di, now);

        std::vector<int> done;
        for (int ri : d.decoding) {
            const RunReq& rr = reqs_[static_cast<std::size_t>(ri)];
            if (rr.emitted >= static_cast<double>(rr.target) - kTokenEps) done.push_back(ri);
        }
        std::sort(done.begin(), done.end());
        for (int ri : done) {
            const bool hit = reqs_[static_cast<std::size_t>(ri)].detector_hit;
            finish(ri, hit ? "terminated_detector" : "completed", !hit, now);
        }

        if (cfg_.mem_capacity > 0.0) {
            while (device_mem(d) >= cfg_.mem_capacity - kMemEps && !d.residents.empty()) {
                int victim = -1;
                double victim_bytes = -1.0;
                for (int ri : d.residents) {
                    const RunReq& rr = reqs_[static_cast<std::size_t>(ri)];
                    const double bytes =
                        cfg_.kv_bytes_per_token *
                        (static_cast<double>(rr.req->prompt_tokens) + rr.emitted);
                    if (victim < 0 || bytes > victim_bytes ||
                        (bytes == victim_bytes &&
                         rr.req->id > reqs_[static_cast<std::size_t>(victim)].req->id)) {
                        victim = ri;
                        victim_bytes = bytes;
                    }
                }
                if (victim < 0) break;
                // Preempted entries linger in the scheduler queue; drop them.
                auto qit = std::find(queue_.begin(), queue_.end(), victim);
                if (qit != queue_.end()) queue_.erase(qit);
                finish(victim, "failed_oom", false, now);
            }
        }

        if (cfg_.scheduler == SchedulerKind::Vtc) {
            std::vector<int> expired;
            for (int ri : d.decoding) {
                const RunReq& rr = reqs_[static_cast<std::size_t>(ri)];
                if (rr.run_emitted >= static_cast<double>(cfg_.vtc_quantum) - kTokenEps) {
                    expired.push_back(ri);
                }
            }
            std::sort(expired.begin(), expired.end());
            for (int ri : expired) preempt(ri, now);
        }

        try_admit(now);
        push_boundary(di, now);
    }

    void take_sample(double t) {
        advance_all(t);
        TimeSample s;
        s.t_s = t;
        s.tps = (emitted_accum_ - last_sample_accum_) / dt_;
        last_sample_accum_ = emitted_accum_;
        s.mem_bytes.reserve(static_cast<std::size_t>(cfg_.devices));
        for (const Dev& d : devs_) s.mem_bytes.push_back(device_mem(d));
        s.queue_len = static_cast<int>(queue_.size());
        samples_.push_back(std::move(s));
    }

    std::int64_t compute_target(const SimRequest& req) const;

    const SimServerConfig& cfg_;
    const std::vector<SimRequest>& workload_;
    double horizon_;
    double dt_;

    std::vector<RunReq> reqs_;
    std::vector<Dev> devs_;
    std::deque<int> queue_;
    std::priority_queue<Event, std::vector<Event>, EventAfter> events_;
    std::uint64_t seq_ = 0;
    double emitted_accum_ = 0.0;
    double last_sample_accum_ = 0.0;
    std::vector<TimeSample> samples_;
};

std::int64_t Engine::compute_target(const SimRequest& req) const {
    std::int64_t target = req.intended_output;
    if (cfg_.output_cap > 0) target = std::min(target, cfg_.output_cap);
    return target;
}

MetricsTimeline Engine::run() {
    cfg_.validate();
    if (!(dt_ > 0.0)) throw ConfigError("sim: sample_dt_s must be > 0");
    if (horizon_ < 0.0) throw ConfigError("sim: horizon_s must be >= 0");
    for (std::size_t i = 1; i < workload_.size(); ++i) {
        if (workload_[i].arrival_s < workload_[i - 1].arrival_s) {
            throw ConfigError("sim: workload must be sorted by arrival");
        }
    }

    reqs_.resize(workload_.size());
    devs_.assign(static_cast<std::size_t>(cfg_.devices), Dev{});

    // Detector terminations per canonical stream; repetitive streams share
    // results across identical periods.
    std::map<int, std::optional<std::int64_t>> repetitive_cache;
    for (std::size_t i = 0; i < workload_.size(); ++i) {
        const SimRequest& req = workload_[i];
        if (req.prompt_tokens < 1) throw ConfigError("sim: prompt_tokens must be >= 1");
        if (req.intended_output < 0) throw ConfigError("sim: intended_output must be >= 0");
        RunReq& rr = reqs_[i];
        rr.req = &req;
        rr.prefill_tokens = req.prompt_tokens;
        rr.target = compute_target(req);
        if (cfg_.detector == DetectorKind::Ngram && rr.target > 0) {
            std::optional<std::int64_t> term;
            if (req.stream_mode == StreamMode::Repetitive) {
                const int period = std::max(1, req.repeat_period);
                auto it = repetitive_cache.find(period);
                if (it == repetitive_cache.end()) {
                    NgramDetector det(cfg_.detector_config);
                    std::optional<std::int64_t> hit;
                    const std::int64_t scan_limit =
                        static_cast<std::int64_t>(cfg_.detector_config.window) +
                        static_cast<std::int64_t>(period) * cfg_.detector_config.threshold +
                        static_cast<std::int64_t>(cfg_.detector_config.n);
                    for (std::int64_t t = 0; t < scan_limit && !hit; ++t) {
                        hit = det.push(static_cast<std::uint32_t>(t % period));
                    }
                    it = repetitive_cache.emplace(period, hit).first;
                }
                if (it->second && *it->second < rr.target) term = *it->second;
            } else {
                NgramDetector det(cfg_.detector_config);
                Rng rng(mix_seed(0x7365727665ULL, static_cast<std::uint64_t>(req.id)));
                for (std::int64_t t = 0; t < rr.target; ++t) {
                    if (auto hit = det.push(static_cast<std::uint32_t>(rng.next_below(1u << 20)))) {
                        term = *hit;
                        break;
                    }
                }
            }
            if (term) {
                rr.target = *term + 1; // tokens emitted up to and including the flag
                rr.detector_hit = true;
            }
        }
        if (req.arrival_s < horizon_) {
            events_.push(Event{req.arrival_s, 2, static_cast<int>(i), 0, seq_++});
        }
    }
    for (std::int64_t k = 1; static_cast<double>(k) * dt_ <= horizon_ + 1e-9; ++k) {
        events_.push(Event{static_cast<double>(k) * dt_, 3, 0, 0, seq_++});
    }

    while (!events_.empty()) {
        const Event ev = events_.top();
        if (ev.time > horizon_ + 1e-12) break;
        events_.pop();
        switch (ev.kind) {
        case 0: {
            const Dev& d = devs_[static_cast<std::size_t>(ev.target)];
            if (ev.version != d.version) break; // superseded schedule
            handle_boundary(ev.target, ev.time);
            break;
        }
        case 1: {
            const int ri = ev.target;
            RunReq& rr = reqs_[static_cast<std::size_t>(ri)];
            if (rr.phase != Phase::Prefilling) break;
            const int di = rr.device;
            advance_device(di, ev.time);
            Dev& d = devs_[static_cast<std::size_t>(di)];
            d.prefilling = -1;
            join_decode(ri, ev.time);
            start_next_prefill(di, ev.time);
            try_admit(ev.time);
            push_boundary(di, ev.time);
            break;
        }
        case 2: {
            RunReq& rr = reqs_[static_cast<std::size_t>(ev.target)];
            rr.phase = Phase::Queued;
            queue_.push_back(ev.target);
            try_admit(ev.time);
            break;
        }
        case 3:
            take_sample(ev.time);
            break;
        default:
            break;
        }
    }

    advance_all(horizon_);

    MetricsTimeline timeline;
    timeline.samples = std::move(samples_);
    for (std::size_t i = 0; i < workload_.size(); ++i) {
        const SimRequest& req = workload_[i];
        if (req.arrival_s >= horizon_) continue;
        const RunReq& rr = reqs_[i];
        RequestRecord rec;
        rec.id = req.id;
        rec.kind = req.kind;
        rec.arrival_s = req.arrival_s;
        if (rr.first_token_time) rec.ttft_s = *rr.first_token_time - req.arrival_s;
        rec.completed = rr.completed;
        rec.admitted_s = rr.admit_time;
        rec.finish_s = rr.finish_time;
        rec.max_run_tokens = rr.max_run;
        rec.emitted_tokens = static_cast<std::int64_t>(std::floor(rr.emitted + kTokenEps));
        if (rr.phase == Phase::Done) {
            rec.status = rr.status;
        } else if (rr.phase == Phase::Queued) {
            rec.status = "queued";
        } else {
            rec.status = "active";
        }
        timeline.requests.push_back(std::move(rec));
    }
    return timeline;
}

} // namespace

MetricsTimeline run_sim(const SimServerConfig& config, const std::vector<SimRequest>& workload,
                        double horizon_s, double sample_dt_s) {
    Engine engine(config, workload, horizon_s, sample_dt_s);
    return engine.run();
}

void WorkloadConfig::validate() const {
    if (attack_rpm < 0.0 || benign_rps < 0.0) throw ConfigError("workload: rates must be >= 0");
    if (duration_s < 0.0) throw ConfigError("workload: duration must be >= 0");
    if (attack_count < 0) throw ConfigError("workload: attack_count must be >= 0");
    if (attack_prompt_tokens < 1) throw ConfigError("workload: attack_prompt_tokens must be >= 1");
    if (attack_intended_output < 0) {
        throw ConfigError("workload: attack_intended_output must be >= 0");
    }
    if (!(benign_prompt_median > 0.0) || !(benign_output_median > 0.0)) {
        throw ConfigError("workload: benign medians must be > 0");
    }
}

std::vector<SimRequest> generate_workload(const WorkloadConfig& config) {
    config.validate();
    struct Draft {
        double arrival;
        int kind_order; // attack first on ties
        SimRequest req;
    };
    std::vector<Draft> drafts;

    if (config.attack_rpm > 0.0) {
        const double interval = 60.0 / config.attack_rpm;
        for (int k = 0; k < config.attack_count; ++k) {
            const double t = interval * static_cast<double>(k);
            if (t >= config.duration_s) break;
            SimRequest r;
            r.arrival_s = t;
            r.prompt_tokens = config.attack_prompt_tokens;
            r.intended_output = config.attack_intended_output;
            r.kind = RequestKind::Attack;
            r.stream_mode = config.attack_stream_mode;
            r.repeat_period = config.attack_repeat_period;
            drafts.push_back({t, 0, r});
        }
    }

    Rng rng(config.seed);
    if (config.benign_rps > 0.0) {
        double t = rng.next_exponential(config.benign_rps);
        while (t < config.duration_s) {
            SimRequest r;
            r.arrival_s = t;
            r.prompt_tokens = std::max<std::int64_t>(
                1, static_cast<std::int64_t>(std::llround(
                       config.benign_prompt_median *
                       std::exp(config.benign_prompt_sigma * rng.next_normal()))));
            r.intended_output = std::max<std::int64_t>(
                1, static_cast<std::int64_t>(std::llround(
                       config.benign_output_median *
                       std::exp(config.benign_output_sigma * rng.next_normal()))));
            r.kind = RequestKind::Benign;
            r.stream_mode = StreamMode::Diverse;
            drafts.push_back({t, 1, r});
            t += rng.next_exponential(config.benign_rps);
        }
    }

    std::stable_sort(drafts.begin(), drafts.end(), [](const Draft& a, const Draft& b) {
        if (a.arrival != b.arrival) return a.arrival < b.arrival;
        return a.kind_order < b.kind_order;
    });

    std::vector<SimRequest> workload;
    workload.reserve(drafts.size());
    for (std::size_t i = 0; i < drafts.size(); ++i) {
        drafts[i].req.id = static_cast<int>(i);
        workload.push_back(drafts[i].req);
    }
    return workload;
}

} // namespace maxgen
