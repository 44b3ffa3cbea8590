#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "maxgen/dfo.hpp"
#include "maxgen/fixture.hpp"
#include "maxgen/remote_victim.hpp"
#include "maxgen/sim.hpp"

namespace maxgen {

// Options shared by the CLI commands. Exit codes: 0 success, 2 config error,
// 3 victim failure, 4 safety refusal.
struct CliOptions {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed; // overrides the config seed
    bool enable_remote = false;        // gate for any network victim
    int jobs = 1;                      // sweep parallelism
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitVictim = 3;
inline constexpr int kExitSafety = 4;

// Runs the search described by the config; writes pool.json,
// iterations.jsonl, summary.json and a config snapshot into out_dir.
int cmd_optimize(const CliOptions& options);

// Runs the scenario (or its output-cap sweep); writes requests.csv,
// timeseries.csv and summary.json per run.
int cmd_simulate(const CliOptions& options);

// Runs the scenario once per defense variant on the same workload and
// writes comparison.csv plus per-variant result directories.
int cmd_defend_eval(const CliOptions& options);

struct FixtureCliOptions {
    std::string out_dir;
    std::uint64_t projection_seed = 7;
    std::uint64_t vocab_seed = 17;
    std::uint32_t vocab_size = 4096;
    std::size_t prompt_len = 20;
    std::size_t embed_dim = 20;
    std::size_t latent_dim = 20;
};

// Writes fixture.svec plus a ready-to-run quickstart.json optimize config.
int cmd_make_fixture(const FixtureCliOptions& options);

// Percentile by nearest rank on a copy of values (p in [0, 1]).
double percentile(std::vector<double> values, double p);

// Summary statistics of one simulation run, as written to summary.json.
// TTFT of requests that never produced a token is censored at
// horizon - arrival so stalled requests weigh into the percentiles.
struct SimSummary {
    double benign_p50_ttft_s = 0.0;
    double benign_p95_ttft_s = 0.0;
    std::vector<double> benign_p95_ttft_quarters; // by arrival quarter
    double attack_p50_ttft_s = 0.0;
    double attack_p95_ttft_s = 0.0;
    std::int64_t benign_count = 0;
    std::int64_t attack_count = 0;
    std::int64_t completed = 0;
    std::int64_t failed_oom = 0;
    std::int64_t terminated_detector = 0;
    std::int64_t censored_ttft = 0;
    double peak_mem_bytes = 0.0;
    double server_tps = 0.0; // total emitted tokens / horizon
    std::int64_t attack_tokens_emitted = 0;
    double attack_max_run_tokens = 0.0;    // longest uninterrupted attack decode run
    std::optional<double> first_oom_s;     // earliest out-of-memory failure
    std::int64_t attacks_admitted_at_first_oom = 0;
};

SimSummary summarize_sim(const MetricsTimeline& timeline, double horizon_s);

void write_requests_csv(const MetricsTimeline& timeline, const std::string& path);
void write_timeseries_csv(const MetricsTimeline& timeline, int devices, const std::string& path);

} // namespace maxgen
