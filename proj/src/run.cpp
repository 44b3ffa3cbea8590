#include "maxgen/run.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace maxgen {

namespace {

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    try {
        json j;
        in >> j;
        return j;
    } catch (const std::exception& e) {
        throw ConfigError("config parse error in '" + path + "': " + e.what());
    }
}

template <typename T>
T require_key(const json& j, const std::string& key) {
    if (!j.contains(key)) throw ConfigError("config missing key '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

template <typename T>
T get_or(const json& j, const std::string& key, T def) {
    if (!j.contains(key)) return def;
    try {
        return j.at(key).get<T>();
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

void check_mode(const json& cfg, const std::string& expected) {
    const auto mode = require_key<std::string>(cfg, "mode");
    if (mode != expected) {
        throw ConfigError("config mode is '" + mode + "' but the command expects '" + expected +
                          "'");
    }
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write '" + path.string() + "'");
    f << content;
}

void snapshot_config(const std::string& config_path, const fs::path& out_dir) {
    std::ifstream in(config_path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    write_text(out_dir / "config.json", bytes);
}

std::string resolve_path(const std::string& config_path, const std::string& ref) {
    fs::path p(ref);
    if (p.is_absolute()) return ref;
    return (fs::path(config_path).parent_path() / p).string();
}

StreamMode parse_stream_mode(const std::string& s) {
    if (s == "repetitive") return StreamMode::Repetitive;
    if (s == "diverse") return StreamMode::Diverse;
    throw ConfigError("unknown stream_mode '" + s + "'");
}

DfoConfig parse_dfo(const json& j, std::size_t latent_dim) {
    DfoConfig c;
    c.latent_dim = latent_dim;
    c.population = get_or<std::size_t>(j, "population", c.population);
    c.top_k = get_or<std::size_t>(j, "top_k", c.top_k);
    c.sigma0 = get_or<double>(j, "sigma0", c.sigma0);
    c.epsilon = get_or<double>(j, "epsilon", c.epsilon);
    c.token_budget = get_or<std::int64_t>(j, "token_budget", c.token_budget);
    c.max_iterations = get_or<std::size_t>(j, "max_iterations", c.max_iterations);
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
    c.pool_threshold = get_or<std::int64_t>(j, "pool_threshold", c.pool_threshold);
    c.adapt = get_or<bool>(j, "adapt", c.adapt);
    c.parallelism = get_or<std::size_t>(j, "parallelism", c.parallelism);
    c.cache_prompts = get_or<bool>(j, "cache_prompts", c.cache_prompts);
    if (j.contains("weights")) {
        const json& w = j.at("weights");
        if (w.is_string()) {
            const auto s = w.get<std::string>();
            if (s == "log-rank") {
                c.weights.clear();
            } else if (s == "uniform") {
                c.weights = uniform_weights(c.top_k);
            } else {
                throw ConfigError("unknown weights scheme '" + s + "'");
            }
        } else if (w.is_array()) {
            c.weights = w.get<std::vector<double>>();
        } else {
            throw ConfigError("weights must be a scheme name or an array");
        }
    }
    c.validate();
    return c;
}

SyntheticVictimConfig parse_synthetic(const json& j) {
    SyntheticVictimConfig c;
    c.cap = get_or<std::int64_t>(j, "cap", c.cap);
    c.planted_tokens = get_or<std::vector<std::uint32_t>>(j, "planted_tokens", {});
    c.base_len = get_or<std::int64_t>(j, "base_len", c.base_len);
    c.gain = get_or<std::int64_t>(j, "gain", c.gain);
    c.loop_threshold = get_or<int>(j, "loop_threshold", c.loop_threshold);
    c.repeat_period = get_or<int>(j, "repeat_period", c.repeat_period);
    c.stream_mode = parse_stream_mode(get_or<std::string>(j, "stream_mode", "diverse"));
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
    return c;
}

RemoteVictimConfig parse_remote(const json& j) {
    RemoteVictimConfig c;
    c.base_url = require_key<std::string>(j, "base_url");
    c.path = get_or<std::string>(j, "path", c.path);
    c.model = require_key<std::string>(j, "model");
    c.auth_env = get_or<std::string>(j, "auth_env", "");
    c.temperature = get_or<double>(j, "temperature", c.temperature);
    c.min_interval_s = get_or<double>(j, "min_interval_s", c.min_interval_s);
    c.max_retries = get_or<int>(j, "max_retries", c.max_retries);
    return c;
}

SimServerConfig parse_server(const json& j) {
    SimServerConfig c;
    c.devices = get_or<int>(j, "devices", c.devices);
    c.prefill_rate = get_or<double>(j, "prefill_rate", c.prefill_rate);
    c.decode_rate = get_or<double>(j, "decode_rate", c.decode_rate);
    c.batch_slots = get_or<int>(j, "batch_slots", c.batch_slots);
    c.mem_capacity = get_or<double>(j, "mem_capacity", c.mem_capacity);
    c.kv_bytes_per_token = get_or<double>(j, "kv_bytes_per_token", c.kv_bytes_per_token);
    c.baseline_mem = get_or<double>(j, "baseline_mem", c.baseline_mem);
    c.output_cap = get_or<std::int64_t>(j, "output_cap", c.output_cap);
    const auto sched = get_or<std::string>(j, "scheduler", "fifo");
    if (sched == "fifo") {
        c.scheduler = SchedulerKind::Fifo;
    } else if (sched == "vtc") {
        c.scheduler = SchedulerKind::Vtc;
    } else {
        throw ConfigError("unknown scheduler '" + sched + "'");
    }
    c.vtc_quantum = get_or<std::int64_t>(j, "vtc_quantum", c.vtc_quantum);
    c.evict_on_preempt = get_or<bool>(j, "evict_on_preempt", c.evict_on_preempt);
    const auto det = get_or<std::string>(j, "detector", "off");
    if (det == "off") {
        c.detector = DetectorKind::Off;
    } else if (det == "ngram") {
        c.detector = DetectorKind::Ngram;
    } else {
        throw ConfigError("unknown detector '" + det + "'");
    }
    c.detector_overhead = get_or<double>(j, "detector_overhead", c.detector_overhead);
    if (j.contains("detector_config")) {
        const json& d = j.at("detector_config");
        c.detector_config.n = get_or<std::size_t>(d, "n", c.detector_config.n);
        c.detector_config.window = get_or<std::size_t>(d, "window", c.detector_config.window);
        c.detector_config.threshold = get_or<int>(d, "threshold", c.detector_config.threshold);
    }
    c.validate();
    return c;
}

WorkloadConfig parse_workload(const json& j) {
    WorkloadConfig c;
    c.attack_rpm = get_or<double>(j, "attack_rpm", c.attack_rpm);
    c.benign_rps = get_or<double>(j, "benign_rps", c.benign_rps);
    c.duration_s = get_or<double>(j, "duration_s", c.duration_s);
    c.attack_count = get_or<int>(j, "attack_count", c.attack_count);
    c.attack_prompt_tokens = get_or<std::int64_t>(j, "attack_prompt_tokens", c.attack_prompt_tokens);
    c.attack_intended_output =
        get_or<std::int64_t>(j, "attack_intended_output", c.attack_intended_output);
    c.attack_stream_mode =
        parse_stream_mode(get_or<std::string>(j, "attack_stream_mode", "diverse"));
    c.attack_repeat_period = get_or<int>(j, "attack_repeat_period", c.attack_repeat_period);
    c.benign_prompt_median = get_or<double>(j, "benign_prompt_median", c.benign_prompt_median);
    c.benign_prompt_sigma = get_or<double>(j, "benign_prompt_sigma", c.benign_prompt_sigma);
    c.benign_output_median = get_or<double>(j, "benign_output_median", c.benign_output_median);
    c.benign_output_sigma = get_or<double>(j, "benign_output_sigma", c.benign_output_sigma);
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
    c.validate();
    return c;
}

std::string fmt_double(double v, const char* spec = "%.6f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

int run_guarded(const std::function<void()>& body) {
    try {
        body();
        return kExitOk;
    } catch (const SafetyError& e) {
        std::cerr << "safety refusal: " << e.what() << "\n";
        return kExitSafety;
    } catch (const TransportError& e) {
        std::cerr << "victim failure: " << e.what() << "\n";
        return kExitVictim;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
}

} // namespace

double percentile(std::vector<double> values, double p) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const double rank = p * static_cast<double>(values.size());
    auto idx = static_cast<std::size_t>(std::ceil(rank));
    if (idx > 0) --idx;
    if (idx >= values.size()) idx = values.size() - 1;
    return values[idx];
}

SimSummary summarize_sim(const MetricsTimeline& timeline, double horizon_s) {
    SimSummary s;
    std::vector<double> benign_ttft;
    std::vector<double> attack_ttft;
    std::vector<std::vector<double>> benign_quarters(4);
    double total_emitted = 0.0;

    for (const auto& r : timeline.requests) {
        double ttft;
        if (r.ttft_s) {
            ttft = *r.ttft_s;
        } else {
            ttft = horizon_s - r.arrival_s; // censored: never served by horizon
            ++s.censored_ttft;
        }
        if (r.kind == RequestKind::Benign) {
            ++s.benign_count;
            benign_ttft.push_back(ttft);
            if (horizon_s > 0.0) {
                auto q = static_cast<std::size_t>(r.arrival_s / (horizon_s / 4.0));
                benign_quarters[std::min<std::size_t>(q, 3)].push_back(ttft);
            }
        } else {
            ++s.attack_count;
            attack_ttft.push_back(ttft);
            s.attack_tokens_emitted += r.emitted_tokens;
            s.attack_max_run_tokens = std::max(s.attack_max_run_tokens, r.max_run_tokens);
        }
        total_emitted += static_cast<double>(r.emitted_tokens);
        if (r.completed) ++s.completed;
        if (r.status == "failed_oom") {
            ++s.failed_oom;
            if (r.finish_s && (!s.first_oom_s || *r.finish_s < *s.first_oom_s)) {
                s.first_oom_s = *r.finish_s;
            }
        }
        if (r.status == "terminated_detector") ++s.terminated_detector;
    }
    if (s.first_oom_s) {
        for (const auto& r : timeline.requests) {
            if (r.kind == RequestKind::Attack && r.admitted_s &&
                *r.admitted_s <= *s.first_oom_s) {
                ++s.attacks_admitted_at_first_oom;
            }
        }
    }

    s.benign_p50_ttft_s = percentile(benign_ttft, 0.50);
    s.benign_p95_ttft_s = percentile(benign_ttft, 0.95);
    s.attack_p50_ttft_s = percentile(attack_ttft, 0.50);
    s.attack_p95_ttft_s = percentile(attack_ttft, 0.95);
    for (auto& q : benign_quarters) {
        s.benign_p95_ttft_quarters.push_back(percentile(q, 0.95));
    }
    for (const auto& sample : timeline.samples) {
        for (double m : sample.mem_bytes) s.peak_mem_bytes = std::max(s.peak_mem_bytes, m);
    }
    s.server_tps = horizon_s > 0.0 ? total_emitted / horizon_s : 0.0;
    return s;
}

void write_requests_csv(const MetricsTimeline& timeline, const std::string& path) {
    std::ostringstream out;
    out << "id,kind,arrival_s,ttft_s,emitted_tokens,status\n";
    for (const auto& r : timeline.requests) {
        out << r.id << ',' << (r.kind == RequestKind::Attack ? "attack" : "benign") << ','
            << fmt_double(r.arrival_s) << ',';
        if (r.ttft_s) out << fmt_double(*r.ttft_s);
        out << ',' << r.emitted_tokens << ',' << r.status << '\n';
    }
    write_text(path, out.str());
}

void write_timeseries_csv(const MetricsTimeline& timeline, int devices, const std::string& path) {
    std::ostringstream out;
    out << "t_s,tps";
    for (int d = 0; d < devices; ++d) out << ",mem_dev" << d;
    out << ",queue_len\n";
    for (const auto& s : timeline.samples) {
        out << fmt_double(s.t_s) << ',' << fmt_double(s.tps);
        for (double m : s.mem_bytes) out << ',' << fmt_double(m, "%.0f");
        out << ',' << s.queue_len << '\n';
    }
    write_text(path, out.str());
}

namespace {

json summary_to_json(const SimSummary& s) {
    json j{
        {"benign_p50_ttft_s", s.benign_p50_ttft_s},
        {"benign_p95_ttft_s", s.benign_p95_ttft_s},
        {"benign_p95_ttft_quarters", s.benign_p95_ttft_quarters},
        {"attack_p50_ttft_s", s.attack_p50_ttft_s},
        {"attack_p95_ttft_s", s.attack_p95_ttft_s},
        {"benign_count", s.benign_count},
        {"attack_count", s.attack_count},
        {"completed", s.completed},
        {"failed_oom", s.failed_oom},
        {"terminated_detector", s.terminated_detector},
        {"censored_ttft", s.censored_ttft},
        {"peak_mem_bytes", s.peak_mem_bytes},
        {"server_tps", s.server_tps},
        {"attack_tokens_emitted", s.attack_tokens_emitted},
        {"attack_max_run_tokens", s.attack_max_run_tokens},
        {"attacks_admitted_at_first_oom", s.attacks_admitted_at_first_oom},
    };
    if (s.first_oom_s) {
        j["first_oom_s"] = *s.first_oom_s;
    } else {
        j["first_oom_s"] = nullptr;
    }
    return j;
}

void write_sim_outputs(const SimServerConfig& server, const MetricsTimeline& timeline,
                       double horizon_s, const fs::path& dir) {
    fs::create_directories(dir);
    write_requests_csv(timeline, (dir / "requests.csv").string());
    write_timeseries_csv(timeline, server.devices, (dir / "timeseries.csv").string());
    const SimSummary summary = summarize_sim(timeline, horizon_s);
    write_text(dir / "summary.json", summary_to_json(summary).dump(2) + "\n");
}

} // namespace

int cmd_optimize(const CliOptions& options) {
    return run_guarded([&] {
        const json cfg = load_json(options.config_path);
        check_mode(cfg, "optimize");

        const json pj = require_key<json>(cfg, "projection");
        const ProjectionMatrix matrix = build_projection_matrix(
            require_key<std::uint64_t>(pj, "seed"), require_key<std::size_t>(pj, "prompt_len"),
            require_key<std::size_t>(pj, "embed_dim"), require_key<std::size_t>(pj, "latent_dim"));

        const std::string vocab_path =
            resolve_path(options.config_path, require_key<std::string>(cfg, "vocab"));
        const SurrogateVocab vocab = load_vocab(vocab_path);
        if (vocab.embed_dim() != matrix.embed_dim) {
            throw ConfigError("vocab embed dim " + std::to_string(vocab.embed_dim()) +
                              " does not match projection embed dim " +
                              std::to_string(matrix.embed_dim));
        }

        DfoConfig dfo = parse_dfo(require_key<json>(cfg, "dfo"), matrix.latent_dim);
        if (options.seed) dfo.seed = *options.seed;

        const json vj = require_key<json>(cfg, "victim");
        const auto type = require_key<std::string>(vj, "type");
        std::unique_ptr<Victim> victim;
        if (type == "synthetic") {
            victim = std::make_unique<SyntheticVictim>(parse_synthetic(vj));
        } else if (type == "remote") {
            if (!options.enable_remote) {
                throw SafetyError("config selects a remote victim; re-run with --enable-remote");
            }
            RemoteVictimConfig rc = parse_remote(vj);
            rc.enabled = true;
            victim = std::make_unique<RemoteVictim>(rc);
        } else {
            throw ConfigError("unknown victim type '" + type + "'");
        }

        std::vector<IterationReport> reports;
        DfoState final_state;
        const PromptPool pool = optimize(dfo, matrix, vocab, *victim, &reports, &final_state);

        fs::create_directories(options.out_dir);
        snapshot_config(options.config_path, options.out_dir);

        std::ostringstream log;
        for (const auto& r : reports) log << to_json_line(r) << '\n';
        write_text(fs::path(options.out_dir) / "iterations.jsonl", log.str());

        json pool_json;
        pool_json["entries"] = json::array();
        for (const auto& e : pool.entries()) {
            pool_json["entries"].push_back(json{{"iteration", e.iteration},
                                                {"score", e.score},
                                                {"text", e.prompt.text},
                                                {"token_ids", e.prompt.token_ids}});
        }
        write_text(fs::path(options.out_dir) / "pool.json", pool_json.dump(2) + "\n");

        json summary{
            {"mode", "optimize"},
            {"best_score", final_state.best ? final_state.best->score : 0},
            {"best_text", final_state.best ? final_state.best->prompt.text : ""},
            {"budget_spent", final_state.budget_spent},
            {"token_budget", dfo.token_budget},
            {"iterations", final_state.iteration},
            {"pool_size", pool.size()},
            {"seed", dfo.seed},
        };
        write_text(fs::path(options.out_dir) / "summary.json", summary.dump(2) + "\n");
    });
}

int cmd_simulate(const CliOptions& options) {
    return run_guarded([&] {
        const json cfg = load_json(options.config_path);
        check_mode(cfg, "simulate");

        const SimServerConfig server = parse_server(require_key<json>(cfg, "server"));
        WorkloadConfig wl = parse_workload(require_key<json>(cfg, "workload"));
        if (options.seed) wl.seed = *options.seed;
        const auto horizon = require_key<double>(cfg, "horizon_s");
        const auto dt = require_key<double>(cfg, "sample_dt_s");
        const auto workload = generate_workload(wl);

        fs::create_directories(options.out_dir);
        snapshot_config(options.config_path, options.out_dir);

        const auto sweep = get_or<std::vector<std::int64_t>>(cfg, "output_cap_sweep", {});
        if (sweep.empty()) {
            const MetricsTimeline timeline = run_sim(server, workload, horizon, dt);
            write_sim_outputs(server, timeline, horizon, options.out_dir);
            return;
        }

        const int jobs = std::max(1, options.jobs);
        std::vector<std::thread> workers;
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(sweep.size());
        auto worker = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= sweep.size()) return;
                try {
                    SimServerConfig variant = server;
                    variant.output_cap = sweep[i];
                    const MetricsTimeline timeline = run_sim(variant, workload, horizon, dt);
                    const fs::path dir =
                        fs::path(options.out_dir) / ("cap_" + std::to_string(sweep[i]));
                    write_sim_outputs(variant, timeline, horizon, dir);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        };
        for (int j = 0; j < jobs; ++j) workers.emplace_back(worker);
        for (auto& w : workers) w.join();
        for (const auto& err : errors) {
            if (err) std::rethrow_exception(err);
        }
    });
}

int cmd_defend_eval(const CliOptions& options) {
    return run_guarded([&] {
        const json cfg = load_json(options.config_path);
        check_mode(cfg, "defend-eval");

        const SimServerConfig base = parse_server(require_key<json>(cfg, "server"));
        WorkloadConfig wl = parse_workload(require_key<json>(cfg, "workload"));
        if (options.seed) wl.seed = *options.seed;
        const auto horizon = require_key<double>(cfg, "horizon_s");
        const auto dt = require_key<double>(cfg, "sample_dt_s");
        const auto workload = generate_workload(wl);

        const auto variants = get_or<std::vector<std::string>>(
            cfg, "variants", {"none", "detector", "vtc"});

        fs::create_directories(options.out_dir);
        snapshot_config(options.config_path, options.out_dir);

        std::vector<SimServerConfig> servers;
        for (const auto& name : variants) {
            SimServerConfig server = base;
            if (name == "none") {
                server.scheduler = SchedulerKind::Fifo;
                server.detector = DetectorKind::Off;
            } else if (name == "detector") {
                server.scheduler = SchedulerKind::Fifo;
                server.detector = DetectorKind::Ngram;
            } else if (name == "vtc") {
                server.scheduler = SchedulerKind::Vtc;
                server.detector = DetectorKind::Off;
            } else {
                throw ConfigError("unknown defense variant '" + name + "'");
            }
            servers.push_back(server);
        }

        std::vector<SimSummary> summaries(variants.size());
        const int jobs = std::max(1, options.jobs);
        std::vector<std::thread> workers;
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(variants.size());
        auto worker = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= variants.size()) return;
                try {
                    const MetricsTimeline timeline = run_sim(servers[i], workload, horizon, dt);
                    write_sim_outputs(servers[i], timeline, horizon,
                                      fs::path(options.out_dir) / variants[i]);
                    summaries[i] = summarize_sim(timeline, horizon);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        };
        for (int j = 0; j < jobs; ++j) workers.emplace_back(worker);
        for (auto& w : workers) w.join();
        for (const auto& err : errors) {
            if (err) std::rethrow_exception(err);
        }

        std::ostringstream table;
        table << "variant,benign_p95_ttft_s,server_tps,attack_tokens_emitted\n";
        for (std::size_t i = 0; i < variants.size(); ++i) {
            table << variants[i] << ',' << fmt_double(summaries[i].benign_p95_ttft_s) << ','
                  << fmt_double(summaries[i].server_tps) << ','
                  << summaries[i].attack_tokens_emitted << '\n';
        }
        write_text(fs::path(options.out_dir) / "comparison.csv", table.str());
    });
}

int cmd_make_fixture(const FixtureCliOptions& options) {
    return run_guarded([&] {
        const ProjectionMatrix matrix =
            build_projection_matrix(options.projection_seed, options.prompt_len,
                                    options.embed_dim, options.latent_dim);
        FixtureConfig fc;
        fc.vocab_seed = options.vocab_seed;
        fc.vocab_size = options.vocab_size;
        const PlantedFixture fixture = build_planted_fixture(matrix, fc);

        fs::create_directories(options.out_dir);
        save_vocab(fixture.vocab, (fs::path(options.out_dir) / "fixture.svec").string());

        json quickstart{
            {"mode", "optimize"},
            {"vocab", "fixture.svec"},
            {"projection",
             {{"seed", options.projection_seed},
              {"prompt_len", options.prompt_len},
              {"embed_dim", options.embed_dim},
              {"latent_dim", options.latent_dim}}},
            {"dfo",
             {{"population", 16},
              {"top_k", 8},
              {"weights", "log-rank"},
              {"sigma0", 1.0},
              {"epsilon", 1e-3},
              {"token_budget", 10000},
              {"max_iterations", 200},
              {"seed", 1},
              {"pool_threshold", 0}}},
            {"victim",
             {{"type", "synthetic"},
              {"cap", fixture.victim.cap},
              {"planted_tokens", fixture.victim.planted_tokens},
              {"base_len", fixture.victim.base_len},
              {"gain", fixture.victim.gain},
              {"loop_threshold", fixture.victim.loop_threshold},
              {"repeat_period", fixture.victim.repeat_period},
              {"stream_mode", "diverse"},
              {"seed", fixture.victim.seed}}},
        };
        write_text(fs::path(options.out_dir) / "quickstart.json", quickstart.dump(2) + "\n");
    });
}

} // namespace maxgen
