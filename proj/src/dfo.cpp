#include "maxgen/dfo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <thread>

namespace maxgen {

std::vector<double> log_rank_weights(std::size_t k) {
    std::vector<double> w(k);
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        w[j] = std::log(static_cast<double>(k) + 1.0) - std::log(static_cast<double>(j) + 1.0);
        sum += w[j];
    }
    for (auto& x : w) x /= sum;
    return w;
}

std::vector<double> uniform_weights(std::size_t k) {
    return std::vector<double>(k, 1.0 / static_cast<double>(k));
}

std::vector<double> DfoConfig::effective_weights() const {
    return weights.empty() ? log_rank_weights(top_k) : weights;
}

void DfoConfig::validate() const {
    if (latent_dim == 0) throw ConfigError("dfo: latent_dim must be >= 1");
    if (population == 0) throw ConfigError("dfo: population must be >= 1");
    if (top_k == 0 || top_k > population) {
        throw ConfigError("dfo: need 1 <= top_k <= population");
    }
    if (!(sigma0 > 0.0)) throw ConfigError("dfo: sigma0 must be > 0");
    if (!(epsilon > 0.0)) throw ConfigError("dfo: epsilon must be > 0");
    if (token_budget < 0) throw ConfigError("dfo: token_budget must be >= 0");
    if (parallelism == 0) throw ConfigError("dfo: parallelism must be >= 1");
    if (!weights.empty()) {
        if (weights.size() != top_k) throw ConfigError("dfo: weights length must equal top_k");
        double sum = 0.0;
        for (double w : weights) {
            if (!(w > 0.0)) throw ConfigError("dfo: weights must be positive");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-12) throw ConfigError("dfo: weights must sum to 1");
    }
}

DfoState init_state(const DfoConfig& config) {
    config.validate();
    DfoState state;
    state.mean = Vec(config.latent_dim, 0.0);
    state.covariance = Mat::identity(config.latent_dim, config.sigma0 * config.sigma0);
    state.rng = Rng(config.seed);
    return state;
}

std::vector<LatentVector> sample_population(DfoState& state, const DfoConfig& config) {
    const std::size_t m = config.latent_dim;
    const Mat chol = cholesky(state.covariance);

    std::vector<LatentVector> samples;
    samples.reserve(config.population);
    Vec n(m);
    for (std::size_t i = 0; i < config.population; ++i) {
        for (auto& x : n) x = state.rng.next_normal();
        LatentVector z(state.mean);
        for (std::size_t r = 0; r < m; ++r) {
            double acc = 0.0;
            for (std::size_t c = 0; c <= r; ++c) acc += chol.at(r, c) * n[c];
            z[r] += acc;
        }
        samples.push_back(std::move(z));
    }
    return samples;
}

PipelineEvaluator::PipelineEvaluator(const ProjectionMatrix& matrix, const SurrogateVocab& vocab,
                                     Victim& victim, std::size_t parallelism, bool cache_prompts)
    : matrix_(matrix), vocab_(vocab), victim_(victim),
      parallelism_(parallelism == 0 ? 1 : parallelism), cache_prompts_(cache_prompts) {}

std::int64_t PipelineEvaluator::min_charge() const {
    // One prompt plus at least one output token.
    return static_cast<std::int64_t>(matrix_.prompt_len) + 1;
}

std::vector<EvalResult> PipelineEvaluator::evaluate(const std::vector<LatentVector>& candidates,
                                                    BudgetLedger& ledger) {
    const std::size_t n = candidates.size();
    std::vector<EvalResult> results(n);

    auto run_one = [&](std::size_t i, std::int64_t allowance) {
        EvalResult& res = results[i];
        res.prompt = decode_embedding(project(matrix_, candidates[i]), vocab_);
        if (cache_prompts_) {
            auto it = cache_.find(res.prompt.token_ids);
            if (it != cache_.end()) {
                res.score = it->second;
                return;
            }
        }
        const auto prompt_tokens = static_cast<std::int64_t>(res.prompt.token_ids.size());
        if (allowance < prompt_tokens + 1) {
            res.status = EvalStatus::Skipped;
            res.error = "token budget exhausted";
            return;
        }
        try {
            const QueryOutcome out = victim_.query(res.prompt, allowance - prompt_tokens);
            res.score = out.output_tokens;
            res.charge = prompt_tokens + out.output_tokens;
        } catch (const TransportError& e) {
            res.status = EvalStatus::Failed;
            res.error = e.what();
        }
    };

    if (parallelism_ <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            run_one(i, ledger.remaining());
            ledger.spent += results[i].charge;
        }
    } else {
        // Cache hits are resolved up front (they cost nothing); the rest go
        // out in waves that split the remaining budget evenly.
        std::size_t i = 0;
        while (i < n) {
            const std::size_t wave = std::min(parallelism_, n - i);
            const std::int64_t allowance = ledger.remaining() / static_cast<std::int64_t>(wave);
            std::vector<std::thread> workers;
            workers.reserve(wave);
            for (std::size_t w = 0; w < wave; ++w) {
                workers.emplace_back(run_one, i + w, allowance);
            }
            for (auto& t : workers) t.join();
            for (std::size_t w = 0; w < wave; ++w) ledger.spent += results[i + w].charge;
            i += wave;
        }
    }

    if (cache_prompts_) {
        for (const auto& res : results) {
            if (res.status == EvalStatus::Ok && res.charge > 0) {
                cache_.emplace(res.prompt.token_ids, res.score);
            }
        }
    }
    return results;
}

std::vector<EvalResult> evaluate_candidates(const std::vector<LatentVector>& candidates,
                                            const ProjectionMatrix& matrix,
                                            const SurrogateVocab& vocab, Victim& victim,
                                            BudgetLedger& ledger, std::size_t parallelism) {
    PipelineEvaluator evaluator(matrix, vocab, victim, parallelism);
    return evaluator.evaluate(candidates, ledger);
}

namespace {

// Indices sorted by score descending; equal scores keep the earlier index.
std::vector<std::size_t> rank_by_score(const std::vector<std::int64_t>& scores) {
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return idx;
}

} // namespace

Vec recombine(const std::vector<LatentVector>& candidates, const std::vector<std::int64_t>& scores,
              const DfoConfig& config) {
    if (candidates.size() != scores.size()) {
        throw DimensionError("recombine: candidates/scores length mismatch");
    }
    if (candidates.size() < config.top_k) {
        throw Error("recombine: fewer candidates than top_k");
    }
    const auto weights = config.effective_weights();
    const auto idx = rank_by_score(scores);

    Vec mu(config.latent_dim, 0.0);
    for (std::size_t j = 0; j < config.top_k; ++j) {
        const LatentVector& z = candidates[idx[j]];
        if (z.size() != config.latent_dim) throw DimensionError("recombine: bad candidate length");
        for (std::size_t c = 0; c < mu.size(); ++c) mu[c] += weights[j] * z[c];
    }
    return mu;
}

Mat update_covariance(const std::vector<LatentVector>& selected, const Vec& mu_next,
                      const DfoConfig& config) {
    if (selected.size() != config.top_k) {
        throw DimensionError("update_covariance: expected exactly top_k vectors");
    }
    if (mu_next.size() != config.latent_dim) {
        throw DimensionError("update_covariance: bad mean length");
    }
    const auto weights = config.effective_weights();
    const std::size_t m = config.latent_dim;

    Mat sigma(m, m);
    Vec diff(m);
    for (std::size_t j = 0; j < selected.size(); ++j) {
        const LatentVector& z = selected[j];
        if (z.size() != m) throw DimensionError("update_covariance: bad candidate length");
        for (std::size_t c = 0; c < m; ++c) diff[c] = z[c] - mu_next[c];
        for (std::size_t r = 0; r < m; ++r) {
            const double wr = weights[j] * diff[r];
            for (std::size_t c = 0; c < m; ++c) sigma.at(r, c) += wr * diff[c];
        }
    }
    for (std::size_t d = 0; d < m; ++d) sigma.at(d, d) += config.epsilon;
    return sigma;
}

void PromptPool::insert(const Prompt& prompt, std::int64_t score, std::size_t iteration) {
    for (auto it = entries_.begin(); it != entries_.end(); ++it) {
        if (it->prompt.token_ids == prompt.token_ids) {
            if (score <= it->score) return;
            PoolEntry updated{it->prompt, score, std::min(it->iteration, iteration)};
            entries_.erase(it);
            auto pos = std::lower_bound(
                entries_.begin(), entries_.end(), updated,
                [](const PoolEntry& a, const PoolEntry& b) { return a.score > b.score; });
            entries_.insert(pos, std::move(updated));
            return;
        }
    }
    PoolEntry entry{prompt, score, iteration};
    auto pos =
        std::lower_bound(entries_.begin(), entries_.end(), entry,
                         [](const PoolEntry& a, const PoolEntry& b) { return a.score > b.score; });
    entries_.insert(pos, std::move(entry));
}

std::string to_json_line(const IterationReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "{\"iteration\":%zu,\"best_score\":%lld,\"pool_size\":%zu,"
                  "\"budget_spent\":%lld,\"mean_norm\":%.17g,\"cov_trace\":%.17g}",
                  r.iteration, static_cast<long long>(r.best_score), r.pool_size,
                  static_cast<long long>(r.budget_spent), r.mean_norm, r.cov_trace);
    return buf;
}

IterationReport step_with(DfoState& state, const DfoConfig& config, Evaluator& evaluator,
                          PromptPool& pool) {
    IterationReport report;
    report.iteration = state.iteration;
    report.best_score = state.best ? state.best->score : 0;
    report.pool_size = pool.size();
    report.budget_spent = state.budget_spent;
    report.mean_norm = norm2(state.mean);
    double trace = 0.0;
    for (std::size_t d = 0; d < config.latent_dim; ++d) trace += state.covariance.at(d, d);
    report.cov_trace = trace;

    BudgetLedger ledger{config.token_budget, state.budget_spent};
    if (ledger.remaining() < evaluator.min_charge()) {
        state.budget_exhausted = true;
        report.budget_exhausted = true;
        return report;
    }

    const auto candidates = sample_population(state, config);
    auto results = evaluator.evaluate(candidates, ledger);
    state.budget_spent = ledger.spent;

    std::vector<LatentVector> scored_candidates;
    std::vector<std::int64_t> scores;
    scored_candidates.reserve(results.size());
    scores.reserve(results.size());
    for (std::size_t i = 0; i < results.size(); ++i) {
        const EvalResult& res = results[i];
        switch (res.status) {
        case EvalStatus::Skipped:
            state.budget_exhausted = true;
            break;
        case EvalStatus::Failed:
            ++report.failed;
            ++report.evaluated;
            scored_candidates.push_back(candidates[i]);
            scores.push_back(0);
            break;
        case EvalStatus::Ok:
            ++report.evaluated;
            scored_candidates.push_back(candidates[i]);
            scores.push_back(res.score);
            if (!state.best || res.score > state.best->score) {
                state.best = BestRecord{candidates[i], res.prompt, res.score, state.iteration};
            }
            if (res.score > config.pool_threshold) {
                pool.insert(res.prompt, res.score, state.iteration);
            }
            break;
        }
    }

    if (config.adapt && scored_candidates.size() >= config.top_k) {
        const Vec mu_next = recombine(scored_candidates, scores, config);
        const auto idx = rank_by_score(scores);
        std::vector<LatentVector> selected;
        selected.reserve(config.top_k);
        for (std::size_t j = 0; j < config.top_k; ++j) {
            selected.push_back(scored_candidates[idx[j]]);
        }
        state.covariance = update_covariance(selected, mu_next, config);
        state.mean = mu_next;
    }

    state.iteration += 1;
    report.iteration = state.iteration;
    report.best_score = state.best ? state.best->score : 0;
    report.pool_size = pool.size();
    report.budget_spent = state.budget_spent;
    report.mean_norm = norm2(state.mean);
    trace = 0.0;
    for (std::size_t d = 0; d < config.latent_dim; ++d) trace += state.covariance.at(d, d);
    report.cov_trace = trace;
    report.budget_exhausted = state.budget_exhausted;
    return report;
}

IterationReport step(DfoState& state, const DfoConfig& config, const ProjectionMatrix& matrix,
                     const SurrogateVocab& vocab, Victim& victim, PromptPool& pool) {
    PipelineEvaluator evaluator(matrix, vocab, victim, config.parallelism, false);
    return step_with(state, config, evaluator, pool);
}

PromptPool optimize_with(const DfoConfig& config, Evaluator& evaluator,
                         std::vector<IterationReport>* reports, DfoState* final_state) {
    config.validate();
    DfoState state = init_state(config);
    PromptPool pool;

    while (state.iteration < config.max_iterations && !state.budget_exhausted) {
        BudgetLedger probe{config.token_budget, state.budget_spent};
        if (probe.remaining() < evaluator.min_charge()) {
            state.budget_exhausted = true;
            break;
        }
        const IterationReport report = step_with(state, config, evaluator, pool);
        if (reports) reports->push_back(report);
        if (report.evaluated > 0 && report.failed == report.evaluated) {
            if (final_state) *final_state = state;
            throw TransportError("optimize: every candidate of iteration " +
                                 std::to_string(report.iteration) + " failed");
        }
    }

    if (state.best) {
        pool.insert(state.best->prompt, state.best->score, state.best->iteration);
    }
    if (final_state) *final_state = state;
    return pool;
}

PromptPool optimize(const DfoConfig& config, const ProjectionMatrix& matrix,
                    const SurrogateVocab& vocab, Victim& victim,
                    std::vector<IterationReport>* reports, DfoState* final_state) {
    PipelineEvaluator evaluator(matrix, vocab, victim, config.parallelism, config.cache_prompts);
    return optimize_with(config, evaluator, reports, final_state);
}

} // namespace maxgen
