#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "maxgen/linalg.hpp"
#include "maxgen/projection.hpp"
#include "maxgen/rng.hpp"
#include "maxgen/victim.hpp"
#include "maxgen/vocab.hpp"

namespace maxgen {

std::vector<double> log_rank_weights(std::size_t k);
std::vector<double> uniform_weights(std::size_t k);

// Search hyperparameters. weights left empty selects log-rank weights.
struct DfoConfig {
    std::size_t latent_dim = 20;
    std::size_t population = 16; // candidates per iteration
    std::size_t top_k = 8;
    std::vector<double> weights;
    double sigma0 = 1.0;
    double epsilon = 1e-3;
    std::int64_t token_budget = 10000; // prompt + output tokens chargeable to the search
    std::size_t max_iterations = 200;
    std::uint64_t seed = 0;
    std::int64_t pool_threshold = 0; // keep prompts scoring strictly above this
    bool adapt = true;               // false: frozen distribution (random-search ablation)
    std::size_t parallelism = 1;     // concurrent victim queries per wave
    bool cache_prompts = false;      // reuse scores of prompts from earlier iterations

    // Returns the effective recombination weights (validated).
    std::vector<double> effective_weights() const;
    void validate() const;
};

struct BudgetLedger {
    std::int64_t limit = 0;
    std::int64_t spent = 0;
    std::int64_t remaining() const { return limit > spent ? limit - spent : 0; }
};

enum class EvalStatus : std::uint8_t {
    Ok,
    Failed,  // victim transport failure; scored 0
    Skipped, // budget exhausted before this candidate; not scored
};

struct EvalResult {
    Prompt prompt;
    std::int64_t score = 0;
    std::int64_t charge = 0;
    EvalStatus status = EvalStatus::Ok;
    std::string error;
};

// Scores batches of latent candidates under a budget. The production
// implementation runs projection -> nearest-neighbor decoding -> victim
// query; tests may substitute analytic landscapes.
class Evaluator {
public:
    virtual ~Evaluator() = default;
    virtual std::vector<EvalResult> evaluate(const std::vector<LatentVector>& candidates,
                                             BudgetLedger& ledger) = 0;
    // Smallest remaining budget for which one evaluation is still possible.
    virtual std::int64_t min_charge() const = 0;
};

// project -> decode -> query. Queries are capped at the remaining budget
// minus the prompt length, so the ledger can never overrun its limit.
// With parallelism > 1 candidates are dispatched in waves and each wave
// splits the remaining budget evenly across its members; scores are always
// assigned back by candidate index.
class PipelineEvaluator : public Evaluator {
public:
    PipelineEvaluator(const ProjectionMatrix& matrix, const SurrogateVocab& vocab, Victim& victim,
                      std::size_t parallelism = 1, bool cache_prompts = false);

    std::vector<EvalResult> evaluate(const std::vector<LatentVector>& candidates,
                                     BudgetLedger& ledger) override;
    std::int64_t min_charge() const override;

private:
    const ProjectionMatrix& matrix_;
    const SurrogateVocab& vocab_;
    Victim& victim_;
    std::size_t parallelism_;
    bool cache_prompts_;
    std::map<std::vector<std::uint32_t>, std::int64_t> cache_;
};

struct BestRecord {
    LatentVector latent;
    Prompt prompt;
    std::int64_t score = 0;
    std::size_t iteration = 0;
};

// Search distribution plus bookkeeping. Copyable; a copy reproduces the
// exact same future (the generator state travels with it).
struct DfoState {
    Vec mean;
    Mat covariance;
    std::size_t iteration = 0;
    std::int64_t budget_spent = 0;
    std::optional<BestRecord> best;
    Rng rng{0};
    bool budget_exhausted = false;
};

struct PoolEntry {
    Prompt prompt;
    std::int64_t score = 0;
    std::size_t iteration = 0;
};

// Distinct prompts worth keeping, sorted by score descending. A prompt seen
// again keeps its best score and earliest iteration.
class PromptPool {
public:
    void insert(const Prompt& prompt, std::int64_t score, std::size_t iteration);
    const std::vector<PoolEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    std::int64_t best_score() const { return entries_.empty() ? 0 : entries_.front().score; }

private:
    std::vector<PoolEntry> entries_;
};

struct IterationReport {
    std::size_t iteration = 0;
    std::int64_t best_score = 0;
    std::size_t pool_size = 0;
    std::int64_t budget_spent = 0;
    double mean_norm = 0.0;
    double cov_trace = 0.0;
    std::size_t evaluated = 0;
    std::size_t failed = 0;
    bool budget_exhausted = false;
};

// One line-delimited JSON record for the iteration log.
std::string to_json_line(const IterationReport& report);

// mu = 0, Sigma = sigma0^2 * I, fresh generator from config.seed.
DfoState init_state(const DfoConfig& config);

// N draws from N(mean, covariance) advancing the state's generator.
// The covariance factorization is recomputed on every call.
std::vector<LatentVector> sample_population(DfoState& state, const DfoConfig& config);

// Scores candidates through the full pipeline, charging the ledger.
std::vector<EvalResult> evaluate_candidates(const std::vector<LatentVector>& candidates,
                                            const ProjectionMatrix& matrix,
                                            const SurrogateVocab& vocab, Victim& victim,
                                            BudgetLedger& ledger, std::size_t parallelism = 1);

// Weighted mean of the top_k candidates by score (ties: earlier index).
// Throws DimensionError on length mismatch and Error if fewer than top_k
// candidates are available.
Vec recombine(const std::vector<LatentVector>& candidates, const std::vector<std::int64_t>& scores,
              const DfoConfig& config);

// Weighted outer-product spread of the selected candidates around mu_next,
// regularized with epsilon * I.
Mat update_covariance(const std::vector<LatentVector>& selected, const Vec& mu_next,
                      const DfoConfig& config);

// One full iteration against an arbitrary evaluator.
IterationReport step_with(DfoState& state, const DfoConfig& config, Evaluator& evaluator,
                          PromptPool& pool);

// One full iteration of the production pipeline.
IterationReport step(DfoState& state, const DfoConfig& config, const ProjectionMatrix& matrix,
                     const SurrogateVocab& vocab, Victim& victim, PromptPool& pool);

// Runs step_with until the budget or iteration cap is hit. The best prompt
// found is always a pool member at return. Throws TransportError if every
// candidate of an iteration failed.
PromptPool optimize_with(const DfoConfig& config, Evaluator& evaluator,
                         std::vector<IterationReport>* reports = nullptr,
                         DfoState* final_state = nullptr);

// Full-pipeline optimize per the module contract.
PromptPool optimize(const DfoConfig& config, const ProjectionMatrix& matrix,
                    const SurrogateVocab& vocab, Victim& victim,
                    std::vector<IterationReport>* reports = nullptr,
                    DfoState* final_state = nullptr);

} // namespace maxgen
