#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "maxgen/dfo.hpp"
#include "maxgen/fixture.hpp"
#include "maxgen/rng.hpp"

using namespace maxgen;

namespace {

DfoConfig basic_config(std::size_t m, double sigma = 1.0) {
    DfoConfig c;
    c.latent_dim = m;
    c.sigma0 = sigma;
    return c;
}

// Scores candidates by a known landscape peaking at `target`; used in place
// of a victim so convergence can be checked against ground truth.
class AnalyticEvaluator : public Evaluator {
public:
    explicit AnalyticEvaluator(Vec target, double scale = 4096.0)
        : target_(std::move(target)), scale_(scale) {}

    std::vector<EvalResult> evaluate(const std::vector<LatentVector>& candidates,
                                     BudgetLedger& ledger) override {
        std::vector<EvalResult> results(candidates.size());
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (ledger.remaining() < 1) {
                results[i].status = EvalStatus::Skipped;
                continue;
            }
            double d2 = 0.0;
            for (std::size_t c = 0; c < target_.size(); ++c) {
                const double d = candidates[i][c] - target_[c];
                d2 += d * d;
            }
            results[i].score = std::llround(scale_ * std::exp(-d2));
            results[i].charge = 1;
            results[i].prompt.token_ids = {0};
            ledger.spent += 1;
        }
        return results;
    }

    std::int64_t min_charge() const override { return 1; }

private:
    Vec target_;
    double scale_;
};

// Independent recombination oracle: sort (score, index) pairs, then dot the
// ranked candidates with the weights.
Vec recombine_oracle(const std::vector<LatentVector>& candidates,
                     const std::vector<std::int64_t>& scores, const std::vector<double>& weights,
                     std::size_t k, std::size_t m) {
    std::vector<std::pair<std::int64_t, std::size_t>> ranked;
    for (std::size_t i = 0; i < scores.size(); ++i) ranked.emplace_back(scores[i], i);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    Vec mu(m, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t c = 0; c < m; ++c) mu[c] += weights[j] * candidates[ranked[j].second][c];
    }
    return mu;
}

} // namespace

TEST_CASE("init_state builds the isotropic distribution") {
    auto c = basic_config(3, 2.0);
    const auto s = init_state(c);
    CHECK(s.mean == Vec{0.0, 0.0, 0.0});
    CHECK(s.iteration == 0);
    CHECK(s.budget_spent == 0);
    CHECK_FALSE(s.best.has_value());
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(s.covariance.at(i, j) == (i == j ? 4.0 : 0.0));
        }
    }

    const auto one = init_state(basic_config(1, 1.0));
    CHECK(one.covariance.at(0, 0) == 1.0);

    const auto again = init_state(c);
    CHECK(again.mean == s.mean);
    CHECK(again.covariance.data == s.covariance.data);
    CHECK(again.rng.state() == s.rng.state());
}

TEST_CASE("config validation enforces the invariants") {
    DfoConfig c = basic_config(4);
    c.top_k = c.population + 1;
    CHECK_THROWS_AS(c.validate(), ConfigError);

    c = basic_config(4);
    c.weights = {0.5, 0.6};
    c.top_k = 2;
    CHECK_THROWS_AS(c.validate(), ConfigError); // sum != 1

    c = basic_config(4);
    c.top_k = 2;
    c.weights = {1.5, -0.5};
    CHECK_THROWS_AS(c.validate(), ConfigError); // non-positive weight

    c = basic_config(4);
    c.sigma0 = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);

    c = basic_config(4);
    c.epsilon = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("near-degenerate sampling concentrates at the mean") {
    auto c = basic_config(2, 1e-9);
    auto s = init_state(c);
    s.mean = {5.0, 5.0};
    const auto samples = sample_population(s, c);
    REQUIRE(samples.size() == c.population);
    for (const auto& z : samples) {
        CHECK(std::abs(z[0] - 5.0) < 1e-6);
        CHECK(std::abs(z[1] - 5.0) < 1e-6);
    }
}

TEST_CASE("sample moments match the distribution") {
    auto c = basic_config(2, 1.0);
    c.population = 10000;
    auto s = init_state(c);
    const auto samples = sample_population(s, c);
    for (std::size_t coord = 0; coord < 2; ++coord) {
        double mean = 0.0;
        for (const auto& z : samples) mean += z[coord];
        mean /= static_cast<double>(samples.size());
        CHECK(std::abs(mean) < 0.05);
        double var = 0.0;
        for (const auto& z : samples) var += (z[coord] - mean) * (z[coord] - mean);
        var /= static_cast<double>(samples.size());
        CHECK(var > 0.9);
        CHECK(var < 1.1);
    }
}

TEST_CASE("sampling is deterministic from equal states") {
    auto c = basic_config(3);
    auto s1 = init_state(c);
    auto s2 = init_state(c);
    CHECK(sample_population(s1, c) == sample_population(s2, c));
}

TEST_CASE("recombine with k=1 returns the best candidate") {
    auto c = basic_config(2);
    c.population = 3;
    c.top_k = 1;
    const std::vector<LatentVector> cands{{1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}};
    const auto mu = recombine(cands, {10, 50, 20}, c);
    CHECK(mu == Vec{3.0, 4.0});
}

TEST_CASE("recombine averages the top two with equal weights") {
    auto c = basic_config(2);
    c.population = 4;
    c.top_k = 2;
    c.weights = {0.5, 0.5};
    const std::vector<LatentVector> cands{{9.0, 9.0}, {1.0, 0.0}, {0.0, 1.0}, {9.0, -9.0}};
    const auto mu = recombine(cands, {1, 100, 100, 1}, c);
    CHECK(mu[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(mu[1] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("recombine matches the sort-and-dot oracle") {
    Rng rng(71);
    auto c = basic_config(5);
    c.population = 8;
    c.top_k = 4;
    const auto weights = c.effective_weights();
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<LatentVector> cands(8, LatentVector(5));
        std::vector<std::int64_t> scores(8);
        for (auto& z : cands) {
            for (auto& v : z) v = rng.next_normal();
        }
        for (auto& s : scores) s = static_cast<std::int64_t>(rng.next_below(6)); // force ties
        const auto mu = recombine(cands, scores, c);
        const auto oracle = recombine_oracle(cands, scores, weights, 4, 5);
        for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(mu[i] - oracle[i]) < 1e-12);
    }
}

TEST_CASE("recombine requires at least top_k scored candidates") {
    auto c = basic_config(2);
    c.population = 4;
    c.top_k = 3;
    const std::vector<LatentVector> cands{{0.0, 0.0}, {1.0, 1.0}};
    CHECK_THROWS_AS(recombine(cands, {1, 2}, c), Error);
}

TEST_CASE("covariance of identical selections collapses to epsilon * I") {
    auto c = basic_config(3);
    c.top_k = 4;
    c.population = 4;
    c.epsilon = 0.01;
    const std::vector<LatentVector> sel(4, LatentVector{1.0, 2.0, 3.0});
    const auto sigma = update_covariance(sel, Vec{1.0, 2.0, 3.0}, c);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(sigma.at(i, j) == doctest::Approx(i == j ? 0.01 : 0.0).epsilon(1e-15));
        }
    }
}

TEST_CASE("covariance update matches the hand-computed case") {
    auto c = basic_config(2);
    c.population = 2;
    c.top_k = 2;
    c.weights = {0.5, 0.5};
    c.epsilon = 0.01;
    const std::vector<LatentVector> sel{{1.0, 0.0}, {-1.0, 0.0}};
    const auto sigma = update_covariance(sel, Vec{0.0, 0.0}, c);
    CHECK(sigma.at(0, 0) == doctest::Approx(1.01).epsilon(1e-15));
    CHECK(sigma.at(0, 1) == 0.0);
    CHECK(sigma.at(1, 0) == 0.0);
    CHECK(sigma.at(1, 1) == doctest::Approx(0.01).epsilon(1e-15));
}

TEST_CASE("covariance update matches the outer-product oracle and stays conditioned") {
    Rng rng(81);
    auto c = basic_config(6);
    c.population = 10;
    c.top_k = 5;
    c.epsilon = 1e-3;
    const auto weights = c.effective_weights();
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<LatentVector> sel(5, LatentVector(6));
        for (auto& z : sel) {
            for (auto& v : z) v = rng.next_normal();
        }
        Vec mu(6);
        for (auto& v : mu) v = rng.next_normal();

        const auto sigma = update_covariance(sel, mu, c);

        // independent accumulation, column-major and with explicit outer products
        Mat oracle(6, 6);
        for (std::size_t j = 0; j < 5; ++j) {
            for (std::size_t col = 0; col < 6; ++col) {
                for (std::size_t row = 0; row < 6; ++row) {
                    oracle.at(row, col) +=
                        weights[j] * (sel[j][row] - mu[row]) * (sel[j][col] - mu[col]);
                }
            }
        }
        for (std::size_t d = 0; d < 6; ++d) oracle.at(d, d) += c.epsilon;

        double max_diff = 0.0;
        for (std::size_t i = 0; i < oracle.data.size(); ++i) {
            max_diff = std::max(max_diff, std::abs(oracle.data[i] - sigma.data[i]));
        }
        CHECK(max_diff < 1e-12);

        for (std::size_t i = 0; i < 6; ++i) {
            for (std::size_t j = i + 1; j < 6; ++j) {
                CHECK(std::abs(sigma.at(i, j) - sigma.at(j, i)) < 1e-12);
            }
        }
        const auto eig = symmetric_eigenvalues(sigma);
        CHECK(*std::min_element(eig.begin(), eig.end()) >= c.epsilon - 1e-12);
    }
}

TEST_CASE("step with zero budget signals exhaustion without advancing") {
    auto c = basic_config(3);
    c.token_budget = 0;
    auto state = init_state(c);
    const auto rng_before = state.rng.state();
    AnalyticEvaluator eval(Vec{0.0, 0.0, 0.0});
    PromptPool pool;
    const auto report = step_with(state, c, eval, pool);
    CHECK(report.budget_exhausted);
    CHECK(state.budget_exhausted);
    CHECK(state.iteration == 0);
    CHECK(state.rng.state() == rng_before);
    CHECK(pool.size() == 0);
}

TEST_CASE("single steps move the mean toward the sphere optimum") {
    const std::size_t m = 5;
    Vec target(m, 0.0);
    target[0] = 2.0; // far from the initial mean
    int improved = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto c = basic_config(m, 0.5);
        c.seed = seed;
        c.token_budget = 1 << 20;
        auto state = init_state(c);
        AnalyticEvaluator eval(target);
        PromptPool pool;
        const double before = 2.0;
        step_with(state, c, eval, pool);
        double after2 = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            after2 += (state.mean[i] - target[i]) * (state.mean[i] - target[i]);
        }
        if (std::sqrt(after2) < before) ++improved;
    }
    CHECK(improved >= 15);
}

TEST_CASE("step is bitwise reproducible") {
    const auto matrix = build_projection_matrix(7, 6, 8, 4);
    FixtureConfig fc;
    fc.vocab_size = 64;
    fc.gate_rows = 4;
    const auto fixture = build_planted_fixture(matrix, fc);
    SyntheticVictim victim_a(fixture.victim);
    SyntheticVictim victim_b(fixture.victim);

    auto c = basic_config(4);
    c.population = 6;
    c.top_k = 3;
    c.token_budget = 100000;
    c.seed = 3;

    auto s1 = init_state(c);
    auto s2 = init_state(c);
    PromptPool p1, p2;
    step(s1, c, matrix, fixture.vocab, victim_a, p1);
    step(s2, c, matrix, fixture.vocab, victim_b, p2);

    CHECK(s1.mean == s2.mean);
    CHECK(s1.covariance.data == s2.covariance.data);
    CHECK(s1.budget_spent == s2.budget_spent);
    CHECK(s1.iteration == s2.iteration);
    CHECK(p1.size() == p2.size());
    // generator states agree bit for bit: future samples are identical
    CHECK(sample_population(s1, c) == sample_population(s2, c));
}

TEST_CASE("evaluate_candidates charges prompt plus output and skips after exhaustion") {
    const auto matrix = build_projection_matrix(5, 4, 8, 4);
    FixtureConfig fc;
    fc.vocab_size = 32;
    fc.gate_rows = 4;
    const auto fixture = build_planted_fixture(matrix, fc);
    SyntheticVictim victim(fixture.victim);

    std::vector<LatentVector> candidates(6, LatentVector(4, 0.0));
    Rng rng(4);
    for (auto& z : candidates) {
        for (auto& v : z) v = rng.next_normal();
    }

    BudgetLedger ledger{150, 0};
    const auto results = evaluate_candidates(candidates, matrix, fixture.vocab, victim, ledger);
    REQUIRE(results.size() == 6);

    std::int64_t total = 0;
    bool exhausted_seen = false;
    for (const auto& r : results) {
        if (r.status == EvalStatus::Ok) {
            CHECK_FALSE(exhausted_seen); // skipped candidates are a suffix
            CHECK(r.charge == static_cast<std::int64_t>(r.prompt.token_ids.size()) + r.score);
            total += r.charge;
        } else {
            CHECK(r.status == EvalStatus::Skipped);
            exhausted_seen = true;
            CHECK(r.charge == 0);
        }
    }
    CHECK(exhausted_seen); // 150 tokens cannot cover six base-length queries
    CHECK(ledger.spent == total);
    CHECK(ledger.spent <= ledger.limit);
}

TEST_CASE("evaluate_candidates handles empty and duplicate inputs") {
    const auto matrix = build_projection_matrix(5, 4, 8, 4);
    FixtureConfig fc;
    fc.vocab_size = 32;
    fc.gate_rows = 4;
    const auto fixture = build_planted_fixture(matrix, fc);
    SyntheticVictim victim(fixture.victim);

    BudgetLedger ledger{100000, 0};
    CHECK(evaluate_candidates({}, matrix, fixture.vocab, victim, ledger).empty());

    const LatentVector z(4, 0.25);
    const auto results = evaluate_candidates({z, z}, matrix, fixture.vocab, victim, ledger);
    REQUIRE(results.size() == 2);
    CHECK(results[0].score == results[1].score);
    CHECK(results[0].prompt.token_ids == results[1].prompt.token_ids);
}

TEST_CASE("the planted optimum decodes to a cap-scoring prompt") {
    const auto matrix = build_projection_matrix(7, 20, 20, 20);
    FixtureConfig fc;
    const auto fixture = build_planted_fixture(matrix, fc);
    SyntheticVictim victim(fixture.victim);

    const auto prompt = decode_embedding(project(matrix, fixture.target), fixture.vocab);
    CHECK(victim.planted_hits(prompt) >= fixture.victim.loop_threshold);
    const auto out = victim.query(prompt, 0);
    CHECK(out.output_tokens == fixture.victim.cap);
    CHECK(out.truncated);
}

TEST_CASE("optimize with zero iterations returns an empty pool") {
    const auto matrix = build_projection_matrix(5, 4, 8, 4);
    FixtureConfig fc;
    fc.vocab_size = 32;
    fc.gate_rows = 4;
    const auto fixture = build_planted_fixture(matrix, fc);
    SyntheticVictim victim(fixture.victim);

    auto c = basic_config(4);
    c.max_iterations = 0;
    const auto pool = optimize(c, matrix, fixture.vocab, victim);
    CHECK(pool.size() == 0);
}

TEST_CASE("optimize is deterministic end to end") {
    const auto matrix = build_projection_matrix(7, 6, 8, 4);
    FixtureConfig fc;
    fc.vocab_size = 64;
    fc.gate_rows = 4;
    const auto fixture = build_planted_fixture(matrix, fc);
    SyntheticVictim victim_a(fixture.victim);
    SyntheticVictim victim_b(fixture.victim);

    auto c = basic_config(4);
    c.population = 6;
    c.top_k = 3;
    c.token_budget = 2000;
    c.max_iterations = 10;
    c.seed = 11;

    std::vector<IterationReport> ra, rb;
    DfoState sa, sb;
    const auto pa = optimize(c, matrix, fixture.vocab, victim_a, &ra, &sa);
    const auto pb = optimize(c, matrix, fixture.vocab, victim_b, &rb, &sb);

    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(pa.entries()[i].prompt.token_ids == pb.entries()[i].prompt.token_ids);
        CHECK(pa.entries()[i].score == pb.entries()[i].score);
        CHECK(pa.entries()[i].iteration == pb.entries()[i].iteration);
    }
    REQUIRE(ra.size() == rb.size());
    for (std::size_t i = 0; i < ra.size(); ++i) {
        CHECK(to_json_line(ra[i]) == to_json_line(rb[i]));
    }
    CHECK(sa.budget_spent == sb.budget_spent);
}

TEST_CASE("budget accounting is monotone across iterations") {
    const auto matrix = build_projection_matrix(7, 6, 8, 4);
    FixtureConfig fc;
    fc.vocab_size = 64;
    fc.gate_rows = 4;
    const auto fixture = build_planted_fixture(matrix, fc);
    SyntheticVictim victim(fixture.victim);

    auto c = basic_config(4);
    c.population = 6;
    c.top_k = 3;
    c.token_budget = 3000;
    c.max_iterations = 20;
    c.seed = 5;

    std::vector<IterationReport> reports;
    DfoState state;
    optimize(c, matrix, fixture.vocab, victim, &reports, &state);
    std::int64_t prev = 0;
    for (const auto& r : reports) {
        CHECK(r.budget_spent >= prev);
        prev = r.budget_spent;
    }
    CHECK(state.budget_spent <= c.token_budget);
}

TEST_CASE("the mean converges on the analytic landscape") {
    const std::size_t m = 20;
    Vec target(m);
    Rng rng(1234);
    for (auto& v : target) v = rng.next_normal();
    double n = norm2(target);
    for (auto& v : target) v *= 1.5 / n;

    int converged = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        DfoConfig c;
        c.latent_dim = m;
        c.population = 16;
        c.top_k = 8;
        c.sigma0 = 0.5;
        c.epsilon = 1e-4;
        c.token_budget = 1 << 30;
        c.max_iterations = 200;
        c.seed = seed;

        AnalyticEvaluator eval(target, 4096.0);
        DfoState state;
        optimize_with(c, eval, nullptr, &state);
        double d2 = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            d2 += (state.mean[i] - target[i]) * (state.mean[i] - target[i]);
        }
        if (std::sqrt(d2) < 0.1) ++converged;
    }
    CHECK(converged >= 18);
}

TEST_CASE("prompt pool keeps entries sorted and deduplicated") {
    PromptPool pool;
    Prompt a;
    a.token_ids = {1, 2};
    Prompt b;
    b.token_ids = {3, 4};
    pool.insert(a, 10, 0);
    pool.insert(b, 50, 1);
    pool.insert(a, 30, 2); // better score for the same prompt
    REQUIRE(pool.size() == 2);
    CHECK(pool.entries()[0].score == 50);
    CHECK(pool.entries()[1].score == 30);
    CHECK(pool.entries()[1].iteration == 0); // earliest sighting retained
    pool.insert(a, 5, 3);                    // worse score is ignored
    CHECK(pool.entries()[1].score == 30);
}

TEST_CASE("parallel evaluation assigns scores by candidate index") {
    const auto matrix = build_projection_matrix(7, 6, 8, 4);
    FixtureConfig fc;
    fc.vocab_size = 64;
    fc.gate_rows = 4;
    const auto fixture = build_planted_fixture(matrix, fc);

    std::vector<LatentVector> candidates(9, LatentVector(4));
    Rng rng(8);
    for (auto& z : candidates) {
        for (auto& v : z) v = rng.next_normal();
    }

    SyntheticVictim victim(fixture.victim);
    // ample budget: the per-wave split cannot bite, so parallel waves and the
    // sequential pass must agree exactly
    BudgetLedger seq_ledger{1 << 20, 0};
    const auto seq = evaluate_candidates(candidates, matrix, fixture.vocab, victim, seq_ledger, 1);
    BudgetLedger par_ledger{1 << 20, 0};
    const auto par = evaluate_candidates(candidates, matrix, fixture.vocab, victim, par_ledger, 4);
    BudgetLedger par2_ledger{1 << 20, 0};
    const auto par2 =
        evaluate_candidates(candidates, matrix, fixture.vocab, victim, par2_ledger, 4);

    REQUIRE(seq.size() == par.size());
    for (std::size_t i = 0; i < seq.size(); ++i) {
        CHECK(par[i].score == seq[i].score);
        CHECK(par[i].prompt.token_ids == seq[i].prompt.token_ids);
        CHECK(par[i].score == par2[i].score);
    }
    CHECK(par_ledger.spent == seq_ledger.spent);
}

TEST_CASE("cross-iteration caching is off by default and free when enabled") {
    const auto matrix = build_projection_matrix(7, 6, 8, 4);
    FixtureConfig fc;
    fc.vocab_size = 64;
    fc.gate_rows = 4;
    const auto fixture = build_planted_fixture(matrix, fc);

    // a near-degenerate distribution decodes to the same prompt every time
    DfoConfig cfg;
    cfg.latent_dim = 4;
    cfg.population = 4;
    cfg.top_k = 2;
    cfg.sigma0 = 1e-9;
    cfg.epsilon = 1e-18;
    cfg.token_budget = 1 << 20;
    cfg.max_iterations = 5;
    cfg.seed = 2;

    SyntheticVictim victim(fixture.victim);
    DfoState no_cache;
    optimize(cfg, matrix, fixture.vocab, victim, nullptr, &no_cache);

    cfg.cache_prompts = true;
    SyntheticVictim victim2(fixture.victim);
    DfoState cached;
    optimize(cfg, matrix, fixture.vocab, victim2, nullptr, &cached);

    // without the cache every duplicate query is charged again; with it only
    // the first iteration pays
    CHECK(cached.budget_spent < no_cache.budget_spent);
    CHECK(cached.budget_spent == no_cache.budget_spent / 5);
}

namespace {

// Victim that fails transport on selected queries.
class FlakyVictim : public Victim {
public:
    FlakyVictim(SyntheticVictimConfig config, int fail_modulo)
        : inner_(std::move(config)), fail_modulo_(fail_modulo) {}

    QueryOutcome query(const Prompt& prompt, std::int64_t cap) override {
        if (fail_modulo_ > 0 && (calls_++ % fail_modulo_) == 0) {
            throw TransportError("injected transport failure");
        }
        return inner_.query(prompt, cap);
    }

private:
    SyntheticVictim inner_;
    int fail_modulo_;
    int calls_ = 0;
};

} // namespace

TEST_CASE("transport failures mark candidates failed with score zero") {
    const auto matrix = build_projection_matrix(7, 6, 8, 4);
    FixtureConfig fc;
    fc.vocab_size = 64;
    fc.gate_rows = 4;
    const auto fixture = build_planted_fixture(matrix, fc);

    FlakyVictim victim(fixture.victim, 2); // every other query fails
    std::vector<LatentVector> candidates(6, LatentVector(4));
    Rng rng(12);
    for (auto& z : candidates) {
        for (auto& v : z) v = rng.next_normal();
    }
    BudgetLedger ledger{1 << 20, 0};
    const auto results = evaluate_candidates(candidates, matrix, fixture.vocab, victim, ledger);
    int failed = 0;
    for (const auto& r : results) {
        if (r.status == EvalStatus::Failed) {
            ++failed;
            CHECK(r.score == 0);
            CHECK(r.charge == 0);
            CHECK_FALSE(r.error.empty());
        }
    }
    CHECK(failed == 3);

    // a fully failing victim aborts the run
    FlakyVictim dead(fixture.victim, 1);
    DfoConfig cfg;
    cfg.latent_dim = 4;
    cfg.population = 4;
    cfg.top_k = 2;
    cfg.token_budget = 10000;
    cfg.max_iterations = 3;
    CHECK_THROWS_AS(optimize(cfg, matrix, fixture.vocab, dead), TransportError);
}
