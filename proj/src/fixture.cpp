#include "maxgen/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "maxgen/rng.hpp"

namespace maxgen {

namespace {

double lerp(double a, double b, std::size_t i, std::size_t n) {
    if (n <= 1) return a;
    return a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
}

} // namespace

std::vector<double> FixtureConfig::rung_radii(std::size_t prompt_len) const {
    if (!ladder.empty()) {
        if (ladder.size() != prompt_len) {
            throw ConfigError("fixture: ladder length must equal the prompt length");
        }
        return ladder;
    }
    std::vector<double> radii(prompt_len);
    const std::size_t trail = std::min(trail_rungs, prompt_len);
    for (std::size_t i = 0; i < trail; ++i) {
        radii[i] = lerp(trail_radius_hi, trail_radius_lo, i, trail);
    }
    for (std::size_t i = trail; i < prompt_len; ++i) radii[i] = deep_radius;
    return radii;
}

std::vector<double> FixtureConfig::rung_centers(std::size_t prompt_len) const {
    if (!centers.empty()) {
        if (centers.size() != prompt_len) {
            throw ConfigError("fixture: centers length must equal the prompt length");
        }
        return centers;
    }
    std::vector<double> out(prompt_len, 1.0);
    const std::size_t trail = std::min(trail_rungs, prompt_len);
    for (std::size_t i = 0; i < trail; ++i) {
        out[i] = lerp(trail_center_lo, trail_center_hi, i, trail);
    }
    return out;
}

PlantedFixture build_planted_fixture(const ProjectionMatrix& matrix, const FixtureConfig& config) {
    const std::size_t prompt_len = matrix.prompt_len;
    const std::size_t dim = matrix.embed_dim;
    const std::size_t latent_dim = matrix.latent_dim;
    const std::size_t planted_count = 2 * prompt_len;
    const std::size_t gate_count = config.gate_rows * prompt_len;
    if (config.vocab_size < planted_count + gate_count + 2) {
        throw ConfigError("fixture: vocab_size too small for planted and gate rows");
    }

    Rng rng(config.vocab_seed);

    // Hidden latent target z*, scaled to the requested norm.
    LatentVector target(latent_dim);
    for (auto& v : target) v = rng.next_normal();
    const double n = norm2(target);
    for (auto& v : target) v *= config.target_norm / n;

    // Background rows at the coordinate scale of the projected target, so
    // planted and background rows are indistinguishable by magnitude.
    const double row_scale = config.background_scale * config.target_norm /
                             std::sqrt(static_cast<double>(latent_dim));
    Mat emb(config.vocab_size, dim);
    for (double& v : emb.data) v = rng.next_normal() * row_scale;

    // Planted ids spread deterministically over the table.
    std::vector<std::uint32_t> planted;
    planted.reserve(planted_count);
    const std::uint32_t stride = config.vocab_size / static_cast<std::uint32_t>(planted_count);
    for (std::size_t i = 0; i < planted_count; ++i) {
        planted.push_back(static_cast<std::uint32_t>(i) * stride + stride / 2);
    }
    std::unordered_set<std::uint32_t> planted_set(planted.begin(), planted.end());

    const auto radii = config.rung_radii(prompt_len);
    const auto centers = config.rung_centers(prompt_len);

    LatentVector probe(latent_dim);
    LatentVector rung_center(latent_dim);
    std::uint32_t next_gate_id = 0;
    auto take_gate_id = [&] {
        while (planted_set.count(next_gate_id)) ++next_gate_id;
        return next_gate_id++;
    };

    for (std::size_t pos = 0; pos < prompt_len; ++pos) {
        for (std::size_t c = 0; c < latent_dim; ++c) rung_center[c] = centers[pos] * target[c];
        const PromptEmbedding center_embedding = project(matrix, rung_center);
        const auto e = center_embedding.position(pos);
        const std::uint32_t full_id = planted[2 * pos];
        const std::uint32_t twin_id = planted[2 * pos + 1];
        for (std::size_t c = 0; c < dim; ++c) {
            emb.at(full_id, c) = e[c];
            emb.at(twin_id, c) = e[c];
        }

        // Decoy cluster with the rung's capture radius: embeddings of latent
        // points near the rung center block queries farther out than the rung.
        const double sigma = config.gate_factor * radii[pos];
        for (std::uint32_t g = 0; g < config.gate_rows; ++g) {
            for (std::size_t c = 0; c < latent_dim; ++c) {
                probe[c] = rung_center[c] + sigma * rng.next_normal();
            }
            const PromptEmbedding pe = project(matrix, probe);
            const auto row = pe.position(pos);
            const std::uint32_t id = take_gate_id();
            for (std::size_t c = 0; c < dim; ++c) emb.at(id, c) = row[c];
        }
    }

    // Quantize so the in-memory table equals its SVEC round trip.
    for (double& v : emb.data) v = static_cast<double>(static_cast<float>(v));

    std::vector<std::string> tokens;
    tokens.reserve(config.vocab_size);
    for (std::uint32_t i = 0; i < config.vocab_size; ++i) {
        tokens.push_back("tok" + std::to_string(i));
    }

    SyntheticVictimConfig victim;
    victim.cap = config.cap;
    victim.planted_tokens = planted;
    victim.base_len = config.base_len;
    victim.gain = config.gain;
    victim.loop_threshold = config.loop_threshold;
    victim.repeat_period = config.repeat_period;
    victim.stream_mode = config.stream_mode;
    victim.seed = config.vocab_seed;

    return {SurrogateVocab(std::move(tokens), std::move(emb)), std::move(victim),
            std::move(target)};
}

} // namespace maxgen
