#pragma once

#include <cstdint>
#include <vector>

#include "maxgen/projection.hpp"
#include "maxgen/victim.hpp"
#include "maxgen/vocab.hpp"

namespace maxgen {

// Parameters of the verifiable synthetic-victim setup.
//
// The vocabulary is built around a hidden latent target z*. Each prompt
// position i owns one rung of a ladder: a ball of radius rung_radii[i]
// around rung_centers[i] * z*, realized by planting two token rows at the
// projected ball center plus a cluster of decoy rows around it. A query
// latent inside the ball decodes that position to a planted token. The
// first trail_rungs balls march from near the origin out to the target and
// grade the hit count along the approach; the remaining balls sit tightly
// on z* itself, so crossing the loop threshold requires genuine proximity
// to the target. Calibrated so prompts sampled blindly from N(0, I) rarely
// reach the threshold while the adaptive search walks the trail reliably.
struct FixtureConfig {
    std::uint64_t vocab_seed = 17;
    std::uint32_t vocab_size = 4096;
    double target_norm = 4.5;      // |z*| of the hidden latent target
    std::size_t trail_rungs = 5;   // graded approach rungs
    double trail_center_lo = 0.30; // first trail center as a multiple of z*
    double trail_center_hi = 0.90; // last trail center
    double trail_radius_hi = 3.4;  // first trail radius
    double trail_radius_lo = 2.8;  // last trail radius
    double deep_radius = 2.4;      // radius of the on-target rungs
    double gate_factor = 0.26;     // decoy cluster scale relative to the rung radius
    std::uint32_t gate_rows = 40;  // decoy rows per position
    double background_scale = 1.0; // background rows relative to the target scale
    std::vector<double> ladder;    // explicit rung radii; overrides the generated ladder
    std::vector<double> centers;   // explicit rung centers as multiples of z*
    std::int64_t cap = 4096;
    std::int64_t base_len = 32;
    std::int64_t gain = 64;
    int loop_threshold = 8;
    int repeat_period = 8;
    StreamMode stream_mode = StreamMode::Diverse;

    // Rung radius / center per prompt position.
    std::vector<double> rung_radii(std::size_t prompt_len) const;
    std::vector<double> rung_centers(std::size_t prompt_len) const;
};

struct PlantedFixture {
    SurrogateVocab vocab;
    SyntheticVictimConfig victim;
    LatentVector target; // the hidden optimum; tests may decode it directly
};

// Builds the fixture vocabulary for the given projection matrix. Embedding
// values are quantized to float32 so an in-memory fixture matches one that
// round-tripped through an SVEC file.
PlantedFixture build_planted_fixture(const ProjectionMatrix& matrix, const FixtureConfig& config);

} // namespace maxgen
