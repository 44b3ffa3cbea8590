#pragma once

#include <cstdint>
#include <span>

#include "maxgen/linalg.hpp"

namespace maxgen {

// Search coordinates in the reduced space. Length must equal the
// configured latent dimension of the projection it is used with.
using LatentVector = Vec;

// Fixed Gaussian map from the latent space to the flattened prompt-embedding
// space. Entries are N(0, 1/latent_dim) draws from a seeded generator, so the
// same (seed, prompt_len, embed_dim, latent_dim) always reproduces the same
// matrix. Rows are ordered position-major: row (i*embed_dim + j) feeds
// coordinate j of token position i.
struct ProjectionMatrix {
    Mat entries; // (prompt_len * embed_dim) x latent_dim
    std::size_t prompt_len = 0;
    std::size_t embed_dim = 0;
    std::size_t latent_dim = 0;
    std::uint64_t seed = 0;
};

// One continuous embedding per token position, stored flat position-major.
struct PromptEmbedding {
    std::size_t prompt_len = 0;
    std::size_t embed_dim = 0;
    Vec values; // prompt_len * embed_dim

    std::span<const double> position(std::size_t i) const {
        return {values.data() + i * embed_dim, embed_dim};
    }
};

// Samples the projection matrix. Entries are filled row-major from a single
// generator stream (normal draws scaled by 1/sqrt(latent_dim)).
// Throws DimensionError if any dimension is zero.
ProjectionMatrix build_projection_matrix(std::uint64_t seed, std::size_t prompt_len,
                                         std::size_t embed_dim, std::size_t latent_dim);

// E = A * z, reshaped into prompt_len chunks of embed_dim. Pure.
// Throws DimensionError if z length differs from the matrix latent dim.
PromptEmbedding project(const ProjectionMatrix& matrix, const LatentVector& z);

} // namespace maxgen
