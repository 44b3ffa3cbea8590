#include "maxgen/projection.hpp"

#include <cmath>

#include "maxgen/rng.hpp"

namespace maxgen {

ProjectionMatrix build_projection_matrix(std::uint64_t seed, std::size_t prompt_len,
                                         std::size_t embed_dim, std::size_t latent_dim) {
    if (prompt_len == 0 || embed_dim == 0 || latent_dim == 0) {
        throw DimensionError("build_projection_matrix: dimensions must be >= 1");
    }
    ProjectionMatrix m;
    m.prompt_len = prompt_len;
    m.embed_dim = embed_dim;
    m.latent_dim = latent_dim;
    m.seed = seed;
    m.entries = Mat(prompt_len * embed_dim, latent_dim);

    Rng rng(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(latent_dim));
    for (double& e : m.entries.data) e = rng.next_normal() * scale;
    return m;
}

PromptEmbedding project(const ProjectionMatrix& matrix, const LatentVector& z) {
    if (z.size() != matrix.latent_dim) {
        throw DimensionError("project: latent vector length " + std::to_string(z.size()) +
                             " does not match latent dim " + std::to_string(matrix.latent_dim));
    }
    PromptEmbedding e;
    e.prompt_len = matrix.prompt_len;
    e.embed_dim = matrix.embed_dim;
    e.values = matvec(matrix.entries, z);
    return e;
}

} // namespace maxgen
