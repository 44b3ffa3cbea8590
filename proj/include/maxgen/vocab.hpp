#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "maxgen/error.hpp"
#include "maxgen/projection.hpp"

namespace maxgen {

enum class JoinMode : std::uint8_t {
    Concat = 0,
    Space = 1,
};

// Token strings paired with an embedding table used for nearest-neighbor
// decoding of continuous prompt embeddings. Immutable after construction.
class SurrogateVocab {
public:
    // Validates sizes, finiteness and token uniqueness.
    SurrogateVocab(std::vector<std::string> tokens, Mat embeddings,
                   JoinMode join_mode = JoinMode::Space);

    std::size_t size() const { return tokens_.size(); }
    std::size_t embed_dim() const { return embeddings_.cols; }
    JoinMode join_mode() const { return join_mode_; }
    const std::vector<std::string>& tokens() const { return tokens_; }
    const Mat& embeddings() const { return embeddings_; }

    std::span<const double> row(std::size_t j) const {
        return {embeddings_.data.data() + j * embeddings_.cols, embeddings_.cols};
    }

    std::string join(const std::vector<std::uint32_t>& ids) const;

private:
    std::vector<std::string> tokens_;
    Mat embeddings_; // size x embed_dim
    JoinMode join_mode_;
};

// A decoded discrete prompt: vocabulary indices plus their joined text.
struct Prompt {
    std::vector<std::uint32_t> token_ids;
    std::string text;

    bool operator==(const Prompt& other) const { return token_ids == other.token_ids; }
};

// SVEC file format (little-endian):
//   magic "SVEC" | u16 version=1 | u8 join_mode | u8 reserved=0
//   u32 vocab_size | u32 embed_dim
//   vocab_size token records: u16 byte length + UTF-8 bytes
//   vocab_size * embed_dim float32 values, row-major
SurrogateVocab load_vocab(const std::string& path);
void save_vocab(const SurrogateVocab& vocab, const std::string& path);

// argmin over rows of the squared Euclidean distance to e.
// Exact ties resolve to the smallest index.
std::uint32_t nearest_neighbor(std::span<const double> e, const SurrogateVocab& vocab);

// Position-wise nearest neighbor over all positions of E.
Prompt decode_embedding(const PromptEmbedding& e, const SurrogateVocab& vocab);

} // namespace maxgen
