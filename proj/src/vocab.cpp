#include "maxgen/vocab.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <unordered_set>

namespace maxgen {

namespace {

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

class Reader {
public:
    Reader(const char* data, std::size_t size) : data_(data), size_(size) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }

    std::uint16_t u16() {
        const char* p = take(2);
        return static_cast<std::uint16_t>(static_cast<unsigned char>(p[0]) |
                                          (static_cast<unsigned char>(p[1]) << 8));
    }

    std::uint32_t u32() {
        const char* p = take(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
        return v;
    }

    float f32() {
        std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }

    std::string bytes(std::size_t n) { return {take(n), n}; }

    bool exhausted() const { return pos_ == size_; }

private:
    const char* take(std::size_t n) {
        if (pos_ + n > size_) throw FormatError("svec: truncated file");
        const char* p = data_ + pos_;
        pos_ += n;
        return p;
    }

    const char* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

} // namespace

SurrogateVocab::SurrogateVocab(std::vector<std::string> tokens, Mat embeddings, JoinMode join_mode)
    : tokens_(std::move(tokens)), embeddings_(std::move(embeddings)), join_mode_(join_mode) {
    if (tokens_.size() < 2) throw IntegrityError("vocab: need at least 2 tokens");
    if (embeddings_.rows != tokens_.size()) {
        throw DimensionError("vocab: embedding rows != token count");
    }
    if (embeddings_.cols == 0) throw DimensionError("vocab: embed dim must be >= 1");
    for (double v : embeddings_.data) {
        if (!std::isfinite(v)) throw IntegrityError("vocab: non-finite embedding entry");
    }
    std::unordered_set<std::string> seen;
    for (const auto& t : tokens_) {
        if (!seen.insert(t).second) throw IntegrityError("vocab: duplicate token '" + t + "'");
    }
}

std::string SurrogateVocab::join(const std::vector<std::uint32_t>& ids) const {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i > 0 && join_mode_ == JoinMode::Space) out.push_back(' ');
        out += tokens_.at(ids[i]);
    }
    return out;
}

SurrogateVocab load_vocab(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("svec: cannot open '" + path + "'");
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Reader r(buf.data(), buf.size());

    if (r.bytes(4) != "SVEC") throw FormatError("svec: bad magic");
    const std::uint16_t version = r.u16();
    if (version != 1) throw FormatError("svec: unsupported version " + std::to_string(version));
    const std::uint8_t join_raw = r.u8();
    if (join_raw > 1) throw FormatError("svec: bad join mode");
    if (r.u8() != 0) throw FormatError("svec: reserved byte not zero");
    const std::uint32_t vocab_size = r.u32();
    const std::uint32_t dim = r.u32();
    if (vocab_size < 2 || dim == 0) throw FormatError("svec: bad table dimensions");

    std::vector<std::string> tokens;
    tokens.reserve(vocab_size);
    for (std::uint32_t i = 0; i < vocab_size; ++i) {
        const std::uint16_t len = r.u16();
        tokens.push_back(r.bytes(len));
    }
    Mat emb(vocab_size, dim);
    for (double& v : emb.data) v = static_cast<double>(r.f32());
    if (!r.exhausted()) throw FormatError("svec: trailing bytes");

    return {std::move(tokens), std::move(emb), static_cast<JoinMode>(join_raw)};
}

void save_vocab(const SurrogateVocab& vocab, const std::string& path) {
    std::string out;
    out += "SVEC";
    put_u16(out, 1);
    out.push_back(static_cast<char>(vocab.join_mode()));
    out.push_back(0);
    put_u32(out, static_cast<std::uint32_t>(vocab.size()));
    put_u32(out, static_cast<std::uint32_t>(vocab.embed_dim()));
    for (const auto& t : vocab.tokens()) {
        if (t.size() > std::numeric_limits<std::uint16_t>::max()) {
            throw IntegrityError("svec: token longer than 65535 bytes");
        }
        put_u16(out, static_cast<std::uint16_t>(t.size()));
        out += t;
    }
    for (double v : vocab.embeddings().data) put_f32(out, static_cast<float>(v));

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw FormatError("svec: cannot write '" + path + "'");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

std::uint32_t nearest_neighbor(std::span<const double> e, const SurrogateVocab& vocab) {
    if (e.size() != vocab.embed_dim()) {
        throw DimensionError("nearest_neighbor: query length " + std::to_string(e.size()) +
                             " does not match embed dim " + std::to_string(vocab.embed_dim()));
    }
    const std::size_t dim = vocab.embed_dim();
    const double* rows = vocab.embeddings().data.data();
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t best_idx = 0;
    for (std::size_t j = 0; j < vocab.size(); ++j) {
        const double* row = rows + j * dim;
        double dist = 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
            const double d = e[c] - row[c];
            dist += d * d;
        }
        // Strict < keeps the smallest index on exact ties.
        if (dist < best) {
            best = dist;
            best_idx = static_cast<std::uint32_t>(j);
        }
    }
    return best_idx;
}

Prompt decode_embedding(const PromptEmbedding& e, const SurrogateVocab& vocab) {
    if (e.embed_dim != vocab.embed_dim()) {
        throw DimensionError("decode_embedding: embedding dim mismatch");
    }
    Prompt p;
    p.token_ids.reserve(e.prompt_len);
    for (std::size_t i = 0; i < e.prompt_len; ++i) {
        p.token_ids.push_back(nearest_neighbor(e.position(i), vocab));
    }
    p.text = vocab.join(p.token_ids);
    return p;
}

} // namespace maxgen
