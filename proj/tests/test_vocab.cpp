#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "maxgen/rng.hpp"
#include "maxgen/vocab.hpp"

using namespace maxgen;

namespace {

std::string temp_file(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

SurrogateVocab random_vocab(std::size_t size, std::size_t dim, std::uint64_t seed) {
    std::vector<std::string> tokens;
    tokens.reserve(size);
    for (std::size_t i = 0; i < size; ++i) tokens.push_back("t" + std::to_string(i));
    Mat emb(size, dim);
    Rng rng(seed);
    // float-representable values so file round trips are bit exact
    for (double& v : emb.data) v = static_cast<double>(static_cast<float>(rng.next_normal()));
    return {std::move(tokens), std::move(emb)};
}

// Exhaustive-scan oracle, written independently of the library path:
// full sqrt distances, first index attaining the minimum.
std::uint32_t nn_oracle(const std::vector<double>& e, const SurrogateVocab& vocab) {
    std::vector<double> dists(vocab.size());
    for (std::size_t j = 0; j < vocab.size(); ++j) {
        const auto row = vocab.row(j);
        double sum = 0.0;
        for (std::size_t c = 0; c < e.size(); ++c) sum += (e[c] - row[c]) * (e[c] - row[c]);
        dists[j] = std::sqrt(sum);
    }
    const auto it = std::min_element(dists.begin(), dists.end());
    return static_cast<std::uint32_t>(it - dists.begin());
}

void append_u16(std::string& s, std::uint16_t v) {
    s.push_back(static_cast<char>(v & 0xff));
    s.push_back(static_cast<char>(v >> 8));
}

void append_u32(std::string& s, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_f32(std::string& s, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    append_u32(s, bits);
}

} // namespace

TEST_CASE("hand-written two-token fixture loads with exact values") {
    // Bytes written from the format description, not via save_vocab.
    std::string bytes = "SVEC";
    append_u16(bytes, 1); // version
    bytes.push_back(1);   // join mode: space
    bytes.push_back(0);   // reserved
    append_u32(bytes, 2); // vocab size
    append_u32(bytes, 2); // embed dim
    append_u16(bytes, 3);
    bytes += "foo";
    append_u16(bytes, 3);
    bytes += "bar";
    append_f32(bytes, 1.5f);
    append_f32(bytes, -2.0f);
    append_f32(bytes, 0.25f);
    append_f32(bytes, 4.0f);

    const auto path = temp_file("svec_fixture.svec");
    {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        f << bytes;
    }
    const auto vocab = load_vocab(path);
    CHECK(vocab.size() == 2);
    CHECK(vocab.embed_dim() == 2);
    CHECK(vocab.tokens()[0] == "foo");
    CHECK(vocab.tokens()[1] == "bar");
    CHECK(vocab.embeddings().at(0, 0) == 1.5);
    CHECK(vocab.embeddings().at(0, 1) == -2.0);
    CHECK(vocab.embeddings().at(1, 0) == 0.25);
    CHECK(vocab.embeddings().at(1, 1) == 4.0);
    CHECK(vocab.join({0, 1}) == "foo bar");
}

TEST_CASE("save then load round-trips bit exactly") {
    const auto vocab = random_vocab(1000, 32, 77);
    const auto path = temp_file("svec_roundtrip.svec");
    save_vocab(vocab, path);
    const auto loaded = load_vocab(path);
    CHECK(loaded.size() == vocab.size());
    CHECK(loaded.embed_dim() == vocab.embed_dim());
    CHECK(loaded.tokens() == vocab.tokens());
    CHECK(loaded.embeddings().data == vocab.embeddings().data);

    // Saving the loaded table reproduces the same file bytes.
    const auto path2 = temp_file("svec_roundtrip2.svec");
    save_vocab(loaded, path2);
    std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
    const std::string ba((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    const std::string bb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(ba == bb);
}

TEST_CASE("bad magic and truncation are format errors") {
    const auto path = temp_file("svec_bad.svec");
    {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        f << "XXXXrest-of-file";
    }
    CHECK_THROWS_AS(load_vocab(path), FormatError);

    {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        f << "SV"; // cut off inside the magic
    }
    CHECK_THROWS_AS(load_vocab(path), FormatError);
    CHECK_THROWS_AS(load_vocab(temp_file("does_not_exist.svec")), FormatError);
}

TEST_CASE("duplicate tokens are an integrity error") {
    std::vector<std::string> tokens{"same", "same"};
    CHECK_THROWS_AS(SurrogateVocab(std::move(tokens), Mat(2, 2)), IntegrityError);
}

TEST_CASE("nearest neighbor returns a zero-distance row") {
    const auto vocab = random_vocab(16, 4, 3);
    std::vector<double> e(vocab.row(5).begin(), vocab.row(5).end());
    CHECK(nearest_neighbor(e, vocab) == 5);
}

TEST_CASE("nearest neighbor matches the exhaustive oracle") {
    const auto vocab = random_vocab(1000, 32, 11);
    Rng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> e(32);
        for (auto& v : e) v = rng.next_normal();
        CHECK(nearest_neighbor(e, vocab) == nn_oracle(e, vocab));
    }
}

TEST_CASE("exact ties break to the smallest index") {
    std::vector<std::string> tokens;
    for (int i = 0; i < 10; ++i) tokens.push_back("t" + std::to_string(i));
    Mat emb(10, 2);
    for (std::size_t j = 0; j < 10; ++j) {
        emb.at(j, 0) = static_cast<double>(j) * 100.0;
        emb.at(j, 1) = 0.0;
    }
    // rows 3 and 7 identical, query equidistant (equal) to both
    emb.at(7, 0) = emb.at(3, 0);
    emb.at(7, 1) = emb.at(3, 1);
    const SurrogateVocab vocab(std::move(tokens), std::move(emb));
    const std::vector<double> e{300.0, 0.0};
    CHECK(nearest_neighbor(e, vocab) == 3);
}

TEST_CASE("dimension mismatch in nearest neighbor is rejected") {
    const auto vocab = random_vocab(8, 4, 1);
    CHECK_THROWS_AS(nearest_neighbor(std::vector<double>(3, 0.0), vocab), DimensionError);
}

TEST_CASE("decoding exact vocabulary rows returns their ids") {
    const auto vocab = random_vocab(32, 6, 21);
    PromptEmbedding e;
    e.prompt_len = 3;
    e.embed_dim = 6;
    for (std::uint32_t id : {4u, 9u, 0u}) {
        const auto row = vocab.row(id);
        e.values.insert(e.values.end(), row.begin(), row.end());
    }
    const auto prompt = decode_embedding(e, vocab);
    CHECK(prompt.token_ids == std::vector<std::uint32_t>{4, 9, 0});
    CHECK(prompt.text == "t4 t9 t0");
}

TEST_CASE("snap to vocabulary is idempotent") {
    const auto vocab = random_vocab(64, 8, 31);
    Rng rng(32);
    PromptEmbedding e;
    e.prompt_len = 5;
    e.embed_dim = 8;
    e.values.resize(40);
    for (auto& v : e.values) v = rng.next_normal();

    const auto first = decode_embedding(e, vocab);
    PromptEmbedding snapped;
    snapped.prompt_len = 5;
    snapped.embed_dim = 8;
    for (auto id : first.token_ids) {
        const auto row = vocab.row(id);
        snapped.values.insert(snapped.values.end(), row.begin(), row.end());
    }
    const auto second = decode_embedding(snapped, vocab);
    CHECK(second.token_ids == first.token_ids);
}

TEST_CASE("decode matches the per-position oracle") {
    const auto vocab = random_vocab(500, 16, 41);
    Rng rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        PromptEmbedding e;
        e.prompt_len = 4;
        e.embed_dim = 16;
        e.values.resize(64);
        for (auto& v : e.values) v = rng.next_normal();
        const auto prompt = decode_embedding(e, vocab);
        REQUIRE(prompt.token_ids.size() == 4);
        for (std::size_t i = 0; i < 4; ++i) {
            const auto pos = e.position(i);
            CHECK(prompt.token_ids[i] == nn_oracle({pos.begin(), pos.end()}, vocab));
        }
    }
}

TEST_CASE("permuting positions permutes the decoded ids identically") {
    const auto vocab = random_vocab(128, 8, 51);
    Rng rng(52);
    PromptEmbedding e;
    e.prompt_len = 6;
    e.embed_dim = 8;
    e.values.resize(48);
    for (auto& v : e.values) v = rng.next_normal();
    const auto base = decode_embedding(e, vocab);

    const std::vector<std::size_t> perm{3, 0, 5, 1, 4, 2};
    PromptEmbedding shuffled;
    shuffled.prompt_len = 6;
    shuffled.embed_dim = 8;
    for (std::size_t i : perm) {
        const auto pos = e.position(i);
        shuffled.values.insert(shuffled.values.end(), pos.begin(), pos.end());
    }
    const auto permuted = decode_embedding(shuffled, vocab);
    for (std::size_t i = 0; i < perm.size(); ++i) {
        CHECK(permuted.token_ids[i] == base.token_ids[perm[i]]);
    }
}

TEST_CASE("concat join mode concatenates without separators") {
    std::vector<std::string> tokens{"ab", "cd", "ef"};
    Mat emb(3, 2);
    emb.at(0, 0) = 1.0;
    emb.at(1, 0) = 2.0;
    emb.at(2, 0) = 3.0;
    const SurrogateVocab vocab(std::move(tokens), std::move(emb), JoinMode::Concat);
    CHECK(vocab.join({2, 0, 1}) == "efabcd");

    const auto path = temp_file("svec_concat.svec");
    save_vocab(vocab, path);
    const auto loaded = load_vocab(path);
    CHECK(loaded.join_mode() == JoinMode::Concat);
    CHECK(loaded.join({0, 1}) == "abcd");
}
