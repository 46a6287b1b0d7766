#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "agssl/features.hpp"

using namespace agssl;

namespace {

std::string text_file(const std::string& model, std::size_t dim, std::size_t rows, std::size_t short_row = SIZE_MAX) {
    std::ostringstream o;
    o << "#model=" << model << ",dim=" << dim << ",count=" << rows << "\n";
    for (std::size_t r = 0; r < rows; ++r) {
        o << "s" << r;
        const std::size_t w = r == short_row ? dim - 1 : dim;
        for (std::size_t k = 0; k < w; ++k) o << "," << (r + 1) * 0.25 + static_cast<double>(k);
        o << "\n";
    }
    return o.str();
}

EmbeddingStore random_store(const std::string& model, std::size_t dim, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    EmbeddingStore s(model, dim);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> v(dim);
        // float-representable values so the binary encoding round-trips exactly
        for (auto& x : v) x = static_cast<float>(standard_normal(rng));
        s.add("strain_" + std::to_string(i), v);
    }
    return s;
}

}  // namespace

TEST(Embeddings, TextLoadWellFormed) {
    std::istringstream in(text_file("protvec", 100, 5));
    const auto s = read_embeddings_text(in);
    EXPECT_EQ(s.size(), 5u);
    EXPECT_EQ(s.dim(), 100u);
    EXPECT_EQ(s.vector("s2")[3], 3.75);
}

TEST(Embeddings, ShortRowNamesStrain) {
    std::istringstream in(text_file("protvec", 100, 5, 2));
    try {
        read_embeddings_text(in);
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("'s2'"), std::string::npos) << e.what();
        EXPECT_NE(std::string(e.what()).find("99"), std::string::npos);
    }
}

TEST(Embeddings, DuplicateIdAndCountMismatchRejected) {
    std::istringstream dup("#model=toy,dim=2,count=2\na,1,2\na,3,4\n");
    EXPECT_THROW(read_embeddings_text(dup), FormatError);
    std::istringstream count("#model=toy,dim=2,count=3\na,1,2\nb,3,4\n");
    EXPECT_THROW(read_embeddings_text(count), FormatError);
    std::istringstream header("model=toy,dim=2,count=1\na,1,2\n");
    EXPECT_THROW(read_embeddings_text(header), FormatError);
}

TEST(Embeddings, KnownModelDimensions) {
    EXPECT_EQ(*known_model_dim("esm2"), 640u);
    EXPECT_EQ(*known_model_dim("protbert"), 1024u);
    EXPECT_EQ(*known_model_dim("prott5"), 1024u);
    EXPECT_EQ(*known_model_dim("protvec"), 100u);
    EXPECT_FALSE(known_model_dim("custom").has_value());
    EXPECT_THROW(EmbeddingStore("esm2", 320), DomainError);
    EXPECT_NO_THROW(EmbeddingStore("esm2", 640));
    EXPECT_NO_THROW(EmbeddingStore("custom", 3));
    std::istringstream in(text_file("esm2", 100, 1));
    EXPECT_THROW(read_embeddings_text(in), DomainError);
}

TEST(Embeddings, BinaryRoundTripAndLayout) {
    const auto s = random_store("protvec", 100, 5, 9);
    std::ostringstream out(std::ios::binary);
    write_embeddings_binary(out, s);
    const std::string bytes = out.str();
    // magic + (4 + 7) name + dim + count + 5 * (4 + 8 id + 400 floats)
    EXPECT_EQ(bytes.size(), 4u + 11u + 4u + 4u + 5u * (4u + 8u + 400u));
    EXPECT_EQ(bytes.substr(0, 4), "EMB1");
    std::uint32_t name_len = 0, dim = 0;
    std::memcpy(&name_len, bytes.data() + 4, 4);
    std::memcpy(&dim, bytes.data() + 15, 4);
    EXPECT_EQ(name_len, 7u);
    EXPECT_EQ(dim, 100u);

    std::istringstream in(bytes, std::ios::binary);
    const auto back = read_embeddings_binary(in);
    EXPECT_EQ(back.model_name(), "protvec");
    EXPECT_EQ(back.ids(), s.ids());
    for (const auto& id : s.ids()) {
        const auto a = s.vector(id), b = back.vector(id);
        EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
    }
}

TEST(Embeddings, BinaryTruncationDetected) {
    const auto s = random_store("toy", 4, 3, 1);
    std::ostringstream out(std::ios::binary);
    write_embeddings_binary(out, s);
    std::string bytes = out.str();
    bytes.resize(bytes.size() - 3);
    std::istringstream in(bytes, std::ios::binary);
    EXPECT_THROW(read_embeddings_binary(in), FormatError);
}

TEST(Embeddings, LoadDetectsEncoding) {
    const auto dir = std::filesystem::temp_directory_path() / "agssl_features_test";
    std::filesystem::create_directories(dir);
    const auto s = random_store("toy", 3, 4, 2);
    {
        std::ofstream t(dir / "a.emb");
        write_embeddings_text(t, s);
        std::ofstream b(dir / "b.emb", std::ios::binary);
        write_embeddings_binary(b, s);
    }
    const auto t = load_embeddings((dir / "a.emb").string());
    const auto b = load_embeddings((dir / "b.emb").string());
    EXPECT_EQ(t.ids(), b.ids());
    for (const auto& id : s.ids()) {
        const auto x = t.vector(id), y = b.vector(id);
        EXPECT_TRUE(std::equal(x.begin(), x.end(), y.begin()));
    }
    EXPECT_THROW(load_embeddings((dir / "missing.emb").string()), IoError);
}

TEST(PairFeatures, Examples) {
    const std::vector<double> a{1, 0}, b{0, 1};
    EXPECT_EQ(featurize_pair(a, b), (std::vector<double>{1, 1, 0.5, 0.5}));
    const std::vector<double> v{0.3, -2, 7};
    EXPECT_EQ(featurize_pair(v, v), (std::vector<double>{0, 0, 0, 0.3, -2, 7}));
    EXPECT_EQ(featurize_pair(a, b, PairFeatureKind::Diff), (std::vector<double>{1, 1}));
    EXPECT_THROW(featurize_pair(a, v), DomainError);
}

TEST(PairFeatures, SymmetricOnRandomVectors) {
    Rng rng(17);
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> u(8), w(8);
        for (auto& x : u) x = standard_normal(rng) * 100;
        for (auto& x : w) x = standard_normal(rng) * 100;
        EXPECT_EQ(featurize_pair(u, w), featurize_pair(w, u));
        const auto self = featurize_pair(u, u);
        EXPECT_TRUE(std::all_of(self.begin(), self.begin() + 8, [](double x) { return x == 0.0; }));
    }
}

TEST(PairFeatures, CorpusShapeLabelsAndMissingIds) {
    const auto s = random_store("toy", 4, 4, 5);
    std::vector<PairExample> pairs = {
        {"strain_0", "strain_1", Subtype::H1N1, 2.0, Label::Similar},
        {"strain_0", "strain_2", Subtype::H1N1, 8.0, Label::Variant},
        {"strain_1", "strain_3", Subtype::H1N1, std::nullopt, Label::Unlabelled},
    };
    const auto f = featurize_corpus(s, pairs);
    EXPECT_EQ(f.x.rows(), 3u);
    EXPECT_EQ(f.x.cols(), 8u);
    EXPECT_EQ(f.labels, (std::vector<Label>{Label::Similar, Label::Variant, Label::Unlabelled}));
    const auto row1 = featurize_pair(s.vector("strain_0"), s.vector("strain_2"));
    EXPECT_TRUE(std::equal(row1.begin(), row1.end(), f.x.row(1).begin()));
    EXPECT_EQ(featurize_corpus(s, pairs).x, f.x);

    const auto empty = featurize_corpus(s, {});
    EXPECT_EQ(empty.x.rows(), 0u);
    EXPECT_EQ(empty.x.cols(), 8u);

    pairs.push_back({"ghost_a", "ghost_b", Subtype::H1N1, std::nullopt, Label::Unlabelled});
    try {
        featurize_corpus(s, pairs);
        FAIL();
    } catch (const DomainError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("ghost_a"), std::string::npos);
        EXPECT_NE(msg.find("ghost_b"), std::string::npos);
    }
}
