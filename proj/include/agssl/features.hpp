#pragma once
// Per-strain embedding store (text and binary encodings) and symmetric pair
// features built from two strain embeddings.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "agssl/common.hpp"
#include "agssl/corpus.hpp"
#include "agssl/text.hpp"

namespace agssl {

// Output widths of the supported protein language models.
inline std::optional<std::size_t> known_model_dim(std::string_view model) {
    if (model == "esm2" || model == "esm2_t30_150M") return 640;
    if (model == "protbert") return 1024;
    if (model == "prott5" || model == "prott5_xl_u50") return 1024;
    if (model == "protvec") return 100;
    return std::nullopt;
}

class EmbeddingStore {
public:
    EmbeddingStore(std::string model_name, std::size_t dim) : model_(std::move(model_name)), dim_(dim) {
        if (dim_ == 0) throw DomainError("embedding dimension must be positive");
        if (model_.empty() || model_.find_first_of(",\n\r") != std::string::npos)
            throw DomainError("invalid embedding model name '" + model_ + "'");
        if (auto expected = known_model_dim(model_); expected && *expected != dim_)
            throw DomainError("model '" + model_ + "' has dimension " + std::to_string(*expected) +
                              ", file declares " + std::to_string(dim_));
    }

    const std::string& model_name() const { return model_; }
    std::size_t dim() const { return dim_; }
    std::size_t size() const { return ids_.size(); }

    void add(const std::string& strain_id, std::vector<double> v) {
        if (v.size() != dim_)
            throw DomainError("embedding for '" + strain_id + "' has length " + std::to_string(v.size()) +
                              ", expected " + std::to_string(dim_));
        for (double x : v)
            if (!std::isfinite(x)) throw DomainError("embedding for '" + strain_id + "' has a non-finite value");
        if (!index_.emplace(strain_id, ids_.size()).second)
            throw DomainError("duplicate strain id '" + strain_id + "' in embedding store");
        ids_.push_back(strain_id);
        values_.insert(values_.end(), v.begin(), v.end());
    }

    bool contains(const std::string& id) const { return index_.count(id) != 0; }

    std::span<const double> vector(const std::string& id) const {
        auto it = index_.find(id);
        if (it == index_.end()) throw DomainError("no embedding for strain '" + id + "'");
        return {values_.data() + it->second * dim_, dim_};
    }

    // Insertion order.
    const std::vector<std::string>& ids() const { return ids_; }

private:
    std::string model_;
    std::size_t dim_;
    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Text encoding: `#model=<name>,dim=<D>,count=<N>` then `strain_id,v1,...,vD`.

inline EmbeddingStore read_embeddings_text(std::istream& in, const std::string& source = "<embeddings>") {
    std::string line;
    std::size_t lineno = 0;
    auto where = [&] { return source + ":" + std::to_string(lineno) + ": "; };
    do {
        if (!std::getline(in, line)) throw FormatError(source + ": empty embedding file");
        ++lineno;
    } while (text::trim(line).empty());

    auto header = text::trim(line);
    if (header.empty() || header.front() != '#') throw FormatError(where() + "missing '#model=...' header");
    std::map<std::string, std::string, std::less<>> kv;
    for (auto part : text::split(header.substr(1), ',')) {
        auto eq = part.find('=');
        if (eq == std::string_view::npos) throw FormatError(where() + "malformed header field '" + std::string(part) + "'");
        kv[std::string(text::trim(part.substr(0, eq)))] = std::string(text::trim(part.substr(eq + 1)));
    }
    if (!kv.count("model") || !kv.count("dim") || !kv.count("count"))
        throw FormatError(where() + "header must declare model, dim and count");
    auto dim = text::parse_int(kv["dim"]);
    auto count = text::parse_int(kv["count"]);
    if (!dim || *dim <= 0) throw FormatError(where() + "bad dim");
    if (!count || *count < 0) throw FormatError(where() + "bad count");

    EmbeddingStore store(kv["model"], static_cast<std::size_t>(*dim));
    while (std::getline(in, line)) {
        ++lineno;
        auto t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        auto fields = text::split(t, ',');
        std::string id(text::trim(fields[0]));
        if (id.empty()) throw FormatError(where() + "empty strain id");
        if (fields.size() - 1 != store.dim())
            throw FormatError(where() + "dimension mismatch for strain '" + id + "': " +
                              std::to_string(fields.size() - 1) + " values, expected " +
                              std::to_string(store.dim()));
        std::vector<double> v(store.dim());
        for (std::size_t k = 0; k < v.size(); ++k) {
            auto x = text::parse_double(fields[k + 1]);
            if (!x) throw FormatError(where() + "bad number in row for '" + id + "'");
            v[k] = *x;
        }
        if (store.contains(id)) throw FormatError(where() + "duplicate strain id '" + id + "'");
        store.add(id, std::move(v));
    }
    if (store.size() != static_cast<std::size_t>(*count))
        throw FormatError(source + ": header declares count=" + std::to_string(*count) + " but file has " +
                          std::to_string(store.size()) + " rows");
    return store;
}

inline void write_embeddings_text(std::ostream& out, const EmbeddingStore& store) {
    out << "#model=" << store.model_name() << ",dim=" << store.dim() << ",count=" << store.size() << '\n';
    for (const auto& id : store.ids()) {
        out << id;
        for (double x : store.vector(id)) out << ',' << text::format_double(x);
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Binary encoding: "EMB1", u32 name length + UTF-8 model name, u32 dim,
// u32 count, then per record u32 id length + id + dim float32, all
// little-endian.

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32(std::istream& in, const std::string& what) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw FormatError("truncated embedding file reading " + what);
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
           (std::uint32_t(b[3]) << 24);
}

inline std::string get_string(std::istream& in, const std::string& what) {
    const auto n = get_u32(in, what + " length");
    if (n > (1u << 20)) throw FormatError("implausible " + what + " length");
    std::string s(n, '\0');
    if (n && !in.read(s.data(), n)) throw FormatError("truncated embedding file reading " + what);
    return s;
}

}  // namespace detail

inline void write_embeddings_binary(std::ostream& out, const EmbeddingStore& store) {
    out.write("EMB1", 4);
    detail::put_u32(out, static_cast<std::uint32_t>(store.model_name().size()));
    out.write(store.model_name().data(), static_cast<std::streamsize>(store.model_name().size()));
    detail::put_u32(out, static_cast<std::uint32_t>(store.dim()));
    detail::put_u32(out, static_cast<std::uint32_t>(store.size()));
    for (const auto& id : store.ids()) {
        detail::put_u32(out, static_cast<std::uint32_t>(id.size()));
        out.write(id.data(), static_cast<std::streamsize>(id.size()));
        for (double x : store.vector(id)) detail::put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
    }
}

inline EmbeddingStore read_embeddings_binary(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "EMB1", 4) != 0) throw FormatError("bad embedding magic (expected EMB1)");
    auto model = detail::get_string(in, "model name");
    const auto dim = detail::get_u32(in, "dim");
    const auto count = detail::get_u32(in, "count");
    EmbeddingStore store(model, dim);
    for (std::uint32_t r = 0; r < count; ++r) {
        auto id = detail::get_string(in, "strain id");
        std::vector<double> v(dim);
        for (auto& x : v) x = static_cast<double>(std::bit_cast<float>(detail::get_u32(in, "vector for '" + id + "'")));
        if (store.contains(id)) throw FormatError("duplicate strain id '" + id + "'");
        store.add(id, std::move(v));
    }
    if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after " + std::to_string(count) + " records");
    return store;
}

// Detects the encoding from the leading bytes.
inline EmbeddingStore load_embeddings(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open embedding file '" + path + "'");
    char magic[4] = {};
    in.read(magic, 4);
    const bool binary = in.gcount() == 4 && std::memcmp(magic, "EMB1", 4) == 0;
    in.clear();
    in.seekg(0);
    return binary ? read_embeddings_binary(in) : read_embeddings_text(in, path);
}

// ---------------------------------------------------------------------------
// Pair features

enum class PairFeatureKind : std::uint8_t { DiffMean, Diff };

// |a - b| followed by (a + b) / 2; the mean half is dropped for Diff.
inline std::vector<double> featurize_pair(std::span<const double> a, std::span<const double> b,
                                          PairFeatureKind kind = PairFeatureKind::DiffMean) {
    if (a.size() != b.size())
        throw DomainError("featurize_pair: length mismatch " + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
    const std::size_t d = a.size();
    std::vector<double> x(kind == PairFeatureKind::DiffMean ? 2 * d : d);
    for (std::size_t k = 0; k < d; ++k) x[k] = std::fabs(a[k] - b[k]);
    if (kind == PairFeatureKind::DiffMean)
        for (std::size_t k = 0; k < d; ++k) x[d + k] = (a[k] + b[k]) / 2.0;
    return x;
}

struct FeatureSet {
    Matrix x;
    std::vector<Label> labels;
    std::vector<Subtype> subtypes;
};

inline FeatureSet featurize_corpus(const EmbeddingStore& store, const std::vector<PairExample>& pairs,
                                   PairFeatureKind kind = PairFeatureKind::DiffMean) {
    std::vector<std::string> missing;
    for (const auto& p : pairs)
        for (const auto* id : {&p.a, &p.b})
            if (!store.contains(*id) && std::find(missing.begin(), missing.end(), *id) == missing.end())
                missing.push_back(*id);
    if (!missing.empty()) {
        std::sort(missing.begin(), missing.end());
        std::string msg = "missing embeddings for " + std::to_string(missing.size()) + " strain(s):";
        for (const auto& m : missing) msg += " " + m;
        throw DomainError(msg);
    }
    const std::size_t width = kind == PairFeatureKind::DiffMean ? 2 * store.dim() : store.dim();
    FeatureSet fs{Matrix(pairs.size(), width), {}, {}};
    fs.labels.reserve(pairs.size());
    fs.subtypes.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        auto x = featurize_pair(store.vector(pairs[i].a), store.vector(pairs[i].b), kind);
        std::copy(x.begin(), x.end(), fs.x.row(i).begin());
        fs.labels.push_back(pairs[i].label);
        fs.subtypes.push_back(pairs[i].subtype);
    }
    return fs;
}

}  // namespace agssl
