#pragma once
// Shared vocabulary types: labels, subtypes, dense matrices, errors and
// deterministic seed derivation.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace agssl {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

enum class Label : std::uint8_t { Similar = 0, Variant = 1, Unlabelled = 2 };

enum class Subtype : std::uint8_t { H1N1 = 0, H3N2 = 1, H5N1 = 2, H9N2 = 3 };

inline constexpr std::array<Subtype, 4> kAllSubtypes = {Subtype::H1N1, Subtype::H3N2,
                                                        Subtype::H5N1, Subtype::H9N2};

inline constexpr std::string_view to_string(Subtype s) {
    switch (s) {
        case Subtype::H1N1: return "H1N1";
        case Subtype::H3N2: return "H3N2";
        case Subtype::H5N1: return "H5N1";
        case Subtype::H9N2: return "H9N2";
    }
    return "?";
}

inline std::optional<Subtype> parse_subtype(std::string_view s) {
    for (auto st : kAllSubtypes)
        if (to_string(st) == s) return st;
    return std::nullopt;
}

inline constexpr std::string_view to_string(Label l) {
    switch (l) {
        case Label::Similar: return "Similar";
        case Label::Variant: return "Variant";
        case Label::Unlabelled: return "Unlabelled";
    }
    return "?";
}

inline std::optional<Label> parse_label(std::string_view s) {
    if (s == "Similar") return Label::Similar;
    if (s == "Variant") return Label::Variant;
    if (s == "Unlabelled") return Label::Unlabelled;
    return std::nullopt;
}

// Class column index used by probability matrices: Similar = 0, Variant = 1.
inline constexpr std::size_t class_index(Label l) { return l == Label::Variant ? 1 : 0; }

// Row-major dense matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    const std::vector<double>& data() const { return data_; }

    void append_row(std::span<const double> values) {
        if (rows_ == 0 && cols_ == 0) cols_ = values.size();
        if (values.size() != cols_)
            throw DomainError("row length " + std::to_string(values.size()) +
                              " does not match matrix width " + std::to_string(cols_));
        data_.insert(data_.end(), values.begin(), values.end());
        ++rows_;
    }

    // Rows selected by index, in the given order.
    Matrix select_rows(std::span<const std::size_t> idx) const {
        Matrix out(idx.size(), cols_);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            auto src = row(idx[i]);
            std::copy(src.begin(), src.end(), out.row(i).begin());
        }
        return out;
    }

    // Vertical concatenation; widths must agree unless one side is empty.
    static Matrix vstack(const Matrix& top, const Matrix& bottom) {
        if (top.rows() == 0) return bottom;
        if (bottom.rows() == 0) return top;
        if (top.cols() != bottom.cols()) throw DomainError("vstack: width mismatch");
        Matrix out = top;
        out.data_.insert(out.data_.end(), bottom.data_.begin(), bottom.data_.end());
        out.rows_ += bottom.rows_;
        return out;
    }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// splitmix64 finalizer; used to derive independent RNG streams from a master seed.
inline constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a(std::string_view s,
                                     std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a) {
    return mix64(seed ^ mix64(a));
}

inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view key) {
    return mix64(seed ^ fnv1a(key));
}

using Rng = std::mt19937_64;

// Uniform integer in [0, n) by rejection sampling. Avoids the
// implementation-defined std::uniform_int_distribution so streams are
// identical across standard libraries.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = Rng::max() - Rng::max() % bound;
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return static_cast<std::size_t>(v % bound);
}

// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double standard_normal(Rng& rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

}  // namespace agssl
