#pragma once
// Common train / predict_proba / predict contract over the RF and SVM base
// learners, with a versioned binary serialization.

#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "agssl/bytes.hpp"
#include "agssl/common.hpp"
#include "agssl/learners/random_forest.hpp"
#include "agssl/learners/svm.hpp"
#include "agssl/text.hpp"

namespace agssl {

enum class LearnerKind : std::uint8_t { RF = 0, SVM = 1 };

inline constexpr std::string_view to_string(LearnerKind k) { return k == LearnerKind::RF ? "RF" : "SVM"; }

inline std::optional<LearnerKind> parse_learner(std::string_view s) {
    if (s == "RF") return LearnerKind::RF;
    if (s == "SVM") return LearnerKind::SVM;
    return std::nullopt;
}

struct ClassifierSpec {
    LearnerKind kind = LearnerKind::RF;
    RfParams rf;
    SvmParams svm;
    std::uint64_t seed = 0;

    bool operator==(const ClassifierSpec&) const = default;

    // Hyperparameters only, e.g. "n_estimators=50,max_depth=None".
    std::string describe() const {
        if (kind == LearnerKind::RF)
            return "n_estimators=" + std::to_string(rf.n_estimators) +
                   ",max_depth=" + (rf.max_depth ? std::to_string(*rf.max_depth) : std::string("None"));
        return "C=" + text::format_double(svm.c) + ",gamma=" + text::format_double(svm.gamma);
    }
};

inline void check_training_input(const Matrix& x, std::span<const Label> y) {
    if (x.rows() != y.size()) throw DomainError("train: feature rows and labels differ in length");
    std::size_t counts[2] = {0, 0};
    for (auto l : y) {
        if (l == Label::Unlabelled) throw DomainError("train: Unlabelled row in training labels");
        ++counts[class_index(l)];
    }
    if (counts[0] == 0 || counts[1] == 0)
        throw DomainError("train: single-class input (Similar=" + std::to_string(counts[0]) +
                          ", Variant=" + std::to_string(counts[1]) + ")");
    if (counts[0] < 2 || counts[1] < 2)
        throw DomainError("train: need at least 2 examples per class (Similar=" + std::to_string(counts[0]) +
                          ", Variant=" + std::to_string(counts[1]) + ")");
    for (double v : x.data())
        if (std::isnan(v)) throw DomainError("train: NaN in feature matrix");
}

class TrainedModel {
public:
    static constexpr std::uint8_t kFormatVersion = 1;

    TrainedModel(ClassifierSpec spec, std::size_t n_features, std::variant<RandomForest, SvmModel> state)
        : spec_(spec), n_features_(n_features), state_(std::move(state)) {}

    const ClassifierSpec& spec() const { return spec_; }
    std::size_t n_features() const { return n_features_; }
    const RandomForest* forest() const { return std::get_if<RandomForest>(&state_); }
    const SvmModel* svm() const { return std::get_if<SvmModel>(&state_); }

    double variant_probability(std::span<const double> x) const {
        if (const auto* rf = forest()) return rf->variant_fraction(x);
        return std::get<SvmModel>(state_).variant_probability(x);
    }

    // Columns (Similar, Variant).
    Matrix predict_proba(const Matrix& x) const {
        check_width(x);
        Matrix p(x.rows(), 2);
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const double v = variant_probability(x.row(i));
            p(i, 1) = v;
            p(i, 0) = 1.0 - v;
        }
        return p;
    }

    std::string serialize() const {
        ByteWriter w;
        w.bytes("AGSM");
        w.u8(kFormatVersion);
        w.u8(static_cast<std::uint8_t>(spec_.kind));
        w.u64(spec_.seed);
        w.i64(spec_.rf.n_estimators);
        w.i64(spec_.rf.max_depth ? *spec_.rf.max_depth : -1);
        w.f64(spec_.svm.c);
        w.f64(spec_.svm.gamma);
        w.u64(n_features_);
        if (const auto* rf = forest()) rf->serialize(w);
        else std::get<SvmModel>(state_).serialize(w);
        return w.take();
    }

    static TrainedModel deserialize(std::string_view blob) {
        ByteReader r(blob);
        if (r.bytes(4) != "AGSM") throw FormatError("not a model blob");
        if (const auto v = r.u8(); v != kFormatVersion)
            throw FormatError("unsupported model format version " + std::to_string(v));
        ClassifierSpec spec;
        const auto kind = r.u8();
        if (kind > 1) throw FormatError("unknown learner kind");
        spec.kind = static_cast<LearnerKind>(kind);
        spec.seed = r.u64();
        spec.rf.n_estimators = static_cast<int>(r.i64());
        const auto depth = r.i64();
        if (depth >= 0) spec.rf.max_depth = static_cast<int>(depth);
        spec.svm.c = r.f64();
        spec.svm.gamma = r.f64();
        const auto n_features = static_cast<std::size_t>(r.u64());
        std::variant<RandomForest, SvmModel> state =
            spec.kind == LearnerKind::RF ? std::variant<RandomForest, SvmModel>(RandomForest::deserialize(r))
                                         : std::variant<RandomForest, SvmModel>(SvmModel::deserialize(r));
        if (!r.done()) throw FormatError("trailing bytes in model blob");
        return TrainedModel(spec, n_features, std::move(state));
    }

    std::uint64_t digest() const { return fnv1a(serialize()); }

private:
    void check_width(const Matrix& x) const {
        if (x.rows() > 0 && x.cols() != n_features_)
            throw DomainError("predict: expected " + std::to_string(n_features_) + " features, got " +
                              std::to_string(x.cols()));
    }

    ClassifierSpec spec_;
    std::size_t n_features_;
    std::variant<RandomForest, SvmModel> state_;
};

inline TrainedModel train(const ClassifierSpec& spec, const Matrix& x, std::span<const Label> y,
                          unsigned threads = 1) {
    check_training_input(x, y);
    if (spec.kind == LearnerKind::RF)
        return TrainedModel(spec, x.cols(), RandomForest::train(spec.rf, spec.seed, x, y, threads));
    return TrainedModel(spec, x.cols(), SvmModel::train(spec.svm, spec.seed, x, y));
}

inline Matrix predict_proba(const TrainedModel& model, const Matrix& x) { return model.predict_proba(x); }

// Argmax; an exact tie goes to Variant.
inline Label decide(double p_similar, double p_variant) {
    return p_similar > p_variant ? Label::Similar : Label::Variant;
}

inline std::vector<Label> predict(const TrainedModel& model, const Matrix& x) {
    const Matrix p = model.predict_proba(x);
    std::vector<Label> out(p.rows());
    for (std::size_t i = 0; i < p.rows(); ++i) out[i] = decide(p(i, 0), p(i, 1));
    return out;
}

}  // namespace agssl
