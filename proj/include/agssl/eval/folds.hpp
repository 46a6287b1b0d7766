#pragma once
// Stratified nested fold plans and label-scarcity masks.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "agssl/common.hpp"

namespace agssl {

struct Split {
    std::vector<std::size_t> train;  // ascending
    std::vector<std::size_t> test;   // ascending
};

struct StratifiedFolds {
    std::vector<Split> splits;
    bool by_subtype = true;
    std::vector<std::string> warnings;
};

// Deals each stratum's shuffled members round-robin over k folds, carrying the
// fold cursor from one stratum to the next. Strata are (class, subtype) when
// every such cell has at least k members, otherwise class alone.
inline StratifiedFolds stratified_kfold(std::span<const std::size_t> indices, std::span<const Label> labels,
                                        std::span<const Subtype> subtypes, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw DomainError("stratified_kfold: k must be >= 2");
    if (indices.size() < k)
        throw DomainError("stratified_kfold: " + std::to_string(indices.size()) + " labelled examples for " +
                          std::to_string(k) + " folds");
    StratifiedFolds out;
    std::map<std::pair<int, int>, std::vector<std::size_t>> cells;
    for (auto i : indices) {
        if (labels[i] == Label::Unlabelled) throw DomainError("stratified_kfold: unlabelled index in fold input");
        cells[{static_cast<int>(labels[i]), static_cast<int>(subtypes[i])}].push_back(i);
    }
    for (const auto& [key, members] : cells)
        if (members.size() < k) out.by_subtype = false;
    if (!out.by_subtype) {
        out.warnings.push_back("some (class, subtype) cell has fewer than " + std::to_string(k) +
                               " examples; stratifying by class only");
        std::map<std::pair<int, int>, std::vector<std::size_t>> by_class;
        for (auto& [key, members] : cells) {
            auto& dst = by_class[{key.first, 0}];
            dst.insert(dst.end(), members.begin(), members.end());
        }
        cells = std::move(by_class);
    }

    Rng rng(seed);
    std::vector<std::vector<std::size_t>> tests(k);
    std::size_t cursor = 0;
    for (auto& [key, members] : cells) {
        std::sort(members.begin(), members.end());
        shuffle(members, rng);
        for (auto i : members) {
            tests[cursor].push_back(i);
            cursor = (cursor + 1) % k;
        }
    }
    std::vector<std::size_t> all(indices.begin(), indices.end());
    std::sort(all.begin(), all.end());
    for (auto& t : tests) {
        std::sort(t.begin(), t.end());
        Split s;
        s.test = t;
        std::set_difference(all.begin(), all.end(), t.begin(), t.end(), std::back_inserter(s.train));
        out.splits.push_back(std::move(s));
    }
    return out;
}

struct FoldPlan {
    std::size_t outer_k = 5;
    std::size_t inner_k = 4;
    std::uint64_t seed = 0;
    std::vector<Split> outer;
    std::vector<std::vector<Split>> inner;  // inner[f] partitions outer[f].train
    std::vector<std::string> warnings;
};

inline std::uint64_t inner_fold_seed(std::uint64_t plan_seed, std::size_t outer_fold) {
    return derive_seed(plan_seed, "inner|" + std::to_string(outer_fold));
}

inline FoldPlan make_folds(std::span<const Label> labels, std::span<const Subtype> subtypes, std::uint64_t seed,
                           std::size_t outer_k = 5, std::size_t inner_k = 4) {
    if (labels.size() != subtypes.size()) throw DomainError("make_folds: labels and subtypes differ in length");
    if (labels.size() < outer_k)
        throw DomainError("make_folds: " + std::to_string(labels.size()) + " labelled examples, need at least " +
                          std::to_string(outer_k));
    FoldPlan plan;
    plan.outer_k = outer_k;
    plan.inner_k = inner_k;
    plan.seed = seed;
    std::vector<std::size_t> all(labels.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    auto outer = stratified_kfold(all, labels, subtypes, outer_k, derive_seed(seed, "outer"));
    plan.outer = std::move(outer.splits);
    for (auto& w : outer.warnings) plan.warnings.push_back("outer: " + w);
    for (std::size_t f = 0; f < plan.outer.size(); ++f) {
        auto inner = stratified_kfold(plan.outer[f].train, labels, subtypes, inner_k, inner_fold_seed(seed, f));
        plan.inner.push_back(std::move(inner.splits));
        for (auto& w : inner.warnings) plan.warnings.push_back("inner " + std::to_string(f) + ": " + w);
    }
    return plan;
}

struct MaskPlan {
    double ratio = 1.0;
    std::vector<std::size_t> retained;  // ascending
    std::vector<std::size_t> pul;       // ascending; labels withheld
    int attempts = 1;
};

inline bool is_supported_ratio(double r) { return r == 0.25 || r == 0.5 || r == 0.75 || r == 1.0; }

// Keeps round(ratio * |train|) examples, allocated across classes by largest
// remainder; tied remainders are ordered by the sub-seed.
inline MaskPlan mask_labels(std::span<const std::size_t> train, std::span<const Label> labels, double ratio,
                            std::uint64_t seed) {
    if (!is_supported_ratio(ratio)) throw DomainError("mask_labels: ratio must be one of 0.25, 0.5, 0.75, 1.0");
    const std::size_t n = train.size();
    const auto target = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));

    std::vector<std::size_t> members[2];
    for (auto i : train) {
        if (labels[i] == Label::Unlabelled) throw DomainError("mask_labels: unlabelled index in training set");
        members[class_index(labels[i])].push_back(i);
    }
    for (auto& m : members) std::sort(m.begin(), m.end());

    for (int attempt = 1; attempt <= 10; ++attempt) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt - 1)));
        std::size_t quota[2];
        double frac[2];
        std::size_t assigned = 0;
        for (int c = 0; c < 2; ++c) {
            const double exact = static_cast<double>(members[c].size()) * static_cast<double>(target) /
                                 static_cast<double>(std::max<std::size_t>(n, 1));
            quota[c] = static_cast<std::size_t>(std::floor(exact));
            frac[c] = exact - std::floor(exact);
            assigned += quota[c];
        }
        int order[2] = {0, 1};
        if (uniform_index(rng, 2) == 1) std::swap(order[0], order[1]);
        std::stable_sort(order, order + 2, [&](int a, int b) { return frac[a] > frac[b]; });
        for (int r = 0; assigned < target && r < 2; ++r, ++assigned) ++quota[order[r]];

        bool eliminated = false;
        for (int c = 0; c < 2; ++c)
            if (!members[c].empty() && quota[c] == 0) eliminated = true;

        MaskPlan plan;
        plan.ratio = ratio;
        plan.attempts = attempt;
        for (int c = 0; c < 2; ++c) {
            auto shuffled = members[c];
            shuffle(shuffled, rng);
            plan.retained.insert(plan.retained.end(), shuffled.begin(),
                                 shuffled.begin() + static_cast<std::ptrdiff_t>(quota[c]));
            plan.pul.insert(plan.pul.end(), shuffled.begin() + static_cast<std::ptrdiff_t>(quota[c]), shuffled.end());
        }
        if (eliminated) continue;
        std::sort(plan.retained.begin(), plan.retained.end());
        std::sort(plan.pul.begin(), plan.pul.end());
        return plan;
    }
    throw DomainError("mask_labels: masking at ratio " + std::to_string(ratio) +
                      " eliminates a class after 10 attempts");
}

}  // namespace agssl
