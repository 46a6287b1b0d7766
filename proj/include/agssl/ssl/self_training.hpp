#pragma once
// Self-training wrapper: repeatedly fit the base learner on the labelled pool
// and promote confident predictions on the unlabelled pool as pseudo-labels.

#include <algorithm>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "agssl/common.hpp"
#include "agssl/learners/classifier.hpp"
#include "agssl/text.hpp"

namespace agssl {

enum class SelectionCriterion : std::uint8_t { Threshold, KBest };

inline constexpr std::string_view to_string(SelectionCriterion c) {
    return c == SelectionCriterion::Threshold ? "threshold" : "k_best";
}

inline std::optional<SelectionCriterion> parse_criterion(std::string_view s) {
    if (s == "threshold") return SelectionCriterion::Threshold;
    if (s == "k_best" || s == "k-best") return SelectionCriterion::KBest;
    return std::nullopt;
}

struct SelfTrainingSpec {
    ClassifierSpec base;
    SelectionCriterion criterion = SelectionCriterion::Threshold;
    double threshold = 0.75;
    int k_best = 10;
    int max_iter = 10;

    bool operator==(const SelfTrainingSpec&) const = default;

    std::string describe() const {
        std::string s = "criterion=" + std::string(to_string(criterion));
        if (criterion == SelectionCriterion::Threshold) s += ",threshold=" + text::format_double(threshold);
        else s += ",k_best=" + std::to_string(k_best);
        return s + ",max_iter=" + std::to_string(max_iter);
    }
};

struct Promotion {
    int iteration = 0;          // 1-based
    std::size_t instance = 0;   // row of the unlabelled matrix
    Label pseudo_label = Label::Variant;
    double confidence = 0.0;
};

struct SelfTrainingResult {
    TrainedModel model;
    std::vector<Promotion> audit;
    int iterations = 0;            // promotion rounds performed
    std::size_t final_labelled = 0;
    std::vector<std::size_t> pool_sizes;  // labelled pool size entering each fit
};

// Instances still unlabelled when the loop stops are left out of the final
// fit. Under k_best a candidate must also have confidence > 0.5.
inline SelfTrainingResult self_train(const SelfTrainingSpec& spec, const Matrix& x_lab, std::span<const Label> y_lab,
                                     const Matrix& x_unlab, unsigned threads = 1) {
    if (spec.max_iter <= 0) throw DomainError("self_train: max_iter must be positive");
    if (spec.criterion == SelectionCriterion::Threshold && !(spec.threshold >= 0.5))
        throw DomainError("self_train: threshold must be >= 0.5");
    if (spec.criterion == SelectionCriterion::KBest && spec.k_best <= 0)
        throw DomainError("self_train: k_best must be positive");
    check_training_input(x_lab, y_lab);
    if (x_unlab.rows() > 0 && x_unlab.cols() != x_lab.cols())
        throw DomainError("self_train: labelled and unlabelled feature widths differ");

    Matrix x_pool = x_lab;
    std::vector<Label> y_pool(y_lab.begin(), y_lab.end());
    std::vector<std::size_t> remaining(x_unlab.rows());
    std::iota(remaining.begin(), remaining.end(), std::size_t{0});

    std::vector<Promotion> audit;
    std::vector<std::size_t> pool_sizes;
    int iter = 0;
    while (!remaining.empty() && iter < spec.max_iter) {
        pool_sizes.push_back(y_pool.size());
        const TrainedModel model = train(spec.base, x_pool, y_pool, threads);

        struct Candidate {
            std::size_t pos;  // position in `remaining`
            Label label;
            double confidence;
        };
        std::vector<Candidate> scored;
        scored.reserve(remaining.size());
        for (std::size_t k = 0; k < remaining.size(); ++k) {
            const double pv = model.variant_probability(x_unlab.row(remaining[k]));
            const Label l = decide(1.0 - pv, pv);
            scored.push_back({k, l, std::max(pv, 1.0 - pv)});
        }

        std::vector<Candidate> chosen;
        if (spec.criterion == SelectionCriterion::Threshold) {
            for (const auto& c : scored)
                if (c.confidence >= spec.threshold) chosen.push_back(c);
        } else {
            std::stable_sort(scored.begin(), scored.end(),
                             [](const Candidate& a, const Candidate& b) { return a.confidence > b.confidence; });
            for (const auto& c : scored) {
                if (chosen.size() >= static_cast<std::size_t>(spec.k_best) || !(c.confidence > 0.5)) break;
                chosen.push_back(c);
            }
            std::sort(chosen.begin(), chosen.end(), [](const Candidate& a, const Candidate& b) { return a.pos < b.pos; });
        }
        if (chosen.empty()) break;

        ++iter;
        std::vector<bool> taken(remaining.size(), false);
        for (const auto& c : chosen) {
            const std::size_t inst = remaining[c.pos];
            x_pool.append_row(x_unlab.row(inst));
            y_pool.push_back(c.label);
            audit.push_back({iter, inst, c.label, c.confidence});
            taken[c.pos] = true;
        }
        std::vector<std::size_t> rest;
        rest.reserve(remaining.size() - chosen.size());
        for (std::size_t k = 0; k < remaining.size(); ++k)
            if (!taken[k]) rest.push_back(remaining[k]);
        remaining = std::move(rest);
    }

    pool_sizes.push_back(y_pool.size());
    // Pseudo-labels can collapse the pool to one class only if the original
    // labels did, which check_training_input already rejected.
    TrainedModel final_model = train(spec.base, x_pool, y_pool, threads);
    return {std::move(final_model), std::move(audit), iter, y_pool.size(), std::move(pool_sizes)};
}

// `iteration,pair_id,pseudo_label,confidence`; ids[i] names unlabelled row i.
inline void write_audit_csv(std::ostream& out, const std::vector<Promotion>& audit,
                            const std::vector<std::string>& ids) {
    out << "iteration,pair_id,pseudo_label,confidence\n";
    for (const auto& p : audit)
        out << p.iteration << ',' << (p.instance < ids.size() ? ids[p.instance] : std::to_string(p.instance)) << ','
            << to_string(p.pseudo_label) << ',' << text::format_double(p.confidence) << '\n';
}

}  // namespace agssl
