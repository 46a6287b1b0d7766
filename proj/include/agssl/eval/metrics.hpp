#pragma once
// Binary F1 (Variant is the positive class) and percentile-bootstrap
// confidence intervals.

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "agssl/common.hpp"

namespace agssl {

struct Confusion {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

inline Confusion confusion(std::span<const Label> y_true, std::span<const Label> y_pred,
                           Label positive = Label::Variant) {
    if (y_true.size() != y_pred.size()) throw DomainError("f1_score: length mismatch");
    Confusion c;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const bool t = y_true[i] == positive, p = y_pred[i] == positive;
        if (t && p) ++c.tp;
        else if (!t && p) ++c.fp;
        else if (t && !p) ++c.fn;
        else ++c.tn;
    }
    return c;
}

// 2TP / (2TP + FP + FN); 0 when the denominator is 0.
inline double f1_from(const Confusion& c) {
    const std::size_t den = 2 * c.tp + c.fp + c.fn;
    return den == 0 ? 0.0 : static_cast<double>(2 * c.tp) / static_cast<double>(den);
}

inline double f1_score(std::span<const Label> y_true, std::span<const Label> y_pred,
                       Label positive = Label::Variant) {
    if (y_true.size() != y_pred.size()) throw DomainError("f1_score: length mismatch");
    if (y_true.empty()) throw DomainError("f1_score: empty input");
    return f1_from(confusion(y_true, y_pred, positive));
}

// Linear-interpolation quantile of sorted data.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw DomainError("quantile of empty sample");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

struct Interval {
    double low = 0.0;
    double high = 0.0;
};

// One group per outer fold. Each resample draws every group's examples with
// replacement (group sizes kept) and hands the resampled index lists to
// `statistic`.
inline Interval bootstrap_groups(const std::vector<std::size_t>& group_sizes,
                                 const std::function<double(const std::vector<std::vector<std::size_t>>&)>& statistic,
                                 std::size_t n_resamples, double level, std::uint64_t seed) {
    if (n_resamples == 0) throw DomainError("bootstrap: n_resamples must be positive");
    if (!(level > 0.0 && level < 1.0)) throw DomainError("bootstrap: level must lie in (0, 1)");
    std::size_t total = 0;
    for (auto g : group_sizes) total += g;
    if (total == 0) throw DomainError("bootstrap: empty outcomes");
    Rng rng(seed);
    std::vector<double> stats(n_resamples);
    std::vector<std::vector<std::size_t>> draw(group_sizes.size());
    for (std::size_t r = 0; r < n_resamples; ++r) {
        for (std::size_t g = 0; g < group_sizes.size(); ++g) {
            draw[g].resize(group_sizes[g]);
            for (auto& d : draw[g]) d = uniform_index(rng, group_sizes[g]);
        }
        stats[r] = statistic(draw);
    }
    std::sort(stats.begin(), stats.end());
    const double tail = (1.0 - level) / 2.0;
    return {quantile_sorted(stats, tail), quantile_sorted(stats, 1.0 - tail)};
}

// Percentile CI of F1 over resampled test pairs. A resample without
// positives scores 0.
inline Interval bootstrap_ci(std::span<const Label> y_true, std::span<const Label> y_pred,
                             std::size_t n_resamples = 1000, double level = 0.95, std::uint64_t seed = 0) {
    if (y_true.size() != y_pred.size()) throw DomainError("bootstrap_ci: length mismatch");
    if (y_true.empty()) throw DomainError("bootstrap_ci: empty outcomes");
    std::vector<Label> t(y_true.size()), p(y_pred.size());
    return bootstrap_groups(
        {y_true.size()},
        [&](const std::vector<std::vector<std::size_t>>& draw) {
            const auto& idx = draw[0];
            for (std::size_t k = 0; k < idx.size(); ++k) {
                t[k] = y_true[idx[k]];
                p[k] = y_pred[idx[k]];
            }
            return f1_from(confusion(t, p));
        },
        n_resamples, level, seed);
}

}  // namespace agssl
