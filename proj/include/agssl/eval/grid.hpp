#pragma once
// Hyperparameter grids and exhaustive inner-fold grid search.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "agssl/common.hpp"
#include "agssl/learners/classifier.hpp"
#include "agssl/ssl/label_spreading.hpp"
#include "agssl/ssl/self_training.hpp"

namespace agssl {

inline std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
    std::vector<double> out;
    if (count == 1) return {lo};
    const double a = std::log10(lo), b = std::log10(hi);
    for (std::size_t k = 0; k < count; ++k) {
        const double e = a + (b - a) * static_cast<double>(k) / static_cast<double>(count - 1);
        const double r = std::round(e);
        out.push_back(std::fabs(e - r) < 1e-12 ? std::pow(10.0, r) : std::pow(10.0, e));
    }
    return out;
}

struct RfGrid {
    std::vector<int> n_estimators = {10, 50, 100, 150, 200};
    std::vector<std::optional<int>> max_depth = {5, 10, 15, 20, std::nullopt};

    std::vector<RfParams> configs() const {
        std::vector<RfParams> out;
        for (int n : n_estimators)
            for (const auto& d : max_depth) out.push_back({n, d});
        return out;
    }
    bool operator==(const RfGrid&) const = default;
};

// C and gamma each span [1e-6, 1e1] on 8 log-spaced points.
struct SvmGrid {
    std::vector<double> c = log_spaced(1e-6, 1e1, 8);
    std::vector<double> gamma = log_spaced(1e-6, 1e1, 8);

    std::vector<SvmParams> configs() const {
        std::vector<SvmParams> out;
        for (double cc : c)
            for (double g : gamma) out.push_back({cc, g});
        return out;
    }
    bool operator==(const SvmGrid&) const = default;
};

struct SelfTrainingGrid {
    std::vector<SelectionCriterion> criterion = {SelectionCriterion::Threshold, SelectionCriterion::KBest};
    std::vector<double> threshold = {0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95, 0.99};
    std::vector<int> k_best = {3, 5, 10, 15};
    std::vector<int> max_iter = {5, 10, 15, 20};

    // The base classifier is filled in by the caller.
    std::vector<SelfTrainingSpec> configs() const {
        std::vector<SelfTrainingSpec> out;
        for (auto c : criterion) {
            if (c == SelectionCriterion::Threshold) {
                for (double t : threshold)
                    for (int m : max_iter) out.push_back({{}, c, t, 0, m});
            } else {
                for (int k : k_best)
                    for (int m : max_iter) out.push_back({{}, c, 0.5, k, m});
            }
        }
        return out;
    }
    bool operator==(const SelfTrainingGrid&) const = default;
};

struct LabelSpreadingGrid {
    std::vector<double> alpha = {0.1, 0.2, 0.3};
    std::vector<int> n_neighbors = {3, 5, 7, 11, 20, 30, 40, 50, 75, 100};
    std::vector<int> max_iter = {20, 25, 30, 35, 40, 45, 50};
    double tol = 1e-3;

    std::vector<LabelSpreadingSpec> configs() const {
        std::vector<LabelSpreadingSpec> out;
        for (double a : alpha)
            for (int k : n_neighbors)
                for (int m : max_iter) out.push_back({k, a, m, tol});
        return out;
    }
    bool operator==(const LabelSpreadingGrid&) const = default;
};

// Model-size key used to break score ties.
inline double model_size(const RfParams& p) { return p.n_estimators; }
inline double model_size(const SvmParams& p) { return p.c; }
inline double model_size(const SelfTrainingSpec& p) { return p.max_iter; }
inline double model_size(const LabelSpreadingSpec& p) { return p.n_neighbors; }

template <class Config>
struct GridResult {
    Config best{};
    std::size_t best_index = 0;
    double best_score = 0.0;
    std::vector<std::optional<double>> scores;  // mean inner F1; nullopt when the config failed
    std::vector<std::string> failures;
};

// `evaluate(config, fold)` returns that fold's F1 or throws. The highest mean
// wins; ties go to the smaller model, then to the earlier grid entry.
template <class Config>
GridResult<Config> grid_search(const std::vector<Config>& grid, std::size_t n_folds,
                               const std::function<double(const Config&, std::size_t)>& evaluate) {
    if (grid.empty()) throw DomainError("grid_search: empty grid");
    if (n_folds == 0) throw DomainError("grid_search: no folds");
    GridResult<Config> res;
    res.scores.resize(grid.size());
    bool have = false;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double sum = 0.0;
        try {
            for (std::size_t f = 0; f < n_folds; ++f) sum += evaluate(grid[g], f);
        } catch (const std::exception& e) {
            res.failures.push_back("config " + std::to_string(g) + ": " + e.what());
            continue;
        }
        const double mean = sum / static_cast<double>(n_folds);
        res.scores[g] = mean;
        const bool better = !have || mean > res.best_score ||
                            (mean == res.best_score && model_size(grid[g]) < model_size(res.best));
        if (better) {
            res.best = grid[g];
            res.best_index = g;
            res.best_score = mean;
            have = true;
        }
    }
    if (!have) {
        std::string msg = "grid_search: all " + std::to_string(grid.size()) + " configurations failed";
        for (std::size_t k = 0; k < res.failures.size() && k < 5; ++k) msg += "; " + res.failures[k];
        throw DomainError(msg);
    }
    return res;
}

}  // namespace agssl
