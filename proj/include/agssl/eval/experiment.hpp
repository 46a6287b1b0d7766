#pragma once
// Nested cross-validation sweep over (embedding, paradigm, learner,
// supervision ratio) cells with label-scarcity masking and a runtime
// leakage audit.

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include "agssl/common.hpp"
#include "agssl/corpus.hpp"
#include "agssl/eval/folds.hpp"
#include "agssl/eval/grid.hpp"
#include "agssl/eval/metrics.hpp"
#include "agssl/features.hpp"
#include "agssl/learners/classifier.hpp"
#include "agssl/ssl/label_spreading.hpp"
#include "agssl/ssl/self_training.hpp"
#include "agssl/text.hpp"

namespace agssl {

enum class Paradigm : std::uint8_t { Supervised, SelfTraining, LabelSpreading };

inline constexpr std::string_view to_string(Paradigm p) {
    switch (p) {
        case Paradigm::Supervised: return "supervised";
        case Paradigm::SelfTraining: return "self_training";
        case Paradigm::LabelSpreading: return "label_spreading";
    }
    return "?";
}

inline std::optional<Paradigm> parse_paradigm(std::string_view s) {
    if (s == "supervised") return Paradigm::Supervised;
    if (s == "self_training") return Paradigm::SelfTraining;
    if (s == "label_spreading") return Paradigm::LabelSpreading;
    return std::nullopt;
}

class LeakageError : public Error {
public:
    using Error::Error;
};

// Featurized corpus for one embedding model. Labelled rows carry Similar or
// Variant; the genuine unlabelled pool has no labels at all.
struct Dataset {
    std::string embedding;
    Matrix x;
    std::vector<Label> y;
    std::vector<Subtype> subtypes;
    std::vector<std::string> ids;
    Matrix x_unlab;
    std::vector<Subtype> unlab_subtypes;
    std::vector<std::string> unlab_ids;

    void validate() const {
        if (x.rows() != y.size() || y.size() != subtypes.size() || y.size() != ids.size())
            throw DomainError("dataset '" + embedding + "': labelled arrays differ in length");
        if (x_unlab.rows() != unlab_subtypes.size() || x_unlab.rows() != unlab_ids.size())
            throw DomainError("dataset '" + embedding + "': unlabelled arrays differ in length");
        if (x_unlab.rows() > 0 && x.rows() > 0 && x_unlab.cols() != x.cols())
            throw DomainError("dataset '" + embedding + "': feature widths differ");
        for (auto l : y)
            if (l == Label::Unlabelled) throw DomainError("dataset '" + embedding + "': Unlabelled row in labelled set");
        std::unordered_set<std::string> seen;
        for (const auto* v : {&ids, &unlab_ids})
            for (const auto& id : *v)
                if (!seen.insert(id).second) throw DomainError("dataset '" + embedding + "': duplicate pair id " + id);
    }
};

inline std::string pair_id(const PairExample& p) { return p.a + "|" + p.b; }

inline Dataset make_dataset(const EmbeddingStore& store, const Corpus& corpus,
                            PairFeatureKind kind = PairFeatureKind::DiffMean) {
    Dataset d;
    d.embedding = store.model_name();
    const auto lab = corpus.labelled();
    const auto unl = corpus.unlabelled();
    auto fl = featurize_corpus(store, lab, kind);
    auto fu = featurize_corpus(store, unl, kind);
    d.x = std::move(fl.x);
    d.y = std::move(fl.labels);
    d.subtypes = std::move(fl.subtypes);
    for (const auto& p : lab) d.ids.push_back(pair_id(p));
    d.x_unlab = std::move(fu.x);
    d.unlab_subtypes = std::move(fu.subtypes);
    for (const auto& p : unl) d.unlab_ids.push_back(pair_id(p));
    return d;
}

struct ExperimentConfig {
    std::vector<Paradigm> paradigms = {Paradigm::Supervised, Paradigm::SelfTraining, Paradigm::LabelSpreading};
    std::vector<LearnerKind> learners = {LearnerKind::RF, LearnerKind::SVM};
    std::vector<double> ratios = {0.25, 0.5, 0.75, 1.0};
    std::uint64_t seed = 42;
    std::size_t outer_k = 5;
    std::size_t inner_k = 4;
    std::size_t bootstrap_resamples = 1000;
    double ci_level = 0.95;
    RfGrid rf_grid;
    SvmGrid svm_grid;
    SelfTrainingGrid st_grid;
    LabelSpreadingGrid ls_grid;
    GraphMetric graph_metric = GraphMetric::Euclidean;
    std::size_t unlabelled_cap = 0;  // 0 keeps the whole genuine unlabelled pool
    bool use_unlabelled = true;      // genuine unlabelled pool joins SSL training
    unsigned threads = 1;

    bool operator==(const ExperimentConfig&) const = default;
};

struct CellKey {
    std::string embedding;
    Paradigm paradigm = Paradigm::Supervised;
    std::string learner;  // "RF", "SVM", or "kNN" for label spreading
    double ratio = 1.0;

    std::string str() const {
        return embedding + "/" + std::string(to_string(paradigm)) + "/" + learner + "/" + text::format_double(ratio);
    }
};

struct FoldRecord {
    std::vector<std::size_t> test;   // labelled row indices
    std::vector<Label> predicted;    // aligned with test
    std::string hyperparameters;
    bool converged = true;           // label spreading
    std::size_t pseudo_labels = 0;   // self-training promotions
};

struct SummaryRow {
    std::string scope;  // subtype name, "pooled" (binary F1 over all pairs) or "macro_subtype"
    double mean_f1 = 0.0;
    Interval ci;
    std::vector<double> fold_f1;
};

struct CellResult {
    CellKey key;
    bool ok = true;
    std::string error;
    std::vector<FoldRecord> folds;
    std::vector<SummaryRow> rows;

    const SummaryRow* row(std::string_view scope) const {
        for (const auto& r : rows)
            if (r.scope == scope) return &r;
        return nullptr;
    }
};

struct ExperimentReport {
    std::vector<CellResult> cells;
    std::size_t leakage_checks = 0;
    std::vector<std::string> warnings;

    bool all_ok() const {
        return std::all_of(cells.begin(), cells.end(), [](const CellResult& c) { return c.ok; });
    }
    const CellResult* find(std::string_view embedding, Paradigm p, std::string_view learner, double ratio) const {
        for (const auto& c : cells)
            if (c.key.embedding == embedding && c.key.paradigm == p && c.key.learner == learner && c.key.ratio == ratio)
                return &c;
        return nullptr;
    }
};

inline std::vector<CellKey> plan_cells(const ExperimentConfig& cfg, const std::vector<std::string>& embeddings) {
    std::vector<CellKey> cells;
    for (const auto& e : embeddings)
        for (auto p : cfg.paradigms) {
            std::vector<std::string> learners;
            if (p == Paradigm::LabelSpreading) learners = {"kNN"};
            else
                for (auto l : cfg.learners) learners.emplace_back(to_string(l));
            for (const auto& l : learners)
                for (double r : cfg.ratios) cells.push_back({e, p, l, r});
        }
    return cells;
}

inline void validate_config(const ExperimentConfig& cfg) {
    if (cfg.paradigms.empty()) throw DomainError("config: no paradigms");
    if (cfg.ratios.empty()) throw DomainError("config: no ratios");
    for (double r : cfg.ratios)
        if (!is_supported_ratio(r)) throw DomainError("config: unsupported ratio " + text::format_double(r));
    const bool needs_learner = std::any_of(cfg.paradigms.begin(), cfg.paradigms.end(),
                                           [](Paradigm p) { return p != Paradigm::LabelSpreading; });
    if (needs_learner && cfg.learners.empty()) throw DomainError("config: no learners");
    if (cfg.outer_k < 2 || cfg.inner_k < 2) throw DomainError("config: fold counts must be >= 2");
    if (cfg.bootstrap_resamples == 0) throw DomainError("config: bootstrap_resamples must be positive");
    if (!(cfg.ci_level > 0 && cfg.ci_level < 1)) throw DomainError("config: ci_level must lie in (0, 1)");
    if (cfg.rf_grid.configs().empty() || cfg.svm_grid.configs().empty() || cfg.st_grid.configs().empty() ||
        cfg.ls_grid.configs().empty())
        throw DomainError("config: empty hyperparameter grid");
    for (double t : cfg.st_grid.threshold)
        if (!(t >= 0.5 && t <= 1.0)) throw DomainError("config: self-training threshold outside [0.5, 1]");
    for (double a : cfg.ls_grid.alpha)
        if (!(a > 0.0 && a < 1.0)) throw DomainError("config: label spreading alpha outside (0, 1)");
}

namespace detail {

class LeakageAudit {
public:
    void require_disjoint(const std::string& what, const std::unordered_set<std::string>& test,
                          const std::vector<std::string>& pool) {
        for (const auto& id : pool)
            if (test.count(id)) throw LeakageError("leakage: test pair " + id + " appears in " + what);
        ++checks_;
    }
    void require_disjoint(const std::string& what, std::span<const std::size_t> a, std::span<const std::size_t> b) {
        std::unordered_set<std::size_t> s(a.begin(), a.end());
        for (auto i : b)
            if (s.count(i)) throw LeakageError("leakage: index " + std::to_string(i) + " shared in " + what);
        ++checks_;
    }
    std::size_t checks() const { return checks_; }

private:
    std::size_t checks_ = 0;
};

template <class T>
std::vector<T> gather(const std::vector<T>& v, std::span<const std::size_t> idx) {
    std::vector<T> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(v[i]);
    return out;
}

inline double fold_f1(const std::vector<Label>& y, std::span<const std::size_t> rows, const std::vector<Label>& pred) {
    std::vector<Label> truth;
    for (auto i : rows) truth.push_back(y[i]);
    return f1_score(truth, pred);
}

// Labels for a graph whose first `n_labelled` rows are labelled; every other
// row enters unlabelled.
inline std::vector<Label> graph_labels(std::span<const Label> labelled, std::size_t total) {
    std::vector<Label> y(total, Label::Unlabelled);
    std::copy(labelled.begin(), labelled.end(), y.begin());
    return y;
}

struct FoldTask {
    std::size_t dataset = 0;
    double ratio = 1.0;
    std::size_t fold = 0;
};

// Everything one outer fold of one (embedding, ratio) contributes, keyed by
// cell index.
struct FoldOutput {
    std::map<std::size_t, FoldRecord> records;
    std::map<std::size_t, std::string> errors;
    std::size_t leakage_checks = 0;
};

class FoldRunner {
public:
    FoldRunner(const ExperimentConfig& cfg, const Dataset& data, const FoldPlan& plan,
               const std::vector<std::size_t>& unlab_rows)
        : cfg_(cfg), data_(data), plan_(plan), unlab_rows_(unlab_rows) {}

    // cell_of(paradigm, learner) gives the cell index or npos when the cell
    // is not part of the sweep.
    template <class CellOf>
    FoldOutput run(double ratio, std::size_t f, const CellOf& cell_of) {
        FoldOutput out;
        const Split& outer = plan_.outer[f];
        const MaskPlan mask = mask_labels(outer.train, data_.y, ratio,
                                          derive_seed(cfg_.seed, "mask|" + text::format_double(ratio) + "|" + std::to_string(f)));
        const auto inner = stratified_kfold(mask.retained, data_.y, data_.subtypes, cfg_.inner_k,
                                            inner_fold_seed(plan_.seed, f)).splits;

        // Pool of training-visible rows without labels: PUL rows then the
        // genuine unlabelled pool.
        Matrix pool = Matrix::vstack(data_.x.select_rows(mask.pul),
                                     cfg_.use_unlabelled ? data_.x_unlab.select_rows(unlab_rows_) : Matrix());
        if (pool.rows() == 0) pool = Matrix(0, data_.x.cols());

        audit_fold(outer, mask, inner);

        const Matrix x_ret = data_.x.select_rows(mask.retained);
        const std::vector<Label> y_ret = gather(data_.y, mask.retained);
        const Matrix x_test = data_.x.select_rows(outer.test);

        for (auto learner : cfg_.learners) {
            const std::size_t sup = cell_of(Paradigm::Supervised, std::string(to_string(learner)));
            const std::size_t st = cell_of(Paradigm::SelfTraining, std::string(to_string(learner)));
            if (sup == npos && st == npos) continue;
            std::optional<ClassifierSpec> base;
            try {
                base = tune_base(learner, f, inner);
                if (sup != npos) {
                    const auto model = train(*base, x_ret, y_ret);
                    out.records[sup] = {outer.test, predict(model, x_test), base->describe()};
                }
            } catch (const LeakageError&) {
                throw;
            } catch (const std::exception& e) {
                if (sup != npos) out.errors[sup] = e.what();
                if (st != npos) out.errors[st] = e.what();
                continue;
            }
            if (st == npos) continue;
            try {
                out.records[st] = run_self_training(*base, f, inner, pool, x_ret, y_ret, x_test, outer.test);
            } catch (const LeakageError&) {
                throw;
            } catch (const std::exception& e) {
                out.errors[st] = e.what();
            }
        }

        if (const std::size_t ls = cell_of(Paradigm::LabelSpreading, "kNN"); ls != npos) {
            try {
                out.records[ls] = run_label_spreading(inner, pool, x_ret, y_ret, x_test, outer.test);
            } catch (const LeakageError&) {
                throw;
            } catch (const std::exception& e) {
                out.errors[ls] = e.what();
            }
        }
        out.leakage_checks = audit_.checks();
        return out;
    }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    void audit_fold(const Split& outer, const MaskPlan& mask, const std::vector<Split>& inner) {
        std::unordered_set<std::string> test_ids;
        for (auto i : outer.test) test_ids.insert(data_.ids[i]);
        audit_.require_disjoint("retained labels", test_ids, gather(data_.ids, mask.retained));
        audit_.require_disjoint("pseudo-unlabelled pool", test_ids, gather(data_.ids, mask.pul));
        if (cfg_.use_unlabelled) {
            std::vector<std::string> u;
            for (auto i : unlab_rows_) u.push_back(data_.unlab_ids[i]);
            audit_.require_disjoint("genuine unlabelled pool", test_ids, u);
        }
        audit_.require_disjoint("retained/PUL partition", mask.retained, mask.pul);
        for (const auto& s : inner) {
            audit_.require_disjoint("inner split", s.train, s.test);
            std::unordered_set<std::string> val_ids;
            for (auto i : s.test) val_ids.insert(data_.ids[i]);
            std::vector<std::string> train_ids;
            for (auto i : s.train) train_ids.push_back(data_.ids[i]);
            audit_.require_disjoint("inner training labels", val_ids, train_ids);
        }
    }

    std::uint64_t model_seed(std::size_t f, std::optional<std::size_t> inner_fold) const {
        std::string key = "model|" + std::to_string(f);
        if (inner_fold) key += "|" + std::to_string(*inner_fold);
        return derive_seed(cfg_.seed, key);
    }

    ClassifierSpec tune_base(LearnerKind learner, std::size_t f, const std::vector<Split>& inner) {
        auto eval_spec = [&](ClassifierSpec spec, std::size_t k) {
            spec.seed = model_seed(f, k);
            const auto tr = inner[k].train;
            const auto va = inner[k].test;
            const auto model = train(spec, data_.x.select_rows(tr), gather(data_.y, tr));
            return fold_f1(data_.y, va, predict(model, data_.x.select_rows(va)));
        };
        ClassifierSpec best{learner, {}, {}, model_seed(f, std::nullopt)};
        if (learner == LearnerKind::RF) {
            const auto res = grid_search<RfParams>(cfg_.rf_grid.configs(), inner.size(), [&](const RfParams& p, std::size_t k) {
                return eval_spec({LearnerKind::RF, p, {}, 0}, k);
            });
            best.rf = res.best;
        } else {
            const auto res = grid_search<SvmParams>(cfg_.svm_grid.configs(), inner.size(), [&](const SvmParams& p, std::size_t k) {
                return eval_spec({LearnerKind::SVM, {}, p, 0}, k);
            });
            best.svm = res.best;
        }
        return best;
    }

    FoldRecord run_self_training(const ClassifierSpec& base, std::size_t f, const std::vector<Split>& inner, const Matrix& pool, const Matrix& x_ret,
                                 const std::vector<Label>& y_ret, const Matrix& x_test,
                                 const std::vector<std::size_t>& test) {
        auto grid = cfg_.st_grid.configs();
        const auto res = grid_search<SelfTrainingSpec>(grid, inner.size(), [&](const SelfTrainingSpec& s, std::size_t k) {
            SelfTrainingSpec spec = s;
            spec.base = base;
            spec.base.seed = model_seed(f, k);
            const auto tr = inner[k].train;
            const auto va = inner[k].test;
            const auto r = self_train(spec, data_.x.select_rows(tr), gather(data_.y, tr), pool);
            return fold_f1(data_.y, va, predict(r.model, data_.x.select_rows(va)));
        });
        SelfTrainingSpec spec = res.best;
        spec.base = base;
        const auto r = self_train(spec, x_ret, y_ret, pool);
        FoldRecord rec{test, predict(r.model, x_test), base.describe() + ";" + spec.describe()};
        rec.pseudo_labels = r.audit.size();
        return rec;
    }

    // Transductive: evaluation rows enter the graph unlabelled and are read
    // back from the propagated scores.
    FoldRecord run_label_spreading(const std::vector<Split>& inner, const Matrix& pool,
                                   const Matrix& x_ret, const std::vector<Label>& y_ret, const Matrix& x_test,
                                   const std::vector<std::size_t>& test) {
        const auto grid = cfg_.ls_grid.configs();
        int max_k = 0;
        for (const auto& g : grid) max_k = std::max(max_k, g.n_neighbors);

        struct InnerGraph {
            std::optional<KnnIndex> index;
            std::map<int, SparseGraph> graphs;
            std::vector<Label> y;
            std::vector<std::size_t> val_rows;
            std::size_t n_train = 0;
        };
        std::vector<InnerGraph> cache(inner.size());
        auto graph_for = [&](std::size_t k, int n_neighbors) -> std::pair<InnerGraph*, const SparseGraph*> {
            auto& c = cache[k];
            if (!c.index) {
                const auto tr = inner[k].train;
                c.val_rows = inner[k].test;
                const Matrix nodes = Matrix::vstack(
                    Matrix::vstack(data_.x.select_rows(tr), data_.x.select_rows(c.val_rows)), pool);
                c.y = graph_labels(gather(data_.y, tr), nodes.rows());
                c.n_train = tr.size();
                c.index.emplace(nodes, static_cast<std::size_t>(max_k), cfg_.graph_metric);
            }
            if (static_cast<std::size_t>(n_neighbors) > c.index->max_k() || c.index->size() <= static_cast<std::size_t>(n_neighbors))
                throw DomainError("n_neighbors " + std::to_string(n_neighbors) + " not below graph size " +
                                  std::to_string(c.index->size()));
            auto it = c.graphs.find(n_neighbors);
            if (it == c.graphs.end())
                it = c.graphs.emplace(n_neighbors, c.index->normalized_graph(static_cast<std::size_t>(n_neighbors))).first;
            return {&c, &it->second};
        };

        const auto res = grid_search<LabelSpreadingSpec>(grid, inner.size(), [&](const LabelSpreadingSpec& s, std::size_t k) {
            auto [c, g] = graph_for(k, s.n_neighbors);
            const auto r = label_spread(s, *g, c->y);
            std::vector<Label> pred(r.labels.begin() + static_cast<std::ptrdiff_t>(c->n_train),
                                    r.labels.begin() + static_cast<std::ptrdiff_t>(c->n_train + c->val_rows.size()));
            return fold_f1(data_.y, c->val_rows, pred);
        });

        const Matrix nodes = Matrix::vstack(Matrix::vstack(x_ret, x_test), pool);
        const auto y = graph_labels(y_ret, nodes.rows());
        std::size_t labelled_rows = 0;
        for (auto l : y) labelled_rows += l != Label::Unlabelled;
        if (labelled_rows != y_ret.size()) throw LeakageError("leakage: graph label matrix has rows beyond the retained labels");
        const auto g = build_knn_graph(nodes, static_cast<std::size_t>(res.best.n_neighbors), cfg_.graph_metric);
        const auto r = label_spread(res.best, g, y);
        FoldRecord rec{test,
                       std::vector<Label>(r.labels.begin() + static_cast<std::ptrdiff_t>(y_ret.size()),
                                          r.labels.begin() + static_cast<std::ptrdiff_t>(y_ret.size() + test.size())),
                       res.best.describe()};
        rec.converged = r.converged;
        return rec;
    }

    const ExperimentConfig& cfg_;
    const Dataset& data_;
    const FoldPlan& plan_;
    const std::vector<std::size_t>& unlab_rows_;
    LeakageAudit audit_;
};

inline void summarize(CellResult& cell, const Dataset& data, const ExperimentConfig& cfg) {
    std::vector<Subtype> present;
    for (auto st : kAllSubtypes)
        if (std::find(data.subtypes.begin(), data.subtypes.end(), st) != data.subtypes.end()) present.push_back(st);

    const std::size_t n_folds = cell.folds.size();
    std::vector<std::vector<Label>> truth(n_folds);
    std::vector<std::size_t> sizes(n_folds);
    for (std::size_t f = 0; f < n_folds; ++f) {
        for (auto i : cell.folds[f].test) truth[f].push_back(data.y[i]);
        sizes[f] = truth[f].size();
    }

    // F1 of fold f restricted to `scope` (a subtype, or every pair), over the
    // given positions within the fold.
    auto scoped_f1 = [&](std::size_t f, std::optional<Subtype> scope, const std::vector<std::size_t>& positions) {
        Confusion c;
        for (auto p : positions) {
            if (scope && data.subtypes[cell.folds[f].test[p]] != *scope) continue;
            const bool t = truth[f][p] == Label::Variant, q = cell.folds[f].predicted[p] == Label::Variant;
            if (t && q) ++c.tp;
            else if (!t && q) ++c.fp;
            else if (t && !q) ++c.fn;
            else ++c.tn;
        }
        return f1_from(c);
    };
    auto macro = [&](std::size_t f, const std::vector<std::size_t>& positions) {
        double s = 0;
        for (auto st : present) s += scoped_f1(f, st, positions);
        return present.empty() ? 0.0 : s / static_cast<double>(present.size());
    };

    auto make_row = [&](const std::string& name, const std::function<double(std::size_t, const std::vector<std::size_t>&)>& stat) {
        SummaryRow row;
        row.scope = name;
        for (std::size_t f = 0; f < n_folds; ++f) {
            std::vector<std::size_t> all(sizes[f]);
            std::iota(all.begin(), all.end(), std::size_t{0});
            row.fold_f1.push_back(stat(f, all));
        }
        row.mean_f1 = std::accumulate(row.fold_f1.begin(), row.fold_f1.end(), 0.0) / static_cast<double>(n_folds);
        row.ci = bootstrap_groups(
            sizes,
            [&](const std::vector<std::vector<std::size_t>>& draw) {
                double s = 0;
                for (std::size_t f = 0; f < n_folds; ++f) s += stat(f, draw[f]);
                return s / static_cast<double>(n_folds);
            },
            cfg.bootstrap_resamples, cfg.ci_level, derive_seed(cfg.seed, "bootstrap|" + cell.key.str() + "|" + name));
        // Report intervals always contain the point estimate.
        row.ci.low = std::min(row.ci.low, row.mean_f1);
        row.ci.high = std::max(row.ci.high, row.mean_f1);
        cell.rows.push_back(std::move(row));
    };

    for (auto st : present)
        make_row(std::string(to_string(st)), [&, st](std::size_t f, const std::vector<std::size_t>& pos) { return scoped_f1(f, st, pos); });
    make_row("pooled", [&](std::size_t f, const std::vector<std::size_t>& pos) { return scoped_f1(f, std::nullopt, pos); });
    make_row("macro_subtype", macro);
}

}  // namespace detail

inline ExperimentReport run_experiment(const std::vector<Dataset>& datasets, const ExperimentConfig& cfg) {
    validate_config(cfg);
    if (datasets.empty()) throw DomainError("run_experiment: no datasets");
    for (const auto& d : datasets) d.validate();

    std::vector<std::string> names;
    for (const auto& d : datasets) names.push_back(d.embedding);
    const auto keys = plan_cells(cfg, names);

    ExperimentReport report;
    std::vector<FoldPlan> plans;
    std::vector<std::vector<std::size_t>> unlab_rows;
    for (const auto& d : datasets) {
        plans.push_back(make_folds(d.y, d.subtypes, derive_seed(cfg.seed, "folds"), cfg.outer_k, cfg.inner_k));
        for (const auto& w : plans.back().warnings) report.warnings.push_back(d.embedding + ": " + w);
        std::vector<std::size_t> rows(d.x_unlab.rows());
        std::iota(rows.begin(), rows.end(), std::size_t{0});
        if (cfg.unlabelled_cap > 0 && rows.size() > cfg.unlabelled_cap) {
            Rng rng(derive_seed(cfg.seed, "unlabelled-cap"));
            shuffle(rows, rng);
            rows.resize(cfg.unlabelled_cap);
            std::sort(rows.begin(), rows.end());
        }
        unlab_rows.push_back(std::move(rows));
    }

    std::vector<detail::FoldTask> tasks;
    for (std::size_t d = 0; d < datasets.size(); ++d)
        for (double r : cfg.ratios)
            for (std::size_t f = 0; f < cfg.outer_k; ++f) tasks.push_back({d, r, f});

    std::vector<std::optional<detail::FoldOutput>> outputs(tasks.size());
    std::exception_ptr fatal;
    std::mutex fatal_mu;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= tasks.size()) return;
            const auto& task = tasks[t];
            const auto& data = datasets[task.dataset];
            auto cell_of = [&](Paradigm p, const std::string& learner) {
                for (std::size_t c = 0; c < keys.size(); ++c)
                    if (keys[c].embedding == data.embedding && keys[c].paradigm == p && keys[c].learner == learner &&
                        keys[c].ratio == task.ratio)
                        return c;
                return detail::FoldRunner::npos;
            };
            try {
                detail::FoldRunner runner(cfg, data, plans[task.dataset], unlab_rows[task.dataset]);
                outputs[t] = runner.run(task.ratio, task.fold, cell_of);
            } catch (const LeakageError&) {
                std::lock_guard lock(fatal_mu);
                if (!fatal) fatal = std::current_exception();
                return;
            } catch (const std::exception& e) {
                detail::FoldOutput out;
                for (std::size_t c = 0; c < keys.size(); ++c)
                    if (keys[c].embedding == data.embedding && keys[c].ratio == task.ratio) out.errors[c] = e.what();
                outputs[t] = std::move(out);
            }
        }
    };
    const unsigned n_threads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(tasks.size())));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    }
    if (fatal) std::rethrow_exception(fatal);

    report.cells.resize(keys.size());
    for (std::size_t c = 0; c < keys.size(); ++c) {
        report.cells[c].key = keys[c];
        report.cells[c].folds.resize(cfg.outer_k);
    }
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        const auto& out = *outputs[t];
        report.leakage_checks += out.leakage_checks;
        for (const auto& [c, rec] : out.records) report.cells[c].folds[tasks[t].fold] = rec;
        for (const auto& [c, err] : out.errors) {
            auto& cell = report.cells[c];
            if (cell.ok) cell.error = "fold " + std::to_string(tasks[t].fold) + ": " + err;
            cell.ok = false;
        }
    }
    for (auto& cell : report.cells) {
        if (!cell.ok) {
            cell.folds.clear();
            continue;
        }
        const auto& data = *std::find_if(datasets.begin(), datasets.end(),
                                         [&](const Dataset& d) { return d.embedding == cell.key.embedding; });
        detail::summarize(cell, data, cfg);
    }
    return report;
}

}  // namespace agssl
