#pragma once
// Random forest of CART trees: bootstrap resamples, Gini impurity,
// sqrt(#features) candidate features per split, hard-vote probabilities.

#include <algorithm>
#include <cmath>
#include <optional>
#include <thread>
#include <vector>

#include "agssl/bytes.hpp"
#include "agssl/common.hpp"

namespace agssl {

struct RfParams {
    int n_estimators = 100;
    std::optional<int> max_depth;  // nullopt: grow until pure

    bool operator==(const RfParams&) const = default;
};

struct TreeNode {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;     // go left when x[feature] <= threshold
    std::int32_t left = -1;
    std::int32_t right = -1;
    Label leaf = Label::Variant;
};

class DecisionTree {
public:
    Label predict(std::span<const double> x) const {
        std::int32_t n = 0;
        while (nodes_[n].feature >= 0)
            n = x[nodes_[n].feature] <= nodes_[n].threshold ? nodes_[n].left : nodes_[n].right;
        return nodes_[n].leaf;
    }

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t depth() const { return depth_from(0); }

    void serialize(ByteWriter& w) const {
        w.u32(static_cast<std::uint32_t>(nodes_.size()));
        for (const auto& n : nodes_) {
            w.u32(static_cast<std::uint32_t>(n.feature));
            w.f64(n.threshold);
            w.u32(static_cast<std::uint32_t>(n.left));
            w.u32(static_cast<std::uint32_t>(n.right));
            w.u8(static_cast<std::uint8_t>(n.leaf));
        }
    }

    static DecisionTree deserialize(ByteReader& r) {
        DecisionTree t;
        t.nodes_.resize(r.u32());
        for (auto& n : t.nodes_) {
            n.feature = static_cast<std::int32_t>(r.u32());
            n.threshold = r.f64();
            n.left = static_cast<std::int32_t>(r.u32());
            n.right = static_cast<std::int32_t>(r.u32());
            n.leaf = static_cast<Label>(r.u8());
        }
        return t;
    }

private:
    friend class TreeBuilder;

    std::size_t depth_from(std::int32_t n) const {
        if (nodes_[n].feature < 0) return 0;
        return 1 + std::max(depth_from(nodes_[n].left), depth_from(nodes_[n].right));
    }

    std::vector<TreeNode> nodes_;
};

// Grows one tree over a bootstrap sample. Split ties resolve to the lowest
// feature index, then the lowest threshold.
class TreeBuilder {
public:
    TreeBuilder(const Matrix& x, std::span<const Label> y, std::optional<int> max_depth, Rng& rng)
        : x_(x), y_(y), max_depth_(max_depth), rng_(rng),
          mtry_(std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(x.cols()))))) {}

    DecisionTree build(std::vector<std::size_t> sample) {
        DecisionTree tree;
        tree_ = &tree;
        grow(sample, 0);
        return tree;
    }

private:
    struct Split {
        std::size_t feature = 0;
        double threshold = 0.0;
        double impurity = 0.0;  // weighted child Gini, lower is better
        bool found = false;
    };

    static double gini(std::size_t pos, std::size_t n) {
        if (n == 0) return 0.0;
        const double p = static_cast<double>(pos) / static_cast<double>(n);
        return 2.0 * p * (1.0 - p);
    }

    std::int32_t grow(std::vector<std::size_t>& sample, int depth) {
        const auto id = static_cast<std::int32_t>(tree_->nodes_.size());
        tree_->nodes_.push_back({});
        std::size_t pos = 0;
        for (auto i : sample) pos += y_[i] == Label::Variant;
        const std::size_t n = sample.size();
        // Ties go to Variant.
        tree_->nodes_[id].leaf = 2 * pos >= n ? Label::Variant : Label::Similar;

        const bool pure = pos == 0 || pos == n;
        const bool depth_capped = max_depth_ && depth >= *max_depth_;
        if (pure || n < 2 || depth_capped) return id;

        const Split s = best_split(sample, pos);
        if (!s.found) return id;

        std::vector<std::size_t> left, right;
        for (auto i : sample) (x_(i, s.feature) <= s.threshold ? left : right).push_back(i);
        sample.clear();
        sample.shrink_to_fit();
        const auto l = grow(left, depth + 1);
        const auto r = grow(right, depth + 1);
        auto& node = tree_->nodes_[id];
        node.feature = static_cast<std::int32_t>(s.feature);
        node.threshold = s.threshold;
        node.left = l;
        node.right = r;
        return id;
    }

    Split best_split(const std::vector<std::size_t>& sample, std::size_t pos_total) {
        const std::size_t p = x_.cols();
        std::vector<std::size_t> features(p);
        for (std::size_t f = 0; f < p; ++f) features[f] = f;

        Split best;
        std::vector<std::size_t> order(sample);
        // Partial Fisher-Yates: draw candidates one at a time. Past mtry we
        // keep drawing only while no usable split has been seen.
        for (std::size_t k = 0; k < p; ++k) {
            if (k >= mtry_ && best.found) break;
            std::swap(features[k], features[k + uniform_index(rng_, p - k)]);
            const std::size_t f = features[k];
            evaluate_feature(f, order, pos_total, best);
        }
        return best;
    }

    void evaluate_feature(std::size_t f, std::vector<std::size_t>& order, std::size_t pos_total, Split& best) const {
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double va = x_(a, f), vb = x_(b, f);
            return va < vb || (va == vb && a < b);
        });
        const std::size_t n = order.size();
        std::size_t pos_left = 0;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            pos_left += y_[order[k]] == Label::Variant;
            const double v = x_(order[k], f);
            const double next = x_(order[k + 1], f);
            if (!(v < next)) continue;
            const std::size_t nl = k + 1, nr = n - nl;
            const double imp = (static_cast<double>(nl) * gini(pos_left, nl) +
                                static_cast<double>(nr) * gini(pos_total - pos_left, nr)) /
                               static_cast<double>(n);
            double thr = v + (next - v) / 2.0;
            if (!(thr < next)) thr = v;
            const bool better = !best.found || imp < best.impurity ||
                                (imp == best.impurity &&
                                 (f < best.feature || (f == best.feature && thr < best.threshold)));
            if (better) best = {f, thr, imp, true};
        }
    }

    const Matrix& x_;
    std::span<const Label> y_;
    std::optional<int> max_depth_;
    Rng& rng_;
    std::size_t mtry_;
    DecisionTree* tree_ = nullptr;
};

class RandomForest {
public:
    // Tree t draws from its own stream derive_seed(seed, t), so the result
    // does not depend on how trees are spread over threads.
    static RandomForest train(const RfParams& params, std::uint64_t seed, const Matrix& x,
                              std::span<const Label> y, unsigned threads = 1) {
        if (params.n_estimators <= 0) throw DomainError("n_estimators must be positive");
        if (params.max_depth && *params.max_depth <= 0) throw DomainError("max_depth must be positive");
        RandomForest rf;
        rf.trees_.resize(static_cast<std::size_t>(params.n_estimators));
        auto work = [&](std::size_t t0, std::size_t stride) {
            for (std::size_t t = t0; t < rf.trees_.size(); t += stride) {
                Rng rng(derive_seed(seed, t));
                auto sample = bootstrap_sample(rng, x.rows());
                TreeBuilder builder(x, y, params.max_depth, rng);
                rf.trees_[t] = builder.build(std::move(sample));
            }
        };
        threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(rf.trees_.size())));
        if (threads == 1) {
            work(0, 1);
        } else {
            std::vector<std::jthread> pool;
            for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
        }
        return rf;
    }

    // In-bag indices of tree t, regenerated from the training seed.
    static std::vector<std::size_t> bootstrap_sample(Rng& rng, std::size_t n) {
        std::vector<std::size_t> sample(n);
        for (auto& s : sample) s = uniform_index(rng, n);
        return sample;
    }

    static std::vector<bool> in_bag_mask(std::uint64_t seed, std::size_t tree, std::size_t n) {
        Rng rng(derive_seed(seed, tree));
        std::vector<bool> mask(n, false);
        for (auto i : bootstrap_sample(rng, n)) mask[i] = true;
        return mask;
    }

    // Fraction of trees voting Variant.
    double variant_fraction(std::span<const double> x) const {
        std::size_t votes = 0;
        for (const auto& t : trees_) votes += t.predict(x) == Label::Variant;
        return static_cast<double>(votes) / static_cast<double>(trees_.size());
    }

    std::size_t size() const { return trees_.size(); }
    const DecisionTree& tree(std::size_t i) const { return trees_[i]; }

    void serialize(ByteWriter& w) const {
        w.u32(static_cast<std::uint32_t>(trees_.size()));
        for (const auto& t : trees_) t.serialize(w);
    }
    static RandomForest deserialize(ByteReader& r) {
        RandomForest rf;
        rf.trees_.resize(r.u32());
        for (auto& t : rf.trees_) t = DecisionTree::deserialize(r);
        return rf;
    }

private:
    std::vector<DecisionTree> trees_;
};

}  // namespace agssl
