#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "agssl/ssl/label_spreading.hpp"
#include "agssl/ssl/self_training.hpp"

using namespace agssl;

namespace {

// Solves A X = B for small dense systems by Gauss-Jordan with partial pivoting.
Matrix solve(Matrix a, Matrix b) {
    const std::size_t n = a.rows();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::fabs(a(r, c)) > std::fabs(a(piv, c))) piv = r;
        for (std::size_t k = 0; k < n; ++k) std::swap(a(c, k), a(piv, k));
        for (std::size_t k = 0; k < b.cols(); ++k) std::swap(b(c, k), b(piv, k));
        const double d = a(c, c);
        for (std::size_t k = 0; k < n; ++k) a(c, k) /= d;
        for (std::size_t k = 0; k < b.cols(); ++k) b(c, k) /= d;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const double f = a(r, c);
            for (std::size_t k = 0; k < n; ++k) a(r, k) -= f * a(c, k);
            for (std::size_t k = 0; k < b.cols(); ++k) b(r, k) -= f * b(c, k);
        }
    }
    return b;
}

// (1 - alpha) (I - alpha S)^-1 Y
Matrix closed_form(const Matrix& s, const std::vector<Label>& y, double alpha) {
    const std::size_t n = s.rows();
    Matrix a(n, n), yy(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) a(i, j) = (i == j ? 1.0 : 0.0) - alpha * s(i, j);
        if (y[i] != Label::Unlabelled) yy(i, class_index(y[i])) = 1.0 - alpha;
    }
    return solve(a, yy);
}

// D^-1/2 W D^-1/2 from a dense 0/1 adjacency.
SparseGraph normalize(const std::vector<std::vector<int>>& w) {
    const std::size_t n = w.size();
    std::vector<double> deg(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) deg[i] += w[i][j];
    SparseGraph g;
    g.n = n;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            if (w[i][j]) {
                g.col.push_back(j);
                g.val.push_back(1.0 / std::sqrt(deg[i] * deg[j]));
            }
        g.row_ptr.push_back(g.col.size());
    }
    return g;
}

Matrix random_points(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    Matrix x(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) x(i, k) = standard_normal(rng);
    return x;
}

void blobs(std::size_t per_class, double sep, std::uint64_t seed, Matrix& x, std::vector<Label>& y) {
    Rng rng(seed);
    x = Matrix(0, 2);
    y.clear();
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        const Label l = i % 2 ? Label::Variant : Label::Similar;
        const double c = l == Label::Variant ? sep / 2 : -sep / 2;
        x.append_row(std::vector<double>{c + standard_normal(rng), c + standard_normal(rng)});
        y.push_back(l);
    }
}

ClassifierSpec rf(int trees = 25, std::uint64_t seed = 3) { return {LearnerKind::RF, {trees, std::nullopt}, {}, seed}; }

}  // namespace

// ---------------------------------------------------------------------------
// Self-training

TEST(SelfTraining, NoConfidentInstanceReturnsBaseModel) {
    Matrix x, u;
    std::vector<Label> y, yu;
    blobs(10, 3, 1, x, y);
    blobs(20, 3, 2, u, yu);
    const SelfTrainingSpec spec{rf(), SelectionCriterion::Threshold, 1.01, 0, 10};
    const auto r = self_train(spec, x, y, u);
    EXPECT_TRUE(r.audit.empty());
    EXPECT_EQ(r.iterations, 0);
    EXPECT_EQ(r.model.digest(), train(rf(), x, y).digest());
}

TEST(SelfTraining, EmptyPoolReducesToSupervised) {
    Matrix x;
    std::vector<Label> y;
    blobs(15, 2, 4, x, y);
    for (auto crit : {SelectionCriterion::Threshold, SelectionCriterion::KBest}) {
        const SelfTrainingSpec spec{rf(), crit, 0.6, 5, 10};
        const auto r = self_train(spec, x, y, Matrix(0, 2));
        EXPECT_EQ(r.model.digest(), train(rf(), x, y).digest());
        EXPECT_EQ(r.final_labelled, y.size());
    }
}

TEST(SelfTraining, TwoLabelsPerClassGrowToWholeBlobs) {
    Matrix x, u, test;
    std::vector<Label> y, yu, yt;
    blobs(2, 8, 5, x, y);
    blobs(25, 8, 6, u, yu);
    blobs(100, 8, 7, test, yt);
    const auto base = train(rf(), x, y);
    const SelfTrainingSpec spec{rf(), SelectionCriterion::Threshold, 0.9, 0, 10};
    const auto r = self_train(spec, x, y, u);
    EXPECT_GE(r.final_labelled, 40u);
    auto acc = [&](const TrainedModel& m) {
        const auto p = predict(m, test);
        std::size_t ok = 0;
        for (std::size_t i = 0; i < p.size(); ++i) ok += p[i] == yt[i];
        return static_cast<double>(ok) / static_cast<double>(p.size());
    };
    EXPECT_GE(acc(r.model), acc(base));
}

TEST(SelfTraining, PoolMonotoneAndNoDoublePromotion) {
    Matrix x, u;
    std::vector<Label> y, yu;
    blobs(6, 1.5, 8, x, y);
    blobs(60, 1.5, 9, u, yu);
    for (auto crit : {SelectionCriterion::Threshold, SelectionCriterion::KBest}) {
        for (int max_iter : {1, 3, 20}) {
            const SelfTrainingSpec spec{rf(15), crit, 0.7, 4, max_iter};
            const auto r = self_train(spec, x, y, u);
            EXPECT_LE(r.iterations, max_iter);
            for (std::size_t k = 1; k < r.pool_sizes.size(); ++k) EXPECT_GE(r.pool_sizes[k], r.pool_sizes[k - 1]);
            std::set<std::size_t> seen;
            std::map<int, int> per_iter;
            for (const auto& p : r.audit) {
                EXPECT_TRUE(seen.insert(p.instance).second);
                EXPECT_GE(p.iteration, 1);
                EXPECT_LE(p.iteration, r.iterations);
                ++per_iter[p.iteration];
                if (crit == SelectionCriterion::Threshold) {
                    EXPECT_GE(p.confidence, 0.7);
                } else {
                    EXPECT_GT(p.confidence, 0.5);
                }
            }
            if (crit == SelectionCriterion::KBest) {
                for (const auto& [it, n] : per_iter) EXPECT_LE(n, 4);
            }
            EXPECT_EQ(r.final_labelled, y.size() + r.audit.size());
        }
    }
}

TEST(SelfTraining, RejectsDegenerateInput) {
    Matrix x(4, 2);
    std::vector<Label> y(4, Label::Similar);
    EXPECT_THROW(self_train({rf(), SelectionCriterion::Threshold, 0.8, 0, 5}, x, y, Matrix(0, 2)), DomainError);
    std::vector<Label> ok = {Label::Similar, Label::Similar, Label::Variant, Label::Variant};
    EXPECT_THROW(self_train({rf(), SelectionCriterion::Threshold, 0.4, 0, 5}, x, ok, Matrix(0, 2)), DomainError);
    EXPECT_THROW(self_train({rf(), SelectionCriterion::KBest, 0.8, 0, 5}, x, ok, Matrix(0, 2)), DomainError);
    EXPECT_THROW(self_train({rf(), SelectionCriterion::Threshold, 0.8, 0, 0}, x, ok, Matrix(0, 2)), DomainError);
    EXPECT_THROW(self_train({rf(), SelectionCriterion::Threshold, 0.8, 0, 5}, x, ok, Matrix(3, 5)), DomainError);
}

TEST(SelfTraining, AuditCsv) {
    std::ostringstream out;
    write_audit_csv(out, {{1, 0, Label::Variant, 0.95}, {2, 1, Label::Similar, 1.0}}, {"a|b", "c|d"});
    EXPECT_EQ(out.str(), "iteration,pair_id,pseudo_label,confidence\n1,a|b,Variant,0.95\n2,c|d,Similar,1\n");
}

// ---------------------------------------------------------------------------
// Graph

TEST(KnnGraph, EquidistantTripleWithIndexTieBreak) {
    // Each point's single neighbour is the lowest-index other point: 0->1,
    // 1->0, 2->0. The union graph has edges 0-1 and 0-2, degrees (2, 1, 1).
    // Unit basis vectors: every squared distance is exactly 2.
    Matrix x(3, 3);
    for (std::size_t i = 0; i < 3; ++i) x(i, i) = 1.0;
    const Matrix s = build_knn_graph(x, 1).to_dense();
    const double r = 1.0 / std::sqrt(2.0);
    EXPECT_DOUBLE_EQ(s(0, 1), r);
    EXPECT_DOUBLE_EQ(s(0, 2), r);
    EXPECT_EQ(s(1, 2), 0.0);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(s(i, i), 0.0);
}

TEST(KnnGraph, CompleteGraph) {
    for (std::size_t n : {2u, 5u, 12u}) {
        const Matrix s = build_knn_graph(random_points(n, 3, n), n - 1).to_dense();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i == j) EXPECT_EQ(s(i, j), 0.0);
                else EXPECT_DOUBLE_EQ(s(i, j), 1.0 / static_cast<double>(n - 1));
    }
    EXPECT_THROW(build_knn_graph(random_points(4, 2, 1), 4), DomainError);
}

TEST(KnnGraph, SymmetricForAnyK) {
    const Matrix x = random_points(100, 5, 21);
    for (std::size_t k : {1u, 3u, 10u, 50u, 99u}) {
        const Matrix s = build_knn_graph(x, k).to_dense();
        for (std::size_t i = 0; i < 100; ++i)
            for (std::size_t j = 0; j < 100; ++j) ASSERT_EQ(s(i, j), s(j, i));
    }
}

TEST(KnnGraph, IndexReuseMatchesDirectBuild) {
    const Matrix x = random_points(40, 4, 22);
    const KnnIndex index(x, 20);
    for (std::size_t k : {1u, 5u, 20u}) {
        const auto a = index.normalized_graph(k), b = build_knn_graph(x, k);
        EXPECT_EQ(a.col, b.col);
        EXPECT_EQ(a.val, b.val);
    }
}

TEST(KnnGraph, CosineIgnoresRowScale) {
    Matrix x = random_points(30, 4, 23);
    Matrix scaled = x;
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (auto& v : scaled.row(i)) v *= static_cast<double>(i % 5 + 1);
    const auto a = build_knn_graph(x, 4, GraphMetric::Cosine), b = build_knn_graph(scaled, 4, GraphMetric::Cosine);
    EXPECT_EQ(a.col, b.col);
}

// ---------------------------------------------------------------------------
// Spreading

TEST(LabelSpreading, AlphaZeroIsFixedPointAtY) {
    const auto g = build_knn_graph(random_points(6, 2, 3), 2);
    const std::vector<Label> y = {Label::Similar, Label::Unlabelled, Label::Variant,
                                  Label::Unlabelled, Label::Unlabelled, Label::Similar};
    const auto r = label_spread({2, 0.0, 30, 1e-3}, g, y);
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] == Label::Unlabelled) {
            EXPECT_TRUE(r.undecidable[i]);
            EXPECT_EQ(r.scores(i, 0), 0.0);
            EXPECT_EQ(r.scores(i, 1), 0.0);
        } else {
            EXPECT_FALSE(r.undecidable[i]);
            EXPECT_EQ(r.labels[i], y[i]);
            EXPECT_EQ(r.scores(i, class_index(y[i])), 1.0);
        }
    }
}

TEST(LabelSpreading, TwoCliquesJoinedByOneEdge) {
    // Nodes 0-2 and 3-5 form cliques; edge 2-3 bridges them. Node 0 is
    // Similar, node 5 is Variant.
    std::vector<std::vector<int>> w(6, std::vector<int>(6, 0));
    auto link = [&](int a, int b) { w[a][b] = w[b][a] = 1; };
    link(0, 1), link(0, 2), link(1, 2), link(3, 4), link(3, 5), link(4, 5), link(2, 3);
    const auto g = normalize(w);
    std::vector<Label> y(6, Label::Unlabelled);
    y[0] = Label::Similar;
    y[5] = Label::Variant;
    for (double alpha : {0.1, 0.2, 0.3, 0.9}) {
        const Matrix expected = closed_form(g.to_dense(), y, alpha);
        const auto r = label_spread({1, alpha, 10000, 1e-12}, g, y);
        for (std::size_t i = 0; i < 6; ++i) {
            const Label want = i < 3 ? Label::Similar : Label::Variant;
            EXPECT_EQ(expected(i, 0) > expected(i, 1) ? Label::Similar : Label::Variant, want);
            EXPECT_EQ(r.labels[i], want) << "alpha " << alpha << " node " << i;
            EXPECT_NEAR(r.scores(i, 0), expected(i, 0), 1e-9);
            EXPECT_NEAR(r.scores(i, 1), expected(i, 1), 1e-9);
        }
    }
}

TEST(LabelSpreading, MatchesClosedFormOnRandomGraphs) {
    Rng rng(31);
    for (double alpha : {0.1, 0.2, 0.3}) {
        for (int trial = 0; trial < 20; ++trial) {
            const Matrix x = random_points(10, 3, rng());
            const auto g = build_knn_graph(x, 1 + uniform_index(rng, 5));
            std::vector<Label> y(10, Label::Unlabelled);
            y[uniform_index(rng, 5)] = Label::Similar;
            y[5 + uniform_index(rng, 5)] = Label::Variant;
            const auto r = label_spread({3, alpha, 100000, 1e-9}, g, y);
            EXPECT_TRUE(r.converged);
            const Matrix expected = closed_form(g.to_dense(), y, alpha);
            for (std::size_t i = 0; i < 10; ++i)
                for (std::size_t c = 0; c < 2; ++c) EXPECT_LT(std::fabs(r.scores(i, c) - expected(i, c)), 1e-6);
        }
    }
}

TEST(LabelSpreading, NonConvergenceIsFlagged) {
    const auto g = build_knn_graph(random_points(20, 2, 4), 3);
    std::vector<Label> y(20, Label::Unlabelled);
    y[0] = Label::Similar;
    y[1] = Label::Variant;
    const auto r = label_spread({3, 0.3, 1, 1e-12}, g, y);
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.iterations, 1);
    EXPECT_TRUE(label_spread({3, 0.3, 1000, 1e-6}, g, y).converged);
}

TEST(LabelSpreading, PermutationEquivariant) {
    const Matrix x = random_points(25, 3, 41);
    std::vector<Label> y(25, Label::Unlabelled);
    y[2] = y[7] = Label::Similar;
    y[13] = y[20] = Label::Variant;
    std::vector<std::size_t> perm(25);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(5);
    shuffle(perm, rng);
    std::vector<Label> yp(25);
    for (std::size_t i = 0; i < 25; ++i) yp[i] = y[perm[i]];
    const LabelSpreadingSpec spec{4, 0.2, 200, 1e-10};
    const auto a = label_spread(spec, build_knn_graph(x, 4), y);
    const auto b = label_spread(spec, build_knn_graph(x.select_rows(perm), 4), yp);
    for (std::size_t i = 0; i < 25; ++i) {
        EXPECT_EQ(b.labels[i], a.labels[perm[i]]);
        EXPECT_NEAR(b.scores(i, 1), a.scores(perm[i], 1), 1e-12);
    }
}

TEST(LabelSpreading, InputErrors) {
    const auto g = build_knn_graph(random_points(5, 2, 1), 2);
    EXPECT_THROW(label_spread({2, 0.2, 10, 1e-3}, g, std::vector<Label>(5, Label::Unlabelled)), DomainError);
    std::vector<Label> one = {Label::Similar, Label::Unlabelled, Label::Unlabelled, Label::Unlabelled, Label::Unlabelled};
    EXPECT_THROW(label_spread({2, 0.2, 10, 1e-3}, g, one), DomainError);
    one[1] = Label::Variant;
    EXPECT_THROW(label_spread({2, 1.0, 10, 1e-3}, g, one), DomainError);
    EXPECT_THROW(label_spread({2, 0.2, 10, 1e-3}, g, std::vector<Label>(4, Label::Similar)), DomainError);
}
