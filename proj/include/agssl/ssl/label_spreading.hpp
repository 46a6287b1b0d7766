#pragma once
// Graph label spreading over a symmetrised kNN graph:
// F <- alpha S F + (1 - alpha) Y with S = D^-1/2 W D^-1/2.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "agssl/common.hpp"
#include "agssl/text.hpp"

namespace agssl {

enum class GraphMetric : std::uint8_t { Euclidean, Cosine };

struct LabelSpreadingSpec {
    int n_neighbors = 7;
    double alpha = 0.2;
    int max_iter = 30;
    double tol = 1e-3;

    bool operator==(const LabelSpreadingSpec&) const = default;

    std::string describe() const {
        return "alpha=" + text::format_double(alpha) + ",n_neighbors=" + std::to_string(n_neighbors) +
               ",max_iter=" + std::to_string(max_iter);
    }
};

// Symmetric sparse matrix in CSR form.
struct SparseGraph {
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> col;
    std::vector<double> val;

    Matrix to_dense() const {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) m(i, col[p]) = val[p];
        return m;
    }
};

// Neighbour lists sorted by (distance, index), computed once for the largest k
// needed so a grid over n_neighbors reuses them.
class KnnIndex {
public:
    KnnIndex(const Matrix& x, std::size_t max_k, GraphMetric metric = GraphMetric::Euclidean) : n_(x.rows()) {
        if (max_k >= n_ && n_ > 0) max_k = n_ - 1;
        k_ = max_k;
        std::vector<double> norms(n_, 0.0);
        if (metric == GraphMetric::Cosine)
            for (std::size_t i = 0; i < n_; ++i) {
                double s = 0;
                for (double v : x.row(i)) s += v * v;
                norms[i] = std::sqrt(s);
            }
        neighbors_.resize(n_);
        std::vector<std::pair<double, std::size_t>> d(n_ > 0 ? n_ - 1 : 0);
        for (std::size_t i = 0; i < n_; ++i) {
            std::size_t m = 0;
            for (std::size_t j = 0; j < n_; ++j) {
                if (j == i) continue;
                d[m++] = {distance(x.row(i), x.row(j), metric, norms[i], norms[j]), j};
            }
            std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k_), d.end());
            auto& nb = neighbors_[i];
            nb.resize(k_);
            for (std::size_t q = 0; q < k_; ++q) nb[q] = d[q].second;
        }
    }

    std::size_t size() const { return n_; }
    std::size_t max_k() const { return k_; }
    const std::vector<std::size_t>& neighbors(std::size_t i) const { return neighbors_[i]; }

    // W_ij = 1 when j is among i's k nearest or i among j's; returns
    // S = D^-1/2 W D^-1/2.
    SparseGraph normalized_graph(std::size_t k) const {
        if (k == 0) throw DomainError("build_knn_graph: n_neighbors must be >= 1");
        if (k > k_) throw DomainError("build_knn_graph: n_neighbors " + std::to_string(k) + " exceeds index size " + std::to_string(k_));
        std::vector<std::vector<std::size_t>> adj(n_);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t q = 0; q < k; ++q) {
                const auto j = neighbors_[i][q];
                adj[i].push_back(j);
                adj[j].push_back(i);
            }
        SparseGraph g;
        g.n = n_;
        std::vector<double> degree(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            auto& a = adj[i];
            std::sort(a.begin(), a.end());
            a.erase(std::unique(a.begin(), a.end()), a.end());
            degree[i] = static_cast<double>(a.size());
        }
        for (std::size_t i = 0; i < n_; ++i) {
            for (auto j : adj[i]) {
                g.col.push_back(j);
                g.val.push_back(1.0 / std::sqrt(degree[i] * degree[j]));
            }
            g.row_ptr.push_back(g.col.size());
        }
        return g;
    }

private:
    static double distance(std::span<const double> u, std::span<const double> v, GraphMetric metric, double nu,
                           double nv) {
        if (metric == GraphMetric::Euclidean) {
            double s = 0;
            for (std::size_t k = 0; k < u.size(); ++k) {
                const double d = u[k] - v[k];
                s += d * d;
            }
            return std::sqrt(s);
        }
        if (nu == 0.0 || nv == 0.0) return 1.0;
        double dot = 0;
        for (std::size_t k = 0; k < u.size(); ++k) dot += u[k] * v[k];
        return 1.0 - dot / (nu * nv);
    }

    std::size_t n_ = 0;
    std::size_t k_ = 0;
    std::vector<std::vector<std::size_t>> neighbors_;
};

// Distance ties are broken toward the lower row index.
inline SparseGraph build_knn_graph(const Matrix& x, std::size_t n_neighbors,
                                   GraphMetric metric = GraphMetric::Euclidean) {
    if (n_neighbors >= x.rows())
        throw DomainError("build_knn_graph: n_neighbors (" + std::to_string(n_neighbors) +
                          ") must be smaller than the number of rows (" + std::to_string(x.rows()) + ")");
    return KnnIndex(x, n_neighbors, metric).normalized_graph(n_neighbors);
}

struct SpreadResult {
    Matrix scores;                 // n x 2, columns (Similar, Variant)
    std::vector<Label> labels;     // argmax, ties to Variant
    std::vector<bool> undecidable; // score row identically zero
    int iterations = 0;
    bool converged = false;
};

// Soft clamping: labelled rows keep only the (1 - alpha) Y pull, and report
// their propagated labels.
inline SpreadResult label_spread(const LabelSpreadingSpec& spec, const SparseGraph& s, std::span<const Label> y) {
    if (s.n != y.size()) throw DomainError("label_spread: graph and label vector sizes differ");
    if (!(spec.alpha >= 0.0 && spec.alpha < 1.0)) throw DomainError("label_spread: alpha must lie in [0, 1)");
    if (spec.max_iter <= 0) throw DomainError("label_spread: max_iter must be positive");
    if (!(spec.tol > 0.0)) throw DomainError("label_spread: tol must be positive");
    std::size_t per_class[2] = {0, 0};
    for (auto l : y)
        if (l != Label::Unlabelled) ++per_class[class_index(l)];
    if (per_class[0] + per_class[1] == 0) throw DomainError("label_spread: all rows are unlabelled");
    if (per_class[0] == 0 || per_class[1] == 0)
        throw DomainError("label_spread: need at least one labelled row per class");

    const std::size_t n = s.n;
    Matrix y0(n, 2);
    for (std::size_t i = 0; i < n; ++i)
        if (y[i] != Label::Unlabelled) y0(i, class_index(y[i])) = 1.0;

    SpreadResult res;
    Matrix f = y0, next(n, 2);
    for (int it = 0; it < spec.max_iter; ++it) {
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double acc0 = 0.0, acc1 = 0.0;
            for (std::size_t p = s.row_ptr[i]; p < s.row_ptr[i + 1]; ++p) {
                acc0 += s.val[p] * f(s.col[p], 0);
                acc1 += s.val[p] * f(s.col[p], 1);
            }
            next(i, 0) = spec.alpha * acc0 + (1.0 - spec.alpha) * y0(i, 0);
            next(i, 1) = spec.alpha * acc1 + (1.0 - spec.alpha) * y0(i, 1);
            change = std::max({change, std::fabs(next(i, 0) - f(i, 0)), std::fabs(next(i, 1) - f(i, 1))});
        }
        std::swap(f, next);
        res.iterations = it + 1;
        if (change < spec.tol) {
            res.converged = true;
            break;
        }
    }
    res.labels.resize(n);
    res.undecidable.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        res.undecidable[i] = f(i, 0) == 0.0 && f(i, 1) == 0.0;
        res.labels[i] = f(i, 0) > f(i, 1) ? Label::Similar : Label::Variant;
    }
    res.scores = std::move(f);
    return res;
}

}  // namespace agssl
