#pragma once
// C-SVM with an RBF kernel, trained by SMO with maximal-violating-pair
// working-set selection, plus Platt sigmoid calibration.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "agssl/bytes.hpp"
#include "agssl/common.hpp"

namespace agssl {

struct SvmParams {
    double c = 1.0;
    double gamma = 1.0;

    bool operator==(const SvmParams&) const = default;
};

inline double rbf_kernel(std::span<const double> u, std::span<const double> v, double gamma) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double d = u[k] - v[k];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

struct SmoResult {
    std::vector<double> alpha;
    double bias = 0.0;      // decision f(x) = sum_i alpha_i y_i K(x_i, x) + bias
    double kkt_gap = 0.0;   // max violation m(alpha) - M(alpha) at exit
    std::size_t iterations = 0;
    bool converged = false;
};

// Kernel rows computed on demand; the cache is dropped wholesale once it
// exceeds the byte budget.
class KernelRows {
public:
    KernelRows(const Matrix& x, double gamma, std::size_t budget_bytes = std::size_t(256) << 20)
        : x_(x), gamma_(gamma), rows_(x.rows()),
          max_rows_(std::max<std::size_t>(2, budget_bytes / (sizeof(double) * std::max<std::size_t>(1, x.rows())))) {}

    const std::vector<double>& row(std::size_t i) {
        if (rows_[i].empty()) {
            if (cached_ >= max_rows_) {
                for (auto& r : rows_) std::vector<double>().swap(r);
                cached_ = 0;
            }
            auto& r = rows_[i];
            r.resize(x_.rows());
            for (std::size_t j = 0; j < x_.rows(); ++j) r[j] = rbf_kernel(x_.row(i), x_.row(j), gamma_);
            ++cached_;
        }
        return rows_[i];
    }

private:
    const Matrix& x_;
    double gamma_;
    std::vector<std::vector<double>> rows_;
    std::size_t max_rows_;
    std::size_t cached_ = 0;
};

// Dual: min 1/2 a'Qa - e'a, 0 <= a_i <= C, y'a = 0, Q_ij = y_i y_j K_ij.
// y_i is +1 for Variant and -1 for Similar.
inline SmoResult smo_solve(const Matrix& x, std::span<const double> y, double c, double gamma,
                           double tol = 1e-3, std::size_t max_iter = 10'000'000) {
    const std::size_t n = x.rows();
    SmoResult res;
    res.alpha.assign(n, 0.0);
    std::vector<double> g(n, -1.0);  // gradient Qa - e
    KernelRows kernel(x, gamma);
    auto& a = res.alpha;

    auto in_up = [&](std::size_t t) { return (y[t] > 0 && a[t] < c) || (y[t] < 0 && a[t] > 0); };
    auto in_low = [&](std::size_t t) { return (y[t] > 0 && a[t] > 0) || (y[t] < 0 && a[t] < c); };

    for (;;) {
        double gmax = -std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        std::size_t i = n, j = n;
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -y[t] * g[t];
            if (in_up(t) && v > gmax) {
                gmax = v;
                i = t;
            }
            if (in_low(t) && v < gmin) {
                gmin = v;
                j = t;
            }
        }
        res.kkt_gap = (i == n || j == n) ? 0.0 : gmax - gmin;
        if (i == n || j == n || res.kkt_gap < tol) {
            res.converged = true;
            break;
        }
        if (res.iterations >= max_iter) break;
        ++res.iterations;

        const auto& ki = kernel.row(i);
        const auto& kj = kernel.row(j);
        const double old_ai = a[i], old_aj = a[j];
        const double quad = std::max(ki[i] + kj[j] - 2.0 * ki[j], 1e-12);
        if (y[i] != y[j]) {
            const double delta = (-g[i] - g[j]) / quad;
            const double diff = a[i] - a[j];
            a[i] += delta;
            a[j] += delta;
            if (diff > 0) {
                if (a[j] < 0) { a[j] = 0; a[i] = diff; }
            } else {
                if (a[i] < 0) { a[i] = 0; a[j] = -diff; }
            }
            if (diff > 0) {
                if (a[i] > c) { a[i] = c; a[j] = c - diff; }
            } else {
                if (a[j] > c) { a[j] = c; a[i] = c + diff; }
            }
        } else {
            const double delta = (g[i] - g[j]) / quad;
            const double sum = a[i] + a[j];
            a[i] -= delta;
            a[j] += delta;
            if (sum > c) {
                if (a[i] > c) { a[i] = c; a[j] = sum - c; }
            } else {
                if (a[j] < 0) { a[j] = 0; a[i] = sum; }
            }
            if (sum > c) {
                if (a[j] > c) { a[j] = c; a[i] = sum - c; }
            } else {
                if (a[i] < 0) { a[i] = 0; a[j] = sum; }
            }
        }
        const double dai = a[i] - old_ai, daj = a[j] - old_aj;
        for (std::size_t t = 0; t < n; ++t) g[t] += y[t] * (y[i] * ki[t] * dai + y[j] * kj[t] * daj);
    }

    // Bias from free vectors; fall back to the midpoint of the feasible range.
    double sum_free = 0.0, ub = std::numeric_limits<double>::infinity(), lb = -ub;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double v = -y[t] * g[t];
        if (a[t] > 0 && a[t] < c) {
            sum_free += v;
            ++n_free;
        } else if ((y[t] > 0 && a[t] >= c) || (y[t] < 0 && a[t] <= 0)) {
            lb = std::max(lb, v);
        } else {
            ub = std::min(ub, v);
        }
    }
    if (n_free > 0) res.bias = sum_free / static_cast<double>(n_free);
    else if (std::isfinite(lb) && std::isfinite(ub)) res.bias = (lb + ub) / 2.0;
    else if (std::isfinite(lb)) res.bias = lb;
    else if (std::isfinite(ub)) res.bias = ub;
    return res;
}

struct PlattParams {
    double a = -1.0;
    double b = 0.0;

    // P(Variant | f) = 1 / (1 + exp(a f + b)).
    double operator()(double f) const {
        const double z = a * f + b;
        return z >= 0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
    }
};

// Newton iteration with backtracking on the regularized-target
// log-likelihood. `positive[i]` marks Variant.
inline PlattParams fit_platt(std::span<const double> dec, const std::vector<bool>& positive) {
    const std::size_t n = dec.size();
    double prior1 = 0, prior0 = 0;
    for (bool p : positive) (p ? prior1 : prior0) += 1;
    const double hi = (prior1 + 1.0) / (prior1 + 2.0), lo = 1.0 / (prior0 + 2.0);
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = positive[i] ? hi : lo;

    double a = 0.0, b = std::log((prior0 + 1.0) / (prior1 + 1.0));
    auto objective = [&](double aa, double bb) {
        double f = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double z = dec[i] * aa + bb;
            f += z >= 0 ? t[i] * z + std::log1p(std::exp(-z)) : (t[i] - 1.0) * z + std::log1p(std::exp(z));
        }
        return f;
    };
    const double sigma = 1e-12, eps = 1e-5, min_step = 1e-10;
    double fval = objective(a, b);
    for (int it = 0; it < 100; ++it) {
        double h11 = sigma, h22 = sigma, h21 = 0, g1 = 0, g2 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double z = dec[i] * a + b;
            double p, q;
            if (z >= 0) {
                p = std::exp(-z) / (1.0 + std::exp(-z));
                q = 1.0 / (1.0 + std::exp(-z));
            } else {
                p = 1.0 / (1.0 + std::exp(z));
                q = std::exp(z) / (1.0 + std::exp(z));
            }
            const double d2 = p * q;
            h11 += dec[i] * dec[i] * d2;
            h22 += d2;
            h21 += dec[i] * d2;
            const double d1 = t[i] - p;
            g1 += dec[i] * d1;
            g2 += d1;
        }
        if (std::fabs(g1) < eps && std::fabs(g2) < eps) break;
        const double det = h11 * h22 - h21 * h21;
        const double da = -(h22 * g1 - h21 * g2) / det;
        const double db = -(-h21 * g1 + h11 * g2) / det;
        const double gd = g1 * da + g2 * db;
        double step = 1.0;
        while (step >= min_step) {
            const double na = a + step * da, nb = b + step * db;
            const double nf = objective(na, nb);
            if (nf < fval + 1e-4 * step * gd) {
                a = na;
                b = nb;
                fval = nf;
                break;
            }
            step /= 2.0;
        }
        if (step < min_step) break;
    }
    return {a, b};
}

class SvmModel {
public:
    // Calibration: an SVM fit on a stratified 80% of the data scores the
    // remaining 20%, the sigmoid is fit there, then the final SVM is fit on
    // everything. With no holdout the sigmoid is fit on the final model's
    // own decision values.
    static SvmModel train(const SvmParams& params, std::uint64_t seed, const Matrix& x, std::span<const Label> y) {
        if (!(params.c > 0.0) || !(params.gamma > 0.0)) throw DomainError("SVM C and gamma must be positive");
        SvmModel model = fit_raw(params, x, y);

        std::vector<std::size_t> fit_idx, hold_idx;
        Rng rng(derive_seed(seed, "platt-split"));
        for (auto cls : {Label::Similar, Label::Variant}) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < y.size(); ++i)
                if (y[i] == cls) members.push_back(i);
            shuffle(members, rng);
            const std::size_t hold = members.size() / 5;
            hold_idx.insert(hold_idx.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(hold));
            fit_idx.insert(fit_idx.end(), members.begin() + static_cast<std::ptrdiff_t>(hold), members.end());
        }
        std::sort(fit_idx.begin(), fit_idx.end());
        std::sort(hold_idx.begin(), hold_idx.end());

        std::vector<double> dec;
        std::vector<bool> pos;
        if (!hold_idx.empty()) {
            std::vector<Label> y_fit;
            for (auto i : fit_idx) y_fit.push_back(y[i]);
            const SvmModel inner = fit_raw(params, x.select_rows(fit_idx), y_fit);
            for (auto i : hold_idx) {
                dec.push_back(inner.decision(x.row(i)));
                pos.push_back(y[i] == Label::Variant);
            }
        } else {
            for (std::size_t i = 0; i < x.rows(); ++i) {
                dec.push_back(model.decision(x.row(i)));
                pos.push_back(y[i] == Label::Variant);
            }
        }
        model.platt_ = fit_platt(dec, pos);
        // A non-negative slope would make confidence decrease with the margin.
        if (!(model.platt_.a < 0.0)) model.platt_ = {-1.0, 0.0};
        return model;
    }

    double decision(std::span<const double> x) const {
        double f = bias_;
        for (std::size_t s = 0; s < coef_.size(); ++s) f += coef_[s] * rbf_kernel(sv_.row(s), x, gamma_);
        return f;
    }

    double variant_probability(std::span<const double> x) const { return platt_(decision(x)); }

    const PlattParams& platt() const { return platt_; }
    const SmoResult& solver() const { return solver_; }
    std::size_t support_vector_count() const { return coef_.size(); }

    void serialize(ByteWriter& w) const {
        w.f64(gamma_);
        w.f64(bias_);
        w.f64(platt_.a);
        w.f64(platt_.b);
        w.u32(static_cast<std::uint32_t>(coef_.size()));
        w.u32(static_cast<std::uint32_t>(sv_.cols()));
        for (std::size_t s = 0; s < coef_.size(); ++s) {
            w.f64(coef_[s]);
            for (double v : sv_.row(s)) w.f64(v);
        }
    }
    static SvmModel deserialize(ByteReader& r) {
        SvmModel m;
        m.gamma_ = r.f64();
        m.bias_ = r.f64();
        m.platt_.a = r.f64();
        m.platt_.b = r.f64();
        const auto n = r.u32();
        const auto d = r.u32();
        m.sv_ = Matrix(n, d);
        m.coef_.resize(n);
        for (std::size_t s = 0; s < n; ++s) {
            m.coef_[s] = r.f64();
            for (auto& v : m.sv_.row(s)) v = r.f64();
        }
        return m;
    }

private:
    static SvmModel fit_raw(const SvmParams& params, const Matrix& x, std::span<const Label> y) {
        std::vector<double> ys(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) ys[i] = y[i] == Label::Variant ? 1.0 : -1.0;
        SvmModel m;
        m.gamma_ = params.gamma;
        m.solver_ = smo_solve(x, ys, params.c, params.gamma);
        m.bias_ = m.solver_.bias;
        std::vector<std::size_t> sv;
        for (std::size_t i = 0; i < x.rows(); ++i)
            if (m.solver_.alpha[i] > 0.0) {
                sv.push_back(i);
                m.coef_.push_back(m.solver_.alpha[i] * ys[i]);
            }
        m.sv_ = x.select_rows(sv);
        if (m.sv_.cols() != x.cols()) m.sv_ = Matrix(0, x.cols());
        return m;
    }

    double gamma_ = 1.0;
    double bias_ = 0.0;
    PlattParams platt_;
    Matrix sv_;
    std::vector<double> coef_;
    SmoResult solver_;  // diagnostics only; not serialized
};

}  // namespace agssl
