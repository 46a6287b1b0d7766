#pragma once
// Synthetic pair-feature corpora whose classes satisfy the cluster
// assumption by construction. Used by tests, the acceptance suite and the
// CLI's `synthetic` data source.

#include <cmath>
#include <string>
#include <vector>

#include "agssl/common.hpp"
#include "agssl/eval/experiment.hpp"

namespace agssl {

struct ManifoldSpec {
    std::size_t n_labelled = 400;
    std::size_t n_unlabelled = 400;
    std::size_t dim = 8;          // ambient width; the manifold lives in the first two axes before rotation
    double noise = 0.15;          // isotropic Gaussian noise in every ambient axis
    double gap = 0.5;             // extra vertical separation between the two arcs
    double variant_share = 0.5;
    std::size_t n_subtypes = 1;   // rows are spread round-robin over the first n subtypes
    std::uint64_t seed = 1;
};

namespace detail {

// Interleaved half-moons: Similar on the upper arc, Variant on the lower,
// shifted arc.
inline std::array<double, 2> moon_point(Label cls, double gap, Rng& rng) {
    const double pi = 3.14159265358979323846;
    const double t = pi * uniform01(rng);
    if (cls == Label::Similar) return {std::cos(t), std::sin(t)};
    return {1.0 - std::cos(t), 0.5 - gap - std::sin(t)};
}

}  // namespace detail

// Two interleaved half-moon manifolds lifted into `dim` axes by a fixed
// random orthogonal map, with Gaussian noise.
inline Dataset two_manifold_dataset(const ManifoldSpec& spec, const std::string& name = "synthetic") {
    if (spec.dim < 2) throw DomainError("two_manifold_dataset: dim must be >= 2");
    if (spec.n_subtypes == 0 || spec.n_subtypes > 4) throw DomainError("two_manifold_dataset: 1..4 subtypes");
    Rng rng(spec.seed);

    // Orthonormal 2 x dim embedding by Gram-Schmidt on Gaussian rows.
    std::vector<std::vector<double>> basis(2, std::vector<double>(spec.dim));
    for (auto& b : basis)
        for (auto& v : b) v = standard_normal(rng);
    auto normalize = [](std::vector<double>& v) {
        double s = 0;
        for (double x : v) s += x * x;
        s = std::sqrt(s);
        for (double& x : v) x /= s;
    };
    normalize(basis[0]);
    double dot = 0;
    for (std::size_t k = 0; k < spec.dim; ++k) dot += basis[0][k] * basis[1][k];
    for (std::size_t k = 0; k < spec.dim; ++k) basis[1][k] -= dot * basis[0][k];
    normalize(basis[1]);

    auto draw = [&](Label cls) {
        const auto p = detail::moon_point(cls, spec.gap, rng);
        std::vector<double> x(spec.dim);
        for (std::size_t k = 0; k < spec.dim; ++k)
            x[k] = p[0] * basis[0][k] + p[1] * basis[1][k] + spec.noise * standard_normal(rng);
        return x;
    };

    Dataset d;
    d.embedding = name;
    d.x = Matrix(0, spec.dim);
    d.x_unlab = Matrix(0, spec.dim);
    const auto n_variant = static_cast<std::size_t>(std::llround(spec.variant_share * static_cast<double>(spec.n_labelled)));
    for (std::size_t i = 0; i < spec.n_labelled; ++i) {
        const Label cls = i < n_variant ? Label::Variant : Label::Similar;
        d.x.append_row(draw(cls));
        d.y.push_back(cls);
        d.subtypes.push_back(kAllSubtypes[i % spec.n_subtypes]);
        d.ids.push_back("L" + std::to_string(i));
    }
    for (std::size_t i = 0; i < spec.n_unlabelled; ++i) {
        const Label cls = uniform01(rng) < spec.variant_share ? Label::Variant : Label::Similar;
        d.x_unlab.append_row(draw(cls));
        d.unlab_subtypes.push_back(kAllSubtypes[i % spec.n_subtypes]);
        d.unlab_ids.push_back("U" + std::to_string(i));
    }
    return d;
}

// Two Gaussian blobs centred at -sep/2 and +sep/2 along every axis.
inline Dataset gaussian_blobs(std::size_t per_class, std::size_t n_unlabelled, std::size_t dim, double sep,
                              std::uint64_t seed) {
    Rng rng(seed);
    Dataset d;
    d.embedding = "blobs";
    d.x = Matrix(0, dim);
    d.x_unlab = Matrix(0, dim);
    auto draw = [&](Label cls) {
        std::vector<double> x(dim);
        const double c = cls == Label::Variant ? sep / 2 : -sep / 2;
        for (auto& v : x) v = c + standard_normal(rng);
        return x;
    };
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        const Label cls = i % 2 ? Label::Variant : Label::Similar;
        d.x.append_row(draw(cls));
        d.y.push_back(cls);
        d.subtypes.push_back(Subtype::H1N1);
        d.ids.push_back("L" + std::to_string(i));
    }
    for (std::size_t i = 0; i < n_unlabelled; ++i) {
        d.x_unlab.append_row(draw(i % 2 ? Label::Variant : Label::Similar));
        d.unlab_subtypes.push_back(Subtype::H1N1);
        d.unlab_ids.push_back("U" + std::to_string(i));
    }
    return d;
}

}  // namespace agssl
