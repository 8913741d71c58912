#pragma once

#include <algorithm>
#include <cmath>
#include <iostream>
#include <span>
#include <string>
#include <vector>

#include "dgs/embedding.hpp"
#include "dgs/error.hpp"
#include "dgs/rng.hpp"
#include "dgs/state_store.hpp"

namespace dgs {

enum class Task { node_class, link_pred };

enum class Variant {
    dgs,      // learnable W, vector alpha/beta, softmax embedding, RTRL
    dgs_v,    // fixed delta embedding, vector alpha/beta
    dgs_s,    // fixed delta embedding, scalar alpha/beta
    dgs_sum,  // learnable W, divide-by-sum normalization
    dgs_bp,   // learnable W, one-update truncated backprop instead of RTRL
};

inline bool variant_uses_w(Variant v) {
    return v == Variant::dgs || v == Variant::dgs_sum || v == Variant::dgs_bp;
}

inline bool variant_scalar_coeffs(Variant v) { return v == Variant::dgs_s; }

inline const char* variant_name(Variant v) {
    switch (v) {
        case Variant::dgs: return "dgs";
        case Variant::dgs_v: return "dgs_v";
        case Variant::dgs_s: return "dgs_s";
        case Variant::dgs_sum: return "dgs_sum";
        case Variant::dgs_bp: return "dgs_bp";
    }
    return "?";
}

inline Variant variant_from_name(const std::string& name) {
    if (name == "dgs") return Variant::dgs;
    if (name == "dgs_v" || name == "dgs-v") return Variant::dgs_v;
    if (name == "dgs_s" || name == "dgs-s") return Variant::dgs_s;
    if (name == "dgs_sum" || name == "dgs-sum") return Variant::dgs_sum;
    if (name == "dgs_bp" || name == "dgs-bp") return Variant::dgs_bp;
    throw ConfigError("unknown variant: " + name);
}

/// Checks the segmentation arithmetic and warns (stderr only) when the state
/// size departs from the task defaults of 100 (node classification) and 250
/// (link prediction).
inline void validate_config(std::size_t state_size, std::size_t segments, std::size_t rows_per_segment,
                            Task task) {
    if (segments == 0 || rows_per_segment == 0 || segments * rows_per_segment != state_size)
        throw ConfigError("segments * rows_per_segment must equal state size: " + std::to_string(segments) +
                          " * " + std::to_string(rows_per_segment) + " != " + std::to_string(state_size));
    const std::size_t expected = task == Task::node_class ? 100 : 250;
    if (state_size != expected)
        std::cerr << "[warn] state size " << state_size << " differs from the usual "
                  << (task == Task::node_class ? "node-classification" : "link-prediction") << " default "
                  << expected << "\n";
}

/// Global learnable parameters of the embedding recurrent component.
/// alpha/beta always hold one entry per state element; the scalar variant
/// keeps them broadcast-constant. The embedding matrix w is absent for the
/// fixed delta-embedding variants.
struct DgsParams {
    Variant variant = Variant::dgs;
    std::size_t state_size = 0;       // s
    std::size_t segments = 1;         // m (softmax count; unused by delta variants)
    std::size_t rows_per_segment = 0; // h = s/m
    std::size_t feature_dim = 0;      // f = input width of w
    std::vector<double> alpha;
    std::vector<double> beta;
    std::vector<double> w;            // row-major s x f
    double temperature = 1.0;
    double sum_epsilon = 1e-8;
    double learning_rate = 0.1;       // eta for the forward-mode SGD step

    bool uses_w() const { return variant_uses_w(variant); }
    bool scalar_coeffs() const { return variant_scalar_coeffs(variant); }

    JacShape jac_shape() const {
        if (variant == Variant::dgs_bp) return JacShape::frozen();  // no tables kept
        if (!uses_w()) return JacShape::alpha_beta_only();
        return JacShape::full(rows_per_segment, feature_dim);
    }

    SegmentedEmbedding embed(std::span<const double> x) const {
        if (variant == Variant::dgs_sum)
            return embed_features_sum(w, state_size, feature_dim, x, segments, sum_epsilon);
        return embed_features(w, state_size, feature_dim, x, temperature, segments);
    }

    static DgsParams init(Variant variant, std::size_t state_size, std::size_t segments,
                          std::size_t feature_dim, double temperature, double learning_rate, Rng& rng) {
        DgsParams p;
        p.variant = variant;
        p.state_size = state_size;
        p.feature_dim = feature_dim;
        p.temperature = temperature;
        p.learning_rate = learning_rate;
        p.alpha.assign(state_size, 0.5);
        p.beta.assign(state_size, 0.5);
        if (p.uses_w()) {
            if (segments == 0 || state_size % segments != 0)
                throw ConfigError("segments must divide the state size");
            p.segments = segments;
            p.rows_per_segment = state_size / segments;
            p.w.resize(state_size * feature_dim);
            const double scale = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(1, feature_dim)));
            for (auto& x : p.w) x = scale * normal01(rng);
        } else {
            p.segments = 1;
            p.rows_per_segment = state_size;
        }
        return p;
    }
};

/// One elementwise step of the convex-combination recurrence shared by every
/// variant (and by the scalar Graph-Sprints update).
inline double convex_update(double alpha, double beta, double s_prev, double s_star_prev, double e) {
    return beta * s_prev + (1.0 - beta) * ((1.0 - alpha) * e + alpha * s_star_prev);
}

/// S_t = beta (.) S_{t-1} + (1-beta) (.) ((1-alpha) (.) E + alpha (.) S*_{t-1})
inline void state_update(std::span<const double> alpha, std::span<const double> beta,
                         std::span<const double> s_prev, std::span<const double> s_star_prev,
                         std::span<const double> e, std::span<double> out) {
    const std::size_t s = alpha.size();
    for (std::size_t i = 0; i < s; ++i)
        out[i] = convex_update(alpha[i], beta[i], s_prev[i], s_star_prev[i], e[i]);
}

inline std::vector<double> state_update(const DgsParams& p, std::span<const double> s_prev,
                                        std::span<const double> s_star_prev, const SegmentedEmbedding& e) {
    std::vector<double> out(p.state_size);
    state_update(p.alpha, p.beta, s_prev, s_star_prev, e.values, out);
    return out;
}

namespace detail {

/// dE_i/d(logit j) coefficient within one segment, for the active embedding.
/// Softmax: (delta_ij p_i - p_i p_j)/T. Divide-by-sum: (delta_ij - E_i)/denom.
inline double embed_coeff(const DgsParams& p, const SegmentedEmbedding& e, std::size_t i_global,
                          std::size_t j_local) {
    const std::size_t h = p.rows_per_segment;
    const std::size_t seg = i_global / h;
    const double ei = e.values[i_global];
    if (p.variant == Variant::dgs_sum) return ((i_global % h == j_local ? 1.0 : 0.0) - ei) / e.seg_denom[seg];
    const double pj = e.values[seg * h + j_local];
    return (((i_global % h == j_local) ? ei : 0.0) - ei * pj) / p.temperature;
}

}  // namespace detail

/// Advances the per-node Jacobian tables through one application of the state
/// update, reading the frozen snapshot entries of the updated node and its
/// neighbor. Cost: Theta(s) for the alpha/beta tables, Theta(s*h*f) for W.
inline RtrlJacobians rtrl_propagate(const DgsParams& p, const NodeEntry& self, const NodeEntry& neighbor,
                                    const SegmentedEmbedding& e, std::span<const double> x) {
    const std::size_t s = p.state_size;
    RtrlJacobians out;
    out.alpha.resize(s);
    out.beta.resize(s);

    for (std::size_t i = 0; i < s; ++i) {
        const double a = p.alpha[i], b = p.beta[i];
        const double ei = e.values[i];
        const double s_star = neighbor.state[i];
        const double u = (1.0 - a) * ei + a * s_star;
        out.alpha[i] = b * self.jac.alpha[i] + (1.0 - b) * (s_star - ei + a * neighbor.jac.alpha[i]);
        out.beta[i] = self.state[i] - u + b * self.jac.beta[i] + (1.0 - b) * a * neighbor.jac.beta[i];
    }

    if (p.uses_w()) {
        const std::size_t h = p.rows_per_segment;
        const std::size_t f = p.feature_dim;
        out.w.resize(s * h * f);
        for (std::size_t i = 0; i < s; ++i) {
            const double a = p.alpha[i], b = p.beta[i];
            const double local_scale = (1.0 - b) * (1.0 - a);
            const double carry = (1.0 - b) * a;
            for (std::size_t r = 0; r < h; ++r) {
                const double coeff = local_scale * detail::embed_coeff(p, e, i, r);
                const std::size_t base = (i * h + r) * f;
                const double* jw_self = self.jac.w.data() + base;
                const double* jw_nbr = neighbor.jac.w.data() + base;
                double* jw_out = out.w.data() + base;
                for (std::size_t c = 0; c < f; ++c)
                    jw_out[c] = b * jw_self[c] + coeff * x[c] + carry * jw_nbr[c];
            }
        }
    }
    return out;
}

/// The same recursion with all incoming Jacobians treated as zero: the local
/// one-update term. This is the gradient path of the truncated-backprop
/// variant, which keeps no tables at all.
inline RtrlJacobians local_jacobians(const DgsParams& p, std::span<const double> s_prev,
                                     std::span<const double> s_star_prev, const SegmentedEmbedding& e,
                                     std::span<const double> x) {
    const std::size_t s = p.state_size;
    RtrlJacobians out;
    out.alpha.resize(s);
    out.beta.resize(s);
    for (std::size_t i = 0; i < s; ++i) {
        const double a = p.alpha[i], b = p.beta[i];
        const double ei = e.values[i];
        const double u = (1.0 - a) * ei + a * s_star_prev[i];
        out.alpha[i] = (1.0 - b) * (s_star_prev[i] - ei);
        out.beta[i] = s_prev[i] - u;
    }
    if (p.uses_w()) {
        const std::size_t h = p.rows_per_segment;
        const std::size_t f = p.feature_dim;
        out.w.resize(s * h * f);
        for (std::size_t i = 0; i < s; ++i) {
            const double scale = (1.0 - p.beta[i]) * (1.0 - p.alpha[i]);
            for (std::size_t r = 0; r < h; ++r) {
                const double coeff = scale * detail::embed_coeff(p, e, i, r);
                const std::size_t base = (i * h + r) * f;
                for (std::size_t c = 0; c < f; ++c) out.w[base + c] = coeff * x[c];
            }
        }
    }
    return out;
}

/// Accumulated parameter-space gradients for one optimizer step. The scalar
/// variant reduces the per-element alpha/beta contributions into single
/// entries.
struct ErGrads {
    std::vector<double> alpha;
    std::vector<double> beta;
    std::vector<double> w;

    static ErGrads zeros(const DgsParams& p) {
        ErGrads g;
        const std::size_t n = p.scalar_coeffs() ? 1 : p.state_size;
        g.alpha.assign(n, 0.0);
        g.beta.assign(n, 0.0);
        if (p.uses_w()) g.w.assign(p.state_size * p.feature_dim, 0.0);
        return g;
    }

    void add(const ErGrads& other) {
        for (std::size_t i = 0; i < alpha.size(); ++i) alpha[i] += other.alpha[i];
        for (std::size_t i = 0; i < beta.size(); ++i) beta[i] += other.beta[i];
        for (std::size_t i = 0; i < w.size(); ++i) w[i] += other.w[i];
    }
};

/// Chains the loss gradient g = dL/dS_t through one node's Jacobian tables.
inline void accumulate_param_grads(const DgsParams& p, std::span<const double> g, const RtrlJacobians& jac,
                                   ErGrads& out) {
    const std::size_t s = p.state_size;
    const bool scalar = p.scalar_coeffs();
    for (std::size_t i = 0; i < s; ++i) {
        const std::size_t slot = scalar ? 0 : i;
        out.alpha[slot] += g[i] * jac.alpha[i];
        out.beta[slot] += g[i] * jac.beta[i];
    }
    if (p.uses_w() && !jac.w.empty()) {
        const std::size_t h = p.rows_per_segment;
        const std::size_t f = p.feature_dim;
        for (std::size_t i = 0; i < s; ++i) {
            const double gi = g[i];
            if (gi == 0.0) continue;
            const std::size_t seg = i / h;
            for (std::size_t r = 0; r < h; ++r) {
                const double* jw = jac.w.data() + (i * h + r) * f;
                double* gw = out.w.data() + (seg * h + r) * f;
                for (std::size_t c = 0; c < f; ++c) gw[c] += gi * jw[c];
            }
        }
    }
}

/// Plain SGD on the ER parameters with batch averaging, then clamping
/// alpha/beta back into [0,1] to preserve the convex-combination form.
inline void sgd_step(DgsParams& p, const ErGrads& grads, std::size_t batch_size) {
    if (batch_size == 0) return;
    const auto finite = [](const std::vector<double>& v) {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    };
    if (!finite(grads.alpha) || !finite(grads.beta) || !finite(grads.w))
        throw NumericError("non-finite ER gradient; training aborted");

    const double scale = p.learning_rate / static_cast<double>(batch_size);
    const auto clamp01 = [](double x) { return std::clamp(x, 0.0, 1.0); };
    if (p.scalar_coeffs()) {
        const double a = clamp01(p.alpha[0] - scale * grads.alpha[0]);
        const double b = clamp01(p.beta[0] - scale * grads.beta[0]);
        std::fill(p.alpha.begin(), p.alpha.end(), a);
        std::fill(p.beta.begin(), p.beta.end(), b);
    } else {
        for (std::size_t i = 0; i < p.state_size; ++i) {
            p.alpha[i] = clamp01(p.alpha[i] - scale * grads.alpha[i]);
            p.beta[i] = clamp01(p.beta[i] - scale * grads.beta[i]);
        }
    }
    for (std::size_t i = 0; i < p.w.size(); ++i) p.w[i] -= scale * grads.w[i];
}

inline std::size_t er_param_count(const DgsParams& p) {
    if (p.scalar_coeffs()) return 2;
    return 2 * p.state_size + p.w.size();
}

}  // namespace dgs
