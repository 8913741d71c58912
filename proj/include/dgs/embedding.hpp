#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "dgs/error.hpp"

namespace dgs {

/// Concatenated per-segment feature embedding E. For the softmax form each
/// length-h segment is a probability vector; for the divide-by-sum form the
/// per-segment denominators are kept for Jacobian computation.
struct SegmentedEmbedding {
    std::vector<double> values;      // length s = segments * rows
    std::size_t segments = 1;        // m
    std::size_t rows = 0;            // h
    std::vector<double> seg_denom;   // divide-by-sum only, length m

    std::span<const double> segment(std::size_t k) const {
        return std::span<const double>(values).subspan(k * rows, rows);
    }
};

/// E = concat_k softmax((W_k x) / T), numerically stabilized by subtracting
/// the per-segment max logit before exponentiation.
inline SegmentedEmbedding embed_features(std::span<const double> w, std::size_t state_size,
                                         std::size_t feature_dim, std::span<const double> x,
                                         double temperature, std::size_t segments) {
    const std::size_t h = state_size / segments;
    SegmentedEmbedding e;
    e.segments = segments;
    e.rows = h;
    e.values.resize(state_size);

    for (std::size_t k = 0; k < segments; ++k) {
        double* seg = e.values.data() + k * h;
        double zmax = -std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < h; ++r) {
            const double* row = w.data() + (k * h + r) * feature_dim;
            double z = 0.0;
            for (std::size_t c = 0; c < feature_dim; ++c) z += row[c] * x[c];
            if (!std::isfinite(z)) throw NumericError("non-finite embedding logit");
            seg[r] = z;
            zmax = std::max(zmax, z);
        }
        double sum = 0.0;
        for (std::size_t r = 0; r < h; ++r) {
            seg[r] = std::exp((seg[r] - zmax) / temperature);
            sum += seg[r];
        }
        for (std::size_t r = 0; r < h; ++r) seg[r] /= sum;
    }
    return e;
}

/// Divide-by-sum variant: E_k = (W_k x) / (sum(W_k x) + eps). Not a
/// probability vector; values may fall outside [0,1].
inline SegmentedEmbedding embed_features_sum(std::span<const double> w, std::size_t state_size,
                                             std::size_t feature_dim, std::span<const double> x,
                                             std::size_t segments, double epsilon) {
    const std::size_t h = state_size / segments;
    SegmentedEmbedding e;
    e.segments = segments;
    e.rows = h;
    e.values.resize(state_size);
    e.seg_denom.resize(segments);

    for (std::size_t k = 0; k < segments; ++k) {
        double* seg = e.values.data() + k * h;
        double sum = 0.0;
        for (std::size_t r = 0; r < h; ++r) {
            const double* row = w.data() + (k * h + r) * feature_dim;
            double z = 0.0;
            for (std::size_t c = 0; c < feature_dim; ++c) z += row[c] * x[c];
            if (!std::isfinite(z)) throw NumericError("non-finite embedding logit");
            seg[r] = z;
            sum += z;
        }
        const double denom = sum + epsilon;
        if (denom == 0.0 || !std::isfinite(denom)) throw NumericError("divide-by-sum denominator is zero");
        e.seg_denom[k] = denom;
        for (std::size_t r = 0; r < h; ++r) seg[r] /= denom;
    }
    return e;
}

/// Softmax segment Jacobian dE_i/dW[j,c] = (1/T)(delta_ij p_i - p_i p_j) x_c,
/// materialized as an h*h*f tensor indexed [i][j][c]. The RTRL recursion uses
/// the factored (1/T)(delta p_i - p_i p_j) coefficients directly; this dense
/// form exists for tests and oracles.
inline std::vector<double> embed_jacobian(std::span<const double> seg_probs, std::span<const double> x,
                                          double temperature) {
    const std::size_t h = seg_probs.size();
    const std::size_t f = x.size();
    std::vector<double> jac(h * h * f);
    for (std::size_t i = 0; i < h; ++i) {
        for (std::size_t j = 0; j < h; ++j) {
            const double coeff = (((i == j) ? seg_probs[i] : 0.0) - seg_probs[i] * seg_probs[j]) / temperature;
            for (std::size_t c = 0; c < f; ++c) jac[(i * h + j) * f + c] = coeff * x[c];
        }
    }
    return jac;
}

/// Divide-by-sum segment Jacobian dE_i/dW[j,c] = ((delta_ij - E_i)/denom) x_c.
inline std::vector<double> embed_jacobian_sum(std::span<const double> seg_values, double denom,
                                              std::span<const double> x) {
    const std::size_t h = seg_values.size();
    const std::size_t f = x.size();
    std::vector<double> jac(h * h * f);
    for (std::size_t i = 0; i < h; ++i) {
        for (std::size_t j = 0; j < h; ++j) {
            const double coeff = (((i == j) ? 1.0 : 0.0) - seg_values[i]) / denom;
            for (std::size_t c = 0; c < f; ++c) jac[(i * h + j) * f + c] = coeff * x[c];
        }
    }
    return jac;
}

}  // namespace dgs
