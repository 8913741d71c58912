#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dgs/error.hpp"
#include "dgs/events.hpp"
#include "dgs/rng.hpp"

namespace dgs {

/// Planted-signal stream generator.
///
/// Every destination node carries hidden binary attributes. Each event copies
/// the current destination's attributes (plus noise) into the edge features,
/// and each source keeps exponentially-discounted accumulators of the
/// attributes seen on its past edges. An event's label thresholds the
/// source's accumulator value *before* the event is applied, so the label is
/// a function of history only: a classifier on the current edge features
/// cannot recover it, while a recurrent state can.
///
/// In heterogeneous mode the label mixes a fast-discounted accumulator of
/// attribute A and a slow-discounted accumulator of attribute B, which
/// rewards per-feature forgetting rates over a single scalar rate.
struct SynthConfig {
    std::size_t sources = 200;
    std::size_t destinations = 100;
    std::size_t events = 10000;
    std::size_t feature_dim = 4;  // col0 = attr A, col1 = attr B, rest noise
    double positive_rate = 0.5;
    double labeled_fraction = 1.0;
    double feature_noise = 0.1;
    double discount = 0.7;  // homogeneous accumulator decay
    bool heterogeneous = false;
    double discount_fast = 0.25;
    double discount_slow = 0.9;

    void validate() const {
        if (events == 0) throw ConfigError("synth: event count must be positive");
        if (sources == 0 || destinations == 0) throw ConfigError("synth: node counts must be positive");
        if (feature_dim < 2) throw ConfigError("synth: feature_dim must be >= 2");
        if (!(positive_rate > 0.0 && positive_rate < 1.0)) throw ConfigError("synth: positive_rate must be in (0,1)");
        if (!(labeled_fraction > 0.0 && labeled_fraction <= 1.0))
            throw ConfigError("synth: labeled_fraction must be in (0,1]");
        const auto valid_discount = [](double g) { return g >= 0.0 && g < 1.0; };
        if (!valid_discount(discount) || !valid_discount(discount_fast) || !valid_discount(discount_slow))
            throw ConfigError("synth: discounts must lie in [0,1)");
        if (feature_noise < 0.0) throw ConfigError("synth: feature_noise must be >= 0");
    }
};

inline EventStream synth_stream(const SynthConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng rng(splitmix64(seed));

    std::vector<double> attr_a(cfg.destinations), attr_b(cfg.destinations);
    for (std::size_t d = 0; d < cfg.destinations; ++d) {
        attr_a[d] = bernoulli(rng, 0.5) ? 1.0 : 0.0;
        attr_b[d] = bernoulli(rng, 0.5) ? 1.0 : 0.0;
    }

    EventStream stream;
    stream.feature_dim = cfg.feature_dim;
    stream.dst_offset = static_cast<NodeId>(cfg.sources);
    stream.node_count = cfg.sources + cfg.destinations;
    stream.destination_ids.resize(cfg.destinations);
    for (std::size_t d = 0; d < cfg.destinations; ++d)
        stream.destination_ids[d] = static_cast<NodeId>(cfg.sources + d);

    std::vector<double> acc_fast(cfg.sources, 0.0), acc_slow(cfg.sources, 0.0);
    std::vector<double> raw_signal(cfg.events);
    stream.events.resize(cfg.events);

    double t = 0.0;
    for (std::size_t i = 0; i < cfg.events; ++i) {
        EdgeEvent& ev = stream.events[i];
        const std::size_t u = uniform_index(rng, cfg.sources);
        const std::size_t d = uniform_index(rng, cfg.destinations);
        t += -std::log(1.0 - uniform01(rng));
        ev.src = static_cast<NodeId>(u);
        ev.dst = static_cast<NodeId>(cfg.sources + d);
        ev.timestamp = t;
        ev.features.resize(cfg.feature_dim);
        ev.features[0] = attr_a[d] + cfg.feature_noise * normal01(rng);
        ev.features[1] = attr_b[d] + cfg.feature_noise * normal01(rng);
        for (std::size_t j = 2; j < cfg.feature_dim; ++j) ev.features[j] = normal01(rng);

        // Label signal reads the accumulators before this event updates them.
        // The tiny jitter breaks ties so the rate threshold is exact.
        double signal;
        if (cfg.heterogeneous) {
            signal = 0.5 * acc_fast[u] + 0.5 * acc_slow[u];
            acc_fast[u] = cfg.discount_fast * acc_fast[u] + (1.0 - cfg.discount_fast) * attr_a[d];
            acc_slow[u] = cfg.discount_slow * acc_slow[u] + (1.0 - cfg.discount_slow) * attr_b[d];
        } else {
            signal = acc_fast[u];
            acc_fast[u] = cfg.discount * acc_fast[u] + (1.0 - cfg.discount) * attr_a[d];
        }
        raw_signal[i] = signal + 1e-9 * uniform01(rng);
    }

    // Threshold at the (1 - rate) quantile of the realized signal
    // distribution, which pins the positive rate up to integer rounding.
    std::vector<double> sorted = raw_signal;
    const std::size_t cut = static_cast<std::size_t>(
        std::min<double>(static_cast<double>(cfg.events - 1),
                         std::floor((1.0 - cfg.positive_rate) * static_cast<double>(cfg.events))));
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(cut), sorted.end());
    const double threshold = sorted[cut];

    for (std::size_t i = 0; i < cfg.events; ++i) {
        const bool labeled = cfg.labeled_fraction >= 1.0 || bernoulli(rng, cfg.labeled_fraction);
        if (labeled) stream.events[i].label = raw_signal[i] >= threshold ? 1 : 0;
    }
    return stream;
}

}  // namespace dgs
