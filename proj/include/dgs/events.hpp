#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dgs/error.hpp"

namespace dgs {

using NodeId = std::uint32_t;

/// One timestamped interaction. `label` is empty for unlabeled events
/// (written as -1 in CSV). Destination ids are offset into a disjoint range
/// at load time, so src and dst never collide even on bipartite data.
struct EdgeEvent {
    NodeId src = 0;
    NodeId dst = 0;
    double timestamp = 0.0;
    std::vector<double> features;
    std::optional<int> label;

    bool operator==(const EdgeEvent&) const = default;
};

struct EventStream {
    std::vector<EdgeEvent> events;
    std::size_t node_count = 0;
    std::size_t feature_dim = 0;
    std::vector<NodeId> destination_ids;  // sorted unique link-prediction candidates
    NodeId dst_offset = 0;                // number of source ids; dst - dst_offset recovers file ids

    std::size_t size() const { return events.size(); }
};

/// Train-split feature statistics: standardization moments for the learned
/// embedding and percentile bucket edges for the Graph-Sprints features.
struct FeatureStats {
    std::vector<double> mean;
    std::vector<double> stddev;
    std::vector<std::vector<double>> bucket_edges;  // per feature, strictly ascending

    std::size_t feature_dim() const { return mean.size(); }

    std::size_t total_buckets() const {
        std::size_t n = 0;
        for (const auto& e : bucket_edges) n += e.size() + 1;
        return n;
    }
};

namespace detail {

inline double parse_field_double(std::string_view field, std::size_t lineno, const char* what) {
    double out = 0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), out);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
        throw DataError("line " + std::to_string(lineno) + ": malformed " + what + " '" + std::string(field) + "'");
    return out;
}

inline long long parse_field_int(std::string_view field, std::size_t lineno, const char* what) {
    long long out = 0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), out);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
        throw DataError("line " + std::to_string(lineno) + ": malformed " + what + " '" + std::string(field) + "'");
    return out;
}

inline void split_csv(std::string_view line, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

}  // namespace detail

/// Parses one `src,dst,timestamp,label,f0,...` row. The destination id is
/// kept as written; load_dataset applies the bipartite offset afterwards.
inline EdgeEvent parse_event_csv(std::string_view line, std::size_t feature_dim, std::size_t lineno = 0) {
    std::vector<std::string_view> fields;
    detail::split_csv(line, fields);
    if (fields.size() != 4 + feature_dim)
        throw DataError("line " + std::to_string(lineno) + ": expected " + std::to_string(4 + feature_dim) +
                        " fields, got " + std::to_string(fields.size()));
    EdgeEvent ev;
    const long long src = detail::parse_field_int(fields[0], lineno, "src");
    const long long dst = detail::parse_field_int(fields[1], lineno, "dst");
    if (src < 0 || dst < 0) throw DataError("line " + std::to_string(lineno) + ": negative node id");
    ev.src = static_cast<NodeId>(src);
    ev.dst = static_cast<NodeId>(dst);
    ev.timestamp = detail::parse_field_double(fields[2], lineno, "timestamp");
    if (!(ev.timestamp >= 0.0) || !std::isfinite(ev.timestamp))
        throw DataError("line " + std::to_string(lineno) + ": negative or non-finite timestamp");
    const long long label = detail::parse_field_int(fields[3], lineno, "label");
    if (label != -1 && label != 0 && label != 1)
        throw DataError("line " + std::to_string(lineno) + ": label must be -1 (none), 0, or 1");
    if (label >= 0) ev.label = static_cast<int>(label);
    ev.features.resize(feature_dim);
    for (std::size_t i = 0; i < feature_dim; ++i)
        ev.features[i] = detail::parse_field_double(fields[4 + i], lineno, "feature");
    return ev;
}

/// Inverse of parse_event_csv up to floating-point text representation:
/// parse(format(e)) == e exactly. `dst_offset` restores file-space dst ids.
inline std::string format_event_csv(const EdgeEvent& ev, NodeId dst_offset = 0) {
    char buf[48];
    std::string out = std::to_string(ev.src);
    out += ',';
    out += std::to_string(ev.dst - dst_offset);
    std::snprintf(buf, sizeof buf, ",%.17g", ev.timestamp);
    out += buf;
    out += ',';
    out += std::to_string(ev.label ? *ev.label : -1);
    for (const double f : ev.features) {
        std::snprintf(buf, sizeof buf, ",%.17g", f);
        out += buf;
    }
    return out;
}

/// Loads a CSV event file: optional one-line header (detected by a
/// non-numeric first field), rows sorted by timestamp (stable for ties),
/// destination ids offset past the source id range.
inline EventStream load_dataset(const std::string& path, std::size_t feature_dim) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset: " + path);
    EventStream stream;
    stream.feature_dim = feature_dim;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (lineno == 1) {
            // Header heuristic: first field does not parse as a number.
            const auto comma = line.find(',');
            const std::string_view first(line.data(), comma == std::string::npos ? line.size() : comma);
            double probe = 0;
            const auto res = std::from_chars(first.data(), first.data() + first.size(), probe);
            if (res.ec != std::errc{} || res.ptr != first.data() + first.size()) continue;
        }
        stream.events.push_back(parse_event_csv(line, feature_dim, lineno));
    }
    if (stream.events.empty()) throw DataError("empty stream: " + path);

    std::stable_sort(stream.events.begin(), stream.events.end(),
                     [](const EdgeEvent& a, const EdgeEvent& b) { return a.timestamp < b.timestamp; });

    NodeId max_src = 0, max_dst = 0;
    for (const auto& ev : stream.events) {
        max_src = std::max(max_src, ev.src);
        max_dst = std::max(max_dst, ev.dst);
    }
    stream.dst_offset = max_src + 1;
    for (auto& ev : stream.events) ev.dst += stream.dst_offset;
    stream.node_count = static_cast<std::size_t>(stream.dst_offset) + max_dst + 1;

    std::vector<NodeId> dsts;
    dsts.reserve(stream.events.size());
    for (const auto& ev : stream.events) dsts.push_back(ev.dst);
    std::sort(dsts.begin(), dsts.end());
    dsts.erase(std::unique(dsts.begin(), dsts.end()), dsts.end());
    stream.destination_ids = std::move(dsts);
    return stream;
}

struct SplitFractions {
    double train = 0.7;
    double val = 0.15;
    double test = 0.15;
};

struct SplitStreams {
    EventStream train;
    EventStream val;
    EventStream test;
};

/// Chronological split: first floor(train*N) events, next floor(val*N), rest.
inline SplitStreams temporal_split(const EventStream& stream, SplitFractions f) {
    const auto in_open_unit = [](double x) { return x > 0.0 && x < 1.0; };
    if (!in_open_unit(f.train) || !in_open_unit(f.val) || !in_open_unit(f.test))
        throw ConfigError("split fractions must lie in (0,1)");
    if (std::abs(f.train + f.val + f.test - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");
    const std::size_t n = stream.events.size();
    if (n < 3) throw DataError("stream too small to split: " + std::to_string(n) + " events");

    const std::size_t n_train = static_cast<std::size_t>(std::floor(f.train * static_cast<double>(n)));
    const std::size_t n_val = static_cast<std::size_t>(std::floor(f.val * static_cast<double>(n)));

    SplitStreams out;
    const auto copy_meta = [&stream](EventStream& s) {
        s.node_count = stream.node_count;
        s.feature_dim = stream.feature_dim;
        s.destination_ids = stream.destination_ids;
        s.dst_offset = stream.dst_offset;
    };
    copy_meta(out.train);
    copy_meta(out.val);
    copy_meta(out.test);
    out.train.events.assign(stream.events.begin(), stream.events.begin() + n_train);
    out.val.events.assign(stream.events.begin() + n_train, stream.events.begin() + n_train + n_val);
    out.test.events.assign(stream.events.begin() + n_train + n_val, stream.events.end());
    return out;
}

namespace detail {

/// Quantile with linear interpolation on the sorted sample, matching the
/// brute-force sort-and-index oracle used in tests.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double pos = q * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

/// Per-feature mean/stddev over the train split plus B-1 percentile bucket
/// edges (duplicates collapsed, so low-cardinality features get fewer
/// effective buckets).
inline FeatureStats feature_stats(const EventStream& train, std::size_t buckets_per_feature) {
    if (train.events.empty()) throw DataError("feature_stats requires a non-empty train split");
    if (buckets_per_feature < 2) throw ConfigError("buckets_per_feature must be >= 2");
    const std::size_t f = train.feature_dim;
    const std::size_t n = train.events.size();

    FeatureStats stats;
    stats.mean.assign(f, 0.0);
    stats.stddev.assign(f, 0.0);
    stats.bucket_edges.resize(f);

    std::vector<double> column(n);
    for (std::size_t j = 0; j < f; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            column[i] = train.events[i].features[j];
            sum += column[i];
        }
        const double mean = sum / static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = column[i] - mean;
            var += d * d;
        }
        stats.mean[j] = mean;
        stats.stddev[j] = std::sqrt(var / static_cast<double>(n));

        std::sort(column.begin(), column.end());
        std::vector<double> edges;
        edges.reserve(buckets_per_feature - 1);
        for (std::size_t k = 1; k < buckets_per_feature; ++k) {
            const double q = static_cast<double>(k) / static_cast<double>(buckets_per_feature);
            const double edge = detail::quantile_sorted(column, q);
            if (edges.empty() || edge > edges.back()) edges.push_back(edge);
        }
        stats.bucket_edges[j] = std::move(edges);
    }
    return stats;
}

/// Z-scores a raw feature vector with train statistics; constant features
/// (stddev 0) map to 0.
inline void standardize(const FeatureStats& stats, const std::vector<double>& raw, std::vector<double>& out) {
    const std::size_t f = stats.mean.size();
    out.resize(f);
    for (std::size_t j = 0; j < f; ++j)
        out[j] = stats.stddev[j] > 0.0 ? (raw[j] - stats.mean[j]) / stats.stddev[j] : 0.0;
}

}  // namespace dgs
