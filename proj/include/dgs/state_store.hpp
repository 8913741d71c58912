#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "dgs/error.hpp"
#include "dgs/events.hpp"
#include "dgs/serialize.hpp"

namespace dgs {

/// Forward-mode sensitivities of one node's state to the global parameters.
/// alpha/beta hold the diagonal dS_i/dalpha_i and dS_i/dbeta_i; w holds
/// dS_i/dW[r][c] for the h rows of i's segment, flattened [i][r][c].
struct RtrlJacobians {
    std::vector<double> alpha;
    std::vector<double> beta;
    std::vector<double> w;

    bool operator==(const RtrlJacobians&) const = default;
};

struct NodeEntry {
    std::vector<double> state;
    RtrlJacobians jac;

    bool operator==(const NodeEntry&) const = default;
};

/// Which Jacobian tables the store maintains. A frozen (inference-only) store
/// tracks none; the delta-embedding variants track alpha/beta but carry no W.
struct JacShape {
    bool track = false;
    std::size_t w_rows = 0;  // h, 0 when the variant has no embedding matrix
    std::size_t w_cols = 0;  // f

    static JacShape frozen() { return {}; }
    static JacShape alpha_beta_only() { return {true, 0, 0}; }
    static JacShape full(std::size_t h, std::size_t f) { return {true, h, f}; }
};

struct PendingUpdate {
    NodeId node = 0;
    double timestamp = 0.0;
    NodeEntry entry;
};

/// Deep-copied view of the store taken at batch start. Every occurrence of a
/// node within the batch reads this frozen entry, never mid-batch updates.
class BatchSnapshot {
public:
    BatchSnapshot() = default;

    const NodeEntry& at(NodeId node) const {
        const auto it = entries_.find(node);
        if (it == entries_.end()) throw ConfigError("snapshot miss for node " + std::to_string(node));
        return it->second;
    }

    bool contains(NodeId node) const { return entries_.count(node) != 0; }
    std::size_t size() const { return entries_.size(); }

private:
    friend class StateStore;
    std::unordered_map<NodeId, NodeEntry> entries_;
};

struct StoreMemoryReport {
    std::size_t resident_nodes = 0;
    std::size_t numbers_per_node = 0;
    std::size_t total_numbers = 0;
    std::size_t bytes = 0;
};

/// Owns per-node states and RTRL Jacobian tables. Entries are allocated
/// lazily on first touch and initialized to zero. A single logical writer
/// commits batches; reads against a BatchSnapshot may fan out across threads.
class StateStore {
public:
    StateStore() = default;

    StateStore(std::size_t node_count, std::size_t state_size, JacShape jac)
        : node_count_(node_count), state_size_(state_size), jac_(jac) {}

    std::size_t node_count() const { return node_count_; }
    std::size_t state_size() const { return state_size_; }
    const JacShape& jac_shape() const { return jac_.track ? jac_ : jac_; }
    bool frozen() const { return !jac_.track; }

    const NodeEntry& get_or_init(NodeId node) {
        check_bounds(node);
        auto it = entries_.find(node);
        if (it == entries_.end()) it = entries_.emplace(node, make_zero_entry()).first;
        return it->second;
    }

    /// Read without inserting; returns nullptr for never-touched nodes.
    const NodeEntry* peek(NodeId node) const {
        check_bounds(node);
        const auto it = entries_.find(node);
        return it == entries_.end() ? nullptr : &it->second;
    }

    const std::vector<double>* peek_state(NodeId node) const {
        const NodeEntry* e = peek(node);
        return e ? &e->state : nullptr;
    }

    BatchSnapshot snapshot_batch(const std::vector<NodeId>& nodes) const {
        BatchSnapshot snap;
        snap.entries_.reserve(nodes.size());
        for (const NodeId node : nodes) {
            check_bounds(node);
            if (snap.entries_.count(node)) continue;
            const auto it = entries_.find(node);
            snap.entries_.emplace(node, it == entries_.end() ? make_zero_entry() : it->second);
        }
        return snap;
    }

    /// Applies a batch of updates. When a node appears several times, the
    /// update with the latest timestamp wins; ties resolve to the last one in
    /// batch order.
    void commit_batch(const std::vector<PendingUpdate>& updates) {
        for (const auto& u : updates) {
            check_bounds(u.node);
            check_shapes(u.entry);
        }
        std::unordered_map<NodeId, const PendingUpdate*> winners;
        for (const auto& u : updates) {
            auto [it, inserted] = winners.emplace(u.node, &u);
            if (!inserted && u.timestamp >= it->second->timestamp) it->second = &u;
        }
        for (const auto& [node, update] : winners) entries_[node] = update->entry;
    }

    void reset() { entries_.clear(); }

    std::size_t numbers_per_node() const {
        std::size_t n = state_size_;
        if (jac_.track) n += 2 * state_size_ + state_size_ * jac_.w_rows * jac_.w_cols;
        return n;
    }

    StoreMemoryReport memory_report() const {
        StoreMemoryReport r;
        r.resident_nodes = entries_.size();
        r.numbers_per_node = numbers_per_node();
        r.total_numbers = r.resident_nodes * r.numbers_per_node;
        r.bytes = r.total_numbers * sizeof(double);
        return r;
    }

    // ---- checkpointing (binary layout in docs/checkpoint_format.md) ----

    void save(std::ostream& out) const {
        BinaryWriter w(out);
        w.magic("DGS1");
        w.u32(kFormatVersion);
        w.u8(jac_.track ? 1 : 0);
        w.u64(state_size_);
        w.u64(jac_.w_rows);
        w.u64(jac_.w_cols);
        w.u64(node_count_);
        std::vector<NodeId> ids;
        ids.reserve(entries_.size());
        for (const auto& [node, entry] : entries_) ids.push_back(node);
        std::sort(ids.begin(), ids.end());
        w.u64(ids.size());
        for (const NodeId node : ids) {
            const NodeEntry& e = entries_.at(node);
            w.u64(node);
            for (double x : e.state) w.f64(x);
            if (jac_.track) {
                for (double x : e.jac.alpha) w.f64(x);
                for (double x : e.jac.beta) w.f64(x);
                for (double x : e.jac.w) w.f64(x);
            }
        }
    }

    void checkpoint(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write checkpoint: " + path);
        save(out);
    }

    static StateStore load(std::istream& in) {
        BinaryReader r(in);
        r.expect_magic("DGS1", "state store magic");
        const std::uint32_t version = r.u32();
        if (version != kFormatVersion)
            throw IoError("unsupported state store version " + std::to_string(version));
        JacShape jac;
        jac.track = r.u8() != 0;
        const std::size_t s = r.u64();
        jac.w_rows = r.u64();
        jac.w_cols = r.u64();
        const std::size_t node_count = r.u64();
        StateStore store(node_count, s, jac);
        const std::uint64_t entries = r.u64();
        for (std::uint64_t i = 0; i < entries; ++i) {
            const NodeId node = static_cast<NodeId>(r.u64());
            NodeEntry e = store.make_zero_entry();
            for (auto& x : e.state) x = r.f64();
            if (jac.track) {
                for (auto& x : e.jac.alpha) x = r.f64();
                for (auto& x : e.jac.beta) x = r.f64();
                for (auto& x : e.jac.w) x = r.f64();
            }
            store.entries_.emplace(node, std::move(e));
        }
        return store;
    }

    static StateStore restore(const std::string& path, std::size_t expected_state_size = 0) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open checkpoint: " + path);
        StateStore store = load(in);
        if (expected_state_size != 0 && store.state_size() != expected_state_size)
            throw IoError("checkpoint state size " + std::to_string(store.state_size()) +
                          " does not match expected " + std::to_string(expected_state_size));
        return store;
    }

    bool operator==(const StateStore& other) const {
        return node_count_ == other.node_count_ && state_size_ == other.state_size_ &&
               jac_.track == other.jac_.track && jac_.w_rows == other.jac_.w_rows &&
               jac_.w_cols == other.jac_.w_cols && entries_ == other.entries_;
    }

private:
    static constexpr std::uint32_t kFormatVersion = 1;

    void check_bounds(NodeId node) const {
        if (node >= node_count_)
            throw DataError("node id " + std::to_string(node) + " out of range (node_count " +
                            std::to_string(node_count_) + ")");
    }

    void check_shapes(const NodeEntry& e) const {
        bool ok = e.state.size() == state_size_;
        if (jac_.track) {
            ok = ok && e.jac.alpha.size() == state_size_ && e.jac.beta.size() == state_size_ &&
                 e.jac.w.size() == state_size_ * jac_.w_rows * jac_.w_cols;
        } else {
            ok = ok && e.jac.alpha.empty() && e.jac.beta.empty() && e.jac.w.empty();
        }
        if (!ok) throw ConfigError("commit_batch: entry shape mismatch");
    }

    NodeEntry make_zero_entry() const {
        NodeEntry e;
        e.state.assign(state_size_, 0.0);
        if (jac_.track) {
            e.jac.alpha.assign(state_size_, 0.0);
            e.jac.beta.assign(state_size_, 0.0);
            e.jac.w.assign(state_size_ * jac_.w_rows * jac_.w_cols, 0.0);
        }
        return e;
    }

    std::size_t node_count_ = 0;
    std::size_t state_size_ = 0;
    JacShape jac_;
    std::unordered_map<NodeId, NodeEntry> entries_;
};

}  // namespace dgs
