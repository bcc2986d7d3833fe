#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace streamsbm {

using NodeId = std::int32_t;

/// Rejected input: malformed data, violated preconditions, unknown pairs.
/// Carries the offending position (event index or line number) when one exists.
class InputError : public std::invalid_argument {
public:
    explicit InputError(const std::string& what, std::optional<std::size_t> position = std::nullopt)
        : std::invalid_argument(what), position_(position) {}

    [[nodiscard]] std::optional<std::size_t> position() const noexcept { return position_; }

private:
    std::optional<std::size_t> position_;
};

/// Numeric failure: non-stationary Hawkes parameters, non-finite values, domain violations.
class NumericError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// One directed timestamped interaction.
struct Event {
    NodeId src{0};
    NodeId dst{0};
    double t{0.0};

    friend bool operator==(const Event&, const Event&) = default;
};

struct NodePair {
    NodeId src{0};
    NodeId dst{0};

    friend bool operator==(const NodePair&, const NodePair&) = default;
    friend auto operator<=>(const NodePair&, const NodePair&) = default;
};

[[nodiscard]] inline std::uint64_t pair_key(NodeId src, NodeId dst) noexcept {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(src)) << 32) |
           static_cast<std::uint32_t>(dst);
}

[[nodiscard]] inline NodePair unpack_pair_key(std::uint64_t key) noexcept {
    return {static_cast<NodeId>(key >> 32), static_cast<NodeId>(key & 0xffffffffu)};
}

/// Throws InputError with the index of the first event whose time precedes its predecessor.
void require_sorted(std::span<const Event> events);

/// The set A of directed node pairs that carry a point process, over m nodes.
///
/// Pairs are stored sorted; index lookups go through a hash map. Per-node
/// adjacency lists hold pair indices for outbound and inbound pairs.
class EdgeList {
public:
    EdgeList() = default;
    EdgeList(NodeId num_nodes, std::vector<NodePair> pairs);

    [[nodiscard]] NodeId num_nodes() const noexcept { return num_nodes_; }
    [[nodiscard]] std::size_t size() const noexcept { return pairs_.size(); }
    [[nodiscard]] bool empty() const noexcept { return pairs_.empty(); }
    [[nodiscard]] const NodePair& pair(std::size_t index) const { return pairs_.at(index); }
    [[nodiscard]] std::span<const NodePair> pairs() const noexcept { return pairs_; }

    [[nodiscard]] std::optional<std::size_t> find(NodeId src, NodeId dst) const;
    [[nodiscard]] bool contains(NodeId src, NodeId dst) const { return find(src, dst).has_value(); }

    [[nodiscard]] std::span<const std::uint32_t> outbound(NodeId node) const;
    [[nodiscard]] std::span<const std::uint32_t> inbound(NodeId node) const;
    [[nodiscard]] std::size_t out_degree(NodeId node) const { return outbound(node).size(); }

    /// Heap bytes held by this edge list.
    [[nodiscard]] std::size_t memory_bytes() const noexcept;

private:
    NodeId num_nodes_{0};
    std::vector<NodePair> pairs_;
    std::unordered_map<std::uint64_t, std::uint32_t> index_;
    std::vector<std::uint32_t> out_offsets_;
    std::vector<std::uint32_t> out_pairs_;
    std::vector<std::uint32_t> in_offsets_;
    std::vector<std::uint32_t> in_pairs_;
};

/// Window length dT and horizon T. Window n (1-based) covers [(n-1)dT, n dT);
/// the final window is closed on the right and may be partial.
class WindowConfig {
public:
    WindowConfig(double window_length, double horizon);

    [[nodiscard]] double window_length() const noexcept { return dt_; }
    [[nodiscard]] double horizon() const noexcept { return horizon_; }
    [[nodiscard]] std::size_t count() const noexcept { return count_; }
    [[nodiscard]] double window_start(std::size_t n) const;
    [[nodiscard]] double window_end(std::size_t n) const;
    /// 1-based window holding time t.
    [[nodiscard]] std::size_t window_of(double t) const;

private:
    double dt_;
    double horizon_;
    std::size_t count_;
};

struct WindowSlice {
    std::size_t index{0};
    double start{0.0};
    double end{0.0};
    std::span<const Event> events;
};

/// Splits a sorted stream into consecutive windows; empty windows are emitted.
[[nodiscard]] std::vector<WindowSlice> partition_windows(std::span<const Event> events,
                                                         const WindowConfig& config);

}  // namespace streamsbm
