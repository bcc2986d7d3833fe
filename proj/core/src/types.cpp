#include "streamsbm/types.hpp"

#include <algorithm>
#include <cmath>

namespace streamsbm {

void require_sorted(std::span<const Event> events) {
    for (std::size_t i = 1; i < events.size(); ++i) {
        if (events[i].t < events[i - 1].t) {
            throw InputError("events are not sorted by time: event " + std::to_string(i) +
                                 " precedes its predecessor",
                             i);
        }
    }
}

EdgeList::EdgeList(NodeId num_nodes, std::vector<NodePair> pairs)
    : num_nodes_(num_nodes), pairs_(std::move(pairs)) {
    if (num_nodes_ < 1) {
        throw InputError("edge list needs at least one node");
    }
    std::sort(pairs_.begin(), pairs_.end());
    for (std::size_t p = 0; p < pairs_.size(); ++p) {
        const auto [src, dst] = pairs_[p];
        if (src < 0 || dst < 0 || src >= num_nodes_ || dst >= num_nodes_) {
            throw InputError("pair (" + std::to_string(src) + "," + std::to_string(dst) +
                             ") has a node id outside [0, " + std::to_string(num_nodes_) + ")");
        }
        if (src == dst) {
            throw InputError("self pair (" + std::to_string(src) + "," + std::to_string(dst) +
                             ") is not allowed");
        }
        if (p > 0 && pairs_[p - 1] == pairs_[p]) {
            throw InputError("duplicate pair (" + std::to_string(src) + "," + std::to_string(dst) + ")");
        }
    }

    index_.reserve(pairs_.size());
    out_offsets_.assign(static_cast<std::size_t>(num_nodes_) + 1, 0);
    in_offsets_.assign(static_cast<std::size_t>(num_nodes_) + 1, 0);
    for (std::size_t p = 0; p < pairs_.size(); ++p) {
        index_.emplace(pair_key(pairs_[p].src, pairs_[p].dst), static_cast<std::uint32_t>(p));
        ++out_offsets_[static_cast<std::size_t>(pairs_[p].src) + 1];
        ++in_offsets_[static_cast<std::size_t>(pairs_[p].dst) + 1];
    }
    for (std::size_t i = 1; i < out_offsets_.size(); ++i) {
        out_offsets_[i] += out_offsets_[i - 1];
        in_offsets_[i] += in_offsets_[i - 1];
    }
    out_pairs_.resize(pairs_.size());
    in_pairs_.resize(pairs_.size());
    std::vector<std::uint32_t> out_fill(out_offsets_.begin(), out_offsets_.end() - 1);
    std::vector<std::uint32_t> in_fill(in_offsets_.begin(), in_offsets_.end() - 1);
    for (std::size_t p = 0; p < pairs_.size(); ++p) {
        out_pairs_[out_fill[static_cast<std::size_t>(pairs_[p].src)]++] = static_cast<std::uint32_t>(p);
        in_pairs_[in_fill[static_cast<std::size_t>(pairs_[p].dst)]++] = static_cast<std::uint32_t>(p);
    }
}

std::optional<std::size_t> EdgeList::find(NodeId src, NodeId dst) const {
    const auto it = index_.find(pair_key(src, dst));
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::span<const std::uint32_t> EdgeList::outbound(NodeId node) const {
    const auto i = static_cast<std::size_t>(node);
    return std::span<const std::uint32_t>(out_pairs_).subspan(out_offsets_.at(i),
                                                              out_offsets_.at(i + 1) - out_offsets_[i]);
}

std::span<const std::uint32_t> EdgeList::inbound(NodeId node) const {
    const auto i = static_cast<std::size_t>(node);
    return std::span<const std::uint32_t>(in_pairs_).subspan(in_offsets_.at(i),
                                                             in_offsets_.at(i + 1) - in_offsets_[i]);
}

std::size_t EdgeList::memory_bytes() const noexcept {
    return pairs_.capacity() * sizeof(NodePair) +
           index_.size() * (sizeof(std::uint64_t) + sizeof(std::uint32_t) + 2 * sizeof(void*)) +
           index_.bucket_count() * sizeof(void*) +
           (out_offsets_.capacity() + out_pairs_.capacity() + in_offsets_.capacity() +
            in_pairs_.capacity()) *
               sizeof(std::uint32_t);
}

WindowConfig::WindowConfig(double window_length, double horizon) : dt_(window_length), horizon_(horizon) {
    if (!(dt_ > 0.0) || !std::isfinite(dt_)) {
        throw InputError("window length dT must be positive and finite");
    }
    if (!(horizon_ >= 0.0) || !std::isfinite(horizon_)) {
        throw InputError("horizon T must be nonnegative and finite");
    }
    // A relative slack absorbs representation error in T/dT (e.g. 1.0 / 0.1).
    const double ratio = horizon_ / dt_;
    auto n = static_cast<std::size_t>(std::ceil(ratio - 1e-9 * std::max(1.0, ratio)));
    count_ = std::max<std::size_t>(n, 1);
}

double WindowConfig::window_start(std::size_t n) const {
    if (n < 1 || n > count_) {
        throw InputError("window index " + std::to_string(n) + " outside [1, " + std::to_string(count_) + "]");
    }
    return static_cast<double>(n - 1) * dt_;
}

double WindowConfig::window_end(std::size_t n) const {
    if (n < 1 || n > count_) {
        throw InputError("window index " + std::to_string(n) + " outside [1, " + std::to_string(count_) + "]");
    }
    return n == count_ ? horizon_ : std::min(static_cast<double>(n) * dt_, horizon_);
}

std::size_t WindowConfig::window_of(double t) const {
    if (t < 0.0 || t > horizon_) {
        throw InputError("time " + std::to_string(t) + " outside [0, T]");
    }
    auto n = static_cast<std::size_t>(std::floor(t / dt_)) + 1;
    n = std::clamp<std::size_t>(n, 1, count_);
    // Keep the answer consistent with the computed floating-point bounds.
    while (n > 1 && t < window_start(n)) {
        --n;
    }
    while (n < count_ && t >= window_end(n)) {
        ++n;
    }
    return n;
}

std::vector<WindowSlice> partition_windows(std::span<const Event> events, const WindowConfig& config) {
    require_sorted(events);
    if (!events.empty() && events.back().t > config.horizon()) {
        throw InputError("event time exceeds the horizon T", events.size() - 1);
    }
    if (!events.empty() && events.front().t < 0.0) {
        throw InputError("event time is negative", 0);
    }
    std::vector<WindowSlice> slices;
    slices.reserve(config.count());
    std::size_t cursor = 0;
    for (std::size_t n = 1; n <= config.count(); ++n) {
        const double start = config.window_start(n);
        const double end = config.window_end(n);
        const bool last = n == config.count();
        std::size_t stop = cursor;
        while (stop < events.size() && (events[stop].t < end || last)) {
            ++stop;
        }
        slices.push_back({n, start, end, events.subspan(cursor, stop - cursor)});
        cursor = stop;
    }
    return slices;
}

}  // namespace streamsbm
