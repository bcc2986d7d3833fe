#pragma once

#include "streamsbm/types.hpp"

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace streamsbm {

/// Per-pair sufficient statistics keyed by pair.
///
/// Counts mode keeps the cumulative event count of every pair of A (dense, sized |A|).
/// Timestamps mode keeps, per pair that has seen events, a queue of its recent timestamps;
/// after trim(t) every queue holds only times s with t - s <= radius, and empty queues are dropped.
class HistoryStore {
public:
    enum class Mode { Counts, Timestamps };

    HistoryStore() = default;
    HistoryStore(Mode mode, const EdgeList& edges, double radius);

    [[nodiscard]] Mode mode() const noexcept { return mode_; }
    [[nodiscard]] double radius() const noexcept { return radius_; }

    /// Records an event; the pair must belong to the edge list the store was built for.
    void add(std::uint32_t pair, double t);
    /// Pops queue fronts older than t_current - radius.
    void trim(double t_current, double radius);

    [[nodiscard]] std::uint64_t count(std::uint32_t pair) const;
    [[nodiscard]] std::span<const double> times(std::uint32_t pair) const;

    /// Number of pairs holding a nonempty queue (timestamps mode).
    [[nodiscard]] std::size_t active_pairs() const noexcept { return queues_.size(); }
    [[nodiscard]] std::size_t stored_timestamps() const noexcept;

    /// Visits every nonempty queue as (pair index, timestamps) in ascending pair order.
    template <typename Fn>
    void for_each_queue(Fn&& fn) const {
        for (const auto pair : ordered_keys()) {
            fn(pair, times(pair));
        }
    }

    [[nodiscard]] std::size_t memory_bytes() const noexcept;

private:
    struct Queue {
        std::vector<double> items;
        std::size_t head{0};

        [[nodiscard]] std::span<const double> view() const noexcept {
            return std::span<const double>(items).subspan(head);
        }
        [[nodiscard]] bool empty() const noexcept { return head == items.size(); }
    };

    [[nodiscard]] std::vector<std::uint32_t> ordered_keys() const;

    Mode mode_{Mode::Counts};
    double radius_{0.0};
    std::size_t num_pairs_{0};
    std::vector<std::uint64_t> counts_;
    std::unordered_map<std::uint32_t, Queue> queues_;
};

/// Appends every new event to its pair's queue (creating queues as needed), then pops
/// queue fronts f with t_current - f > radius. New events must be sorted and <= t_current.
void trim_history(HistoryStore& store, const EdgeList& edges, double radius, double t_current,
                  std::span<const Event> new_events);

}  // namespace streamsbm
