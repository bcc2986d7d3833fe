#include "streamsbm/history.hpp"

#include <algorithm>

namespace streamsbm {

HistoryStore::HistoryStore(Mode mode, const EdgeList& edges, double radius)
    : mode_(mode), radius_(radius), num_pairs_(edges.size()) {
    if (mode_ == Mode::Counts) {
        counts_.assign(num_pairs_, 0);
    } else if (!(radius_ >= 0.0)) {
        throw InputError("history radius must be nonnegative");
    }
}

void HistoryStore::add(std::uint32_t pair, double t) {
    if (pair >= num_pairs_) {
        throw InputError("pair index outside the edge list");
    }
    if (mode_ == Mode::Counts) {
        ++counts_[pair];
        return;
    }
    auto& queue = queues_[pair];
    if (!queue.empty() && t < queue.items.back()) {
        throw InputError("history timestamps must arrive in order");
    }
    queue.items.push_back(t);
}

void HistoryStore::trim(double t_current, double radius) {
    if (mode_ == Mode::Counts) {
        return;
    }
    for (auto it = queues_.begin(); it != queues_.end();) {
        auto& q = it->second;
        while (!q.empty() && t_current - q.items[q.head] > radius) {
            ++q.head;
        }
        if (q.empty()) {
            it = queues_.erase(it);
            continue;
        }
        if (q.head > 32 && q.head * 2 > q.items.size()) {
            q.items.erase(q.items.begin(), q.items.begin() + static_cast<std::ptrdiff_t>(q.head));
            q.head = 0;
        }
        ++it;
    }
}

std::uint64_t HistoryStore::count(std::uint32_t pair) const {
    if (mode_ == Mode::Counts) {
        return pair < counts_.size() ? counts_[pair] : 0;
    }
    return times(pair).size();
}

std::span<const double> HistoryStore::times(std::uint32_t pair) const {
    const auto it = queues_.find(pair);
    if (it == queues_.end()) {
        return {};
    }
    return it->second.view();
}

std::size_t HistoryStore::stored_timestamps() const noexcept {
    std::size_t total = 0;
    for (const auto& [key, q] : queues_) {
        total += q.items.size() - q.head;
    }
    return total;
}

std::vector<std::uint32_t> HistoryStore::ordered_keys() const {
    std::vector<std::uint32_t> keys;
    keys.reserve(queues_.size());
    for (const auto& [key, q] : queues_) {
        keys.push_back(key);
    }
    std::sort(keys.begin(), keys.end());
    return keys;
}

std::size_t HistoryStore::memory_bytes() const noexcept {
    std::size_t bytes = counts_.capacity() * sizeof(std::uint64_t);
    bytes += queues_.bucket_count() * sizeof(void*);
    for (const auto& [key, q] : queues_) {
        bytes += sizeof(key) + sizeof(Queue) + 2 * sizeof(void*) + q.items.capacity() * sizeof(double);
    }
    return bytes;
}

void trim_history(HistoryStore& store, const EdgeList& edges, double radius, double t_current,
                  std::span<const Event> new_events) {
    for (std::size_t e = 0; e < new_events.size(); ++e) {
        const auto& ev = new_events[e];
        if (ev.t > t_current) {
            throw InputError("new event lies after the current time", e);
        }
        const auto pair = edges.find(ev.src, ev.dst);
        if (!pair) {
            throw InputError("event on pair (" + std::to_string(ev.src) + "," + std::to_string(ev.dst) +
                                 ") which is not in the edge list",
                             e);
        }
        store.add(static_cast<std::uint32_t>(*pair), ev.t);
    }
    store.trim(t_current, radius);
}

}  // namespace streamsbm
