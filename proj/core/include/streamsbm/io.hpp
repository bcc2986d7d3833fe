#pragma once

#include "streamsbm/online.hpp"
#include "streamsbm/types.hpp"

#include <cstddef>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace streamsbm {

/// Csv : header `src,dst,t`, one event per line, times kept as written.
/// Snap: whitespace-separated `src dst time` without header; times are shifted so the
///       first event sits at 0 and self-loops are skipped.
enum class EventFormat { Csv, Snap };

/// Incremental event reader holding one line at a time. Rejects malformed rows and
/// decreasing timestamps with the 1-based line number.
class EventReader {
public:
    EventReader(std::istream& in, EventFormat format);

    /// Next event, or nullopt at end of input.
    [[nodiscard]] std::optional<Event> next();

    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] std::size_t events_read() const noexcept { return count_; }
    [[nodiscard]] std::size_t skipped_self_loops() const noexcept { return self_loops_; }

private:
    std::istream* in_;
    EventFormat format_;
    std::string buffer_;
    std::size_t line_{0};
    std::size_t count_{0};
    std::size_t self_loops_{0};
    double last_{0.0};
    std::optional<double> origin_;
};

[[nodiscard]] std::vector<Event> read_events(std::istream& in, EventFormat format = EventFormat::Csv);
[[nodiscard]] std::vector<Event> read_events_file(const std::string& path, EventFormat format = EventFormat::Csv);

/// Writes header plus rows; times use the shortest representation that round-trips.
void write_events(std::ostream& out, std::span<const Event> events);
void write_events_file(const std::string& path, std::span<const Event> events);

/// Edge list CSV with header `src,dst`. m defaults to 1 + the largest id.
[[nodiscard]] EdgeList read_edge_list(std::istream& in, std::optional<NodeId> num_nodes = std::nullopt);
[[nodiscard]] EdgeList read_edge_list_file(const std::string& path, std::optional<NodeId> num_nodes = std::nullopt);
void write_edge_list(std::ostream& out, const EdgeList& edges);
void write_edge_list_file(const std::string& path, const EdgeList& edges);

/// A = distinct (src, dst) pairs of the stream, m = 1 + largest id. Rejects an empty stream.
[[nodiscard]] EdgeList derive_edge_list(std::span<const Event> events);

/// One pass over a reader: pairs of A, largest id and last timestamp, in O(|A|) memory.
struct StreamSummary {
    EdgeList edges;
    std::size_t events{0};
    double last_time{0.0};
};
[[nodiscard]] StreamSummary summarize_stream(EventReader& reader);

struct TrainTestSplit {
    std::vector<Event> train;
    std::vector<Event> test;
    double t_split{0.0};
};

/// t_split is the time of the ceil(fraction * N)-th event; train holds every event with
/// t <= t_split, test the rest. fraction must lie in (0, 1].
[[nodiscard]] TrainTestSplit split_train_test(std::span<const Event> events, double fraction);

/// Trace CSV: `window,n_events,eta,elbo_norm,loglik_norm`.
void write_trace_header(std::ostream& out);
void write_trace_row(std::ostream& out, const WindowRecord& record);

/// Feeds a sorted stream to the estimator one window at a time, buffering only the
/// current window. Events past the horizon are rejected. `sink` sees every record.
void stream_online(EventReader& reader, OnlineEstimator& estimator,
                   const std::function<void(const WindowRecord&)>& sink = {});

/// Shortest round-trip decimal form of a double.
[[nodiscard]] std::string format_double(double value);

}  // namespace streamsbm
