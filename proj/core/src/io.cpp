#include "streamsbm/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <unordered_set>

namespace streamsbm {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
bool parse_number(std::string_view field, T& out) {
    field = trim(field);
    if (field.empty()) {
        return false;
    }
    if (field.front() == '+') {
        field.remove_prefix(1);
    }
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    return ec == std::errc() && ptr == field.data() + field.size();
}

/// Splits on `sep` (or on runs of blanks when sep is 0) into exactly `n` fields.
template <std::size_t N>
bool split_fields(std::string_view line, char sep, std::array<std::string_view, N>& fields) {
    std::size_t count = 0;
    if (sep != 0) {
        std::size_t begin = 0;
        while (true) {
            const auto end = line.find(sep, begin);
            if (count == N) {
                return false;
            }
            fields[count++] = line.substr(begin, end == std::string_view::npos ? end : end - begin);
            if (end == std::string_view::npos) {
                break;
            }
            begin = end + 1;
        }
        return count == N;
    }
    std::size_t pos = 0;
    while (pos < line.size()) {
        const auto begin = line.find_first_not_of(" \t\r", pos);
        if (begin == std::string_view::npos) {
            break;
        }
        const auto end = std::min(line.find_first_of(" \t\r", begin), line.size());
        if (count == N) {
            return false;
        }
        fields[count++] = line.substr(begin, end - begin);
        pos = end;
    }
    return count == N;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open " + path);
    }
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write " + path);
    }
    return out;
}

}  // namespace

std::string format_double(double value) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return {buf.data(), static_cast<std::size_t>(ptr - buf.data())};
}

EventReader::EventReader(std::istream& in, EventFormat format) : in_(&in), format_(format) {}

std::optional<Event> EventReader::next() {
    while (std::getline(*in_, buffer_)) {
        ++line_;
        const std::string_view row = trim(buffer_);
        if (format_ == EventFormat::Csv && line_ == 1) {
            if (row != "src,dst,t") {
                throw InputError("line 1: expected header src,dst,t", line_);
            }
            continue;
        }
        if (row.empty() || (format_ == EventFormat::Snap && row.front() == '#')) {
            continue;
        }
        std::array<std::string_view, 3> fields;
        Event e;
        const bool ok = split_fields(row, format_ == EventFormat::Csv ? ',' : '\0', fields) &&
                        parse_number(fields[0], e.src) && parse_number(fields[1], e.dst) &&
                        parse_number(fields[2], e.t) && std::isfinite(e.t);
        if (!ok) {
            throw InputError("line " + std::to_string(line_) + ": malformed row '" + std::string(row) + "'", line_);
        }
        if (e.src < 0 || e.dst < 0) {
            throw InputError("line " + std::to_string(line_) + ": negative node id", line_);
        }
        if (format_ == EventFormat::Snap) {
            if (!origin_) {
                origin_ = e.t;
            }
            e.t -= *origin_;
            if (e.src == e.dst) {
                ++self_loops_;
                continue;
            }
        } else if (e.src == e.dst) {
            throw InputError("line " + std::to_string(line_) + ": self-interaction src == dst", line_);
        }
        if (e.t < 0.0 && format_ == EventFormat::Csv) {
            throw InputError("line " + std::to_string(line_) + ": negative time", line_);
        }
        if (count_ > 0 && e.t < last_) {
            throw InputError("line " + std::to_string(line_) + ": time " + format_double(e.t) +
                                 " precedes the previous event",
                             line_);
        }
        last_ = e.t;
        ++count_;
        return e;
    }
    if (format_ == EventFormat::Csv && line_ == 0) {
        throw InputError("line 1: missing header src,dst,t", 1);
    }
    return std::nullopt;
}

std::vector<Event> read_events(std::istream& in, EventFormat format) {
    EventReader reader(in, format);
    std::vector<Event> events;
    while (auto e = reader.next()) {
        events.push_back(*e);
    }
    return events;
}

std::vector<Event> read_events_file(const std::string& path, EventFormat format) {
    auto in = open_input(path);
    return read_events(in, format);
}

void write_events(std::ostream& out, std::span<const Event> events) {
    out << "src,dst,t\n";
    for (const auto& e : events) {
        out << e.src << ',' << e.dst << ',' << format_double(e.t) << '\n';
    }
}

void write_events_file(const std::string& path, std::span<const Event> events) {
    auto out = open_output(path);
    write_events(out, events);
}

EdgeList read_edge_list(std::istream& in, std::optional<NodeId> num_nodes) {
    std::string buffer;
    std::size_t line = 0;
    std::vector<NodePair> pairs;
    NodeId largest = -1;
    while (std::getline(in, buffer)) {
        ++line;
        const std::string_view row = trim(buffer);
        if (line == 1) {
            if (row != "src,dst") {
                throw InputError("line 1: expected header src,dst", line);
            }
            continue;
        }
        if (row.empty()) {
            continue;
        }
        std::array<std::string_view, 2> fields;
        NodePair p;
        if (!split_fields(row, ',', fields) || !parse_number(fields[0], p.src) || !parse_number(fields[1], p.dst)) {
            throw InputError("line " + std::to_string(line) + ": malformed row '" + std::string(row) + "'", line);
        }
        largest = std::max({largest, p.src, p.dst});
        pairs.push_back(p);
    }
    if (line == 0) {
        throw InputError("line 1: missing header src,dst", 1);
    }
    return EdgeList(num_nodes.value_or(largest + 1), std::move(pairs));
}

EdgeList read_edge_list_file(const std::string& path, std::optional<NodeId> num_nodes) {
    auto in = open_input(path);
    return read_edge_list(in, num_nodes);
}

void write_edge_list(std::ostream& out, const EdgeList& edges) {
    out << "src,dst\n";
    for (const auto& p : edges.pairs()) {
        out << p.src << ',' << p.dst << '\n';
    }
}

void write_edge_list_file(const std::string& path, const EdgeList& edges) {
    auto out = open_output(path);
    write_edge_list(out, edges);
}

EdgeList derive_edge_list(std::span<const Event> events) {
    if (events.empty()) {
        throw InputError("cannot derive an edge list from an empty stream");
    }
    std::unordered_set<std::uint64_t> seen;
    std::vector<NodePair> pairs;
    NodeId largest = 0;
    for (const auto& e : events) {
        largest = std::max({largest, e.src, e.dst});
        if (seen.insert(pair_key(e.src, e.dst)).second) {
            pairs.push_back({e.src, e.dst});
        }
    }
    return EdgeList(largest + 1, std::move(pairs));
}

StreamSummary summarize_stream(EventReader& reader) {
    std::unordered_set<std::uint64_t> seen;
    std::vector<NodePair> pairs;
    NodeId largest = 0;
    StreamSummary out;
    while (auto e = reader.next()) {
        largest = std::max({largest, e->src, e->dst});
        if (seen.insert(pair_key(e->src, e->dst)).second) {
            pairs.push_back({e->src, e->dst});
        }
        out.last_time = e->t;
        ++out.events;
    }
    if (out.events == 0) {
        throw InputError("cannot derive an edge list from an empty stream");
    }
    out.edges = EdgeList(largest + 1, std::move(pairs));
    return out;
}

TrainTestSplit split_train_test(std::span<const Event> events, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw InputError("train fraction must lie in (0, 1]");
    }
    require_sorted(events);
    TrainTestSplit out;
    if (events.empty()) {
        return out;
    }
    const auto rank = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(events.size()) - 1e-9));
    out.t_split = events[std::clamp<std::size_t>(rank, 1, events.size()) - 1].t;
    const auto cut = std::upper_bound(events.begin(), events.end(), out.t_split,
                                      [](double t, const Event& e) { return t < e.t; });
    out.train.assign(events.begin(), cut);
    out.test.assign(cut, events.end());
    return out;
}

void write_trace_header(std::ostream& out) { out << "window,n_events,eta,elbo_norm,loglik_norm\n"; }

void write_trace_row(std::ostream& out, const WindowRecord& record) {
    out << record.window << ',' << record.events << ',' << format_double(record.eta) << ','
        << format_double(record.elbo_norm) << ',' << format_double(record.loglik_norm) << '\n';
}

void stream_online(EventReader& reader, OnlineEstimator& estimator,
                   const std::function<void(const WindowRecord&)>& sink) {
    const WindowConfig& windows = estimator.windows();
    std::vector<Event> buffer;
    const auto flush = [&] {
        const WindowRecord& record = estimator.process_window(estimator.next_window(), buffer);
        if (sink) {
            sink(record);
        }
        buffer.clear();
    };
    while (auto e = reader.next()) {
        if (e->t > windows.horizon() || e->t < 0.0) {
            throw InputError("line " + std::to_string(reader.line()) + ": time outside [0, T]", reader.line());
        }
        const std::size_t n = windows.window_of(e->t);
        while (estimator.next_window() < n) {
            flush();
        }
        buffer.push_back(*e);
    }
    while (estimator.next_window() <= windows.count()) {
        flush();
    }
}

}  // namespace streamsbm
