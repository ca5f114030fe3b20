#include "hawkesbg/event_io.hpp"

#include "hawkesbg/errors.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <vector>

namespace hawkesbg {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::optional<double> header_value(std::string_view line, std::string_view key, std::size_t line_no) {
    line = trim(line);
    if (line.empty() || line.front() != '#') {
        return std::nullopt;
    }
    line = trim(line.substr(1));
    if (line.substr(0, key.size()) != key || line.size() <= key.size() || line[key.size()] != '=') {
        return std::nullopt;
    }
    return parse_double(trim(line.substr(key.size() + 1)), line_no);
}

}  // namespace

std::string format_double(double value) {
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

double parse_double(std::string_view text, std::size_t line) {
    text = trim(text);
    double value = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    if (!text.empty() && *first == '+') {
        ++first;
    }
    const auto result = std::from_chars(first, last, value);
    if (text.empty() || result.ec != std::errc() || result.ptr != last) {
        throw ParseError("expected a number, got '" + std::string(text) + "'", line);
    }
    return value;
}

void write_events_csv(const EventSequence& seq, std::ostream& out) {
    out << "# start=" << format_double(seq.window().start()) << '\n';
    out << "# end=" << format_double(seq.window().end()) << '\n';
    for (double t : seq.times()) {
        out << format_double(t) << '\n';
    }
}

EventSequence read_events_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::optional<double> start;
    std::optional<double> end;
    std::vector<double> times;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view view = trim(line);
        if (view.empty()) {
            continue;
        }
        if (view.front() == '#') {
            if (auto s = header_value(view, "start", line_no)) {
                start = s;
            } else if (auto e = header_value(view, "end", line_no)) {
                end = e;
            }
            continue;
        }
        if (!start || !end) {
            throw ParseError("event file must begin with '# start=' and '# end=' header lines",
                             line_no);
        }
        times.push_back(parse_double(view, line_no));
    }
    if (!start || !end) {
        throw ParseError("event file is missing the '# start=' / '# end=' header", line_no);
    }
    try {
        return EventSequence(std::move(times), ObservationWindow(*start, *end));
    } catch (const DomainError& err) {
        throw ParseError(err.what(), 0);
    }
}

void save_events(const EventSequence& seq, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    write_events_csv(seq, out);
}

EventSequence load_events(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    return read_events_csv(in);
}

}  // namespace hawkesbg
