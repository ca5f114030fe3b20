#pragma once

#include "hawkesbg/core.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

namespace hawkesbg {

// Event file layout:
//
//   # start=<S>
//   # end=<T>
//   <t_1>
//   ...
//
// Numbers are written in shortest round-trip decimal form, so reading a
// written file reproduces every double exactly.
void write_events_csv(const EventSequence& seq, std::ostream& out);
EventSequence read_events_csv(std::istream& in);

void save_events(const EventSequence& seq, const std::filesystem::path& path);
EventSequence load_events(const std::filesystem::path& path);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
// Full-string strict parse; throws ParseError with the given line number.
double parse_double(std::string_view text, std::size_t line);

}  // namespace hawkesbg
