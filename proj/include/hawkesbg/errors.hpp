#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hawkesbg {

// Argument outside the domain of a function (negative lag, time outside the window).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Invalid model or basis configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Non-finite intermediate value (overflowing background rate, etc.).
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, std::size_t index)
        : std::runtime_error(what + " (at index " + std::to_string(index) + ")"), index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

// An iterative solver gave up. Carries the best iterate it found.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, std::vector<double> best, double gradient_norm)
        : std::runtime_error(what), best_(std::move(best)), gradient_norm_(gradient_norm) {}

    const std::vector<double>& best_iterate() const noexcept { return best_; }
    double gradient_norm() const noexcept { return gradient_norm_; }

private:
    std::vector<double> best_;
    double gradient_norm_;
};

// Malformed input text. line() is 1-based; 0 when no line applies.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace hawkesbg
