#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hapsdtn {

// Bad scenario, arguments or geometry. CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or out-of-domain input data. CLI exit code 3.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// An internal invariant failed (conservation, ordering). CLI exit code 4.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace hapsdtn
