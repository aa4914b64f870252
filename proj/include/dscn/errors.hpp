#pragma once

// Exception types shared by every dscn module.

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dscn {

/// Base class for all library errors.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite entries, empty inputs, out-of-range arguments.
class invalid_input : public error {
public:
    using error::error;
};

/// Operand shapes do not agree.
class dimension_error : public error {
public:
    using error::error;
};

/// A builder configuration or experiment spec is malformed.
class config_error : public error {
public:
    using error::error;
};

/// Missing or unreadable/unwritable file.
class io_error : public error {
public:
    using error::error;
};

/// A document could not be parsed. `line` is 1-based, 0 when unknown.
class parse_error : public error {
public:
    parse_error(const std::string& what, std::size_t line = 0)
        : error(line == 0 ? what : "line " + std::to_string(line) + ": " + what)
        , line_(line)
    {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A model document carries an unsupported format_version.
class version_error : public error {
public:
    using error::error;
};

/// A candidate hidden vector has zero norm and cannot be scored.
class degenerate_candidate : public error {
public:
    using error::error;
};

} // namespace dscn
