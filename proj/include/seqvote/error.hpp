// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 seqvote Contributors

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace seqvote {

// Base class of every error the toolkit raises.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration: out-of-range parameters, unknown model ids,
// inconsistent pipeline settings.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed input file. Carries the file and 1-based line when known.
class ParseError : public Error {
public:
    ParseError(std::string file, std::size_t line, const std::string& what)
        : Error(file + ":" + std::to_string(line) + ": " + what),
          file_(std::move(file)),
          line_(line) {}

    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

// Well-formed input that violates a cross-record constraint
// (duplicate ids, unresolvable references, missing labels).
class DataError : public Error {
public:
    using Error::Error;
};

}  // namespace seqvote
