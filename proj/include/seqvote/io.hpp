// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 seqvote Contributors

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

namespace seqvote::io {

// Invokes fn(line_number, line) for every non-blank line. Line numbers
// are 1-based. Throws DataError if the file cannot be opened.
void for_each_line(const std::filesystem::path& path,
                   const std::function<void(std::size_t, std::string_view)>& fn);

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file, then renames over the target. Parent
// directories are created as needed.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// FNV-1a, 64 bit.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);
std::string file_digest(const std::filesystem::path& path);

}  // namespace seqvote::io
