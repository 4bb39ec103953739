// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace finrag {

// Lowercased word tokens in order of appearance, duplicates kept. A word is a
// maximal run of ASCII letters, digits, or non-ASCII bytes; everything else
// (punctuation, whitespace) separates words.
std::vector<std::string> tokenize_words(std::string_view text);

std::string_view trim(std::string_view text);
std::vector<std::string_view> split(std::string_view text, char sep);

// Reads a file into lines with trailing '\r' removed. Throws Error(kIo).
std::vector<std::string> read_lines(const std::filesystem::path& path);
std::string read_file(const std::filesystem::path& path);
// Writes atomically enough for our purposes: temp file, then rename.
void write_file(const std::filesystem::path& path, std::string_view contents);

double parse_double(std::string_view text, std::string_view what);

// FNV-1a; stable across platforms, used to derive per-task seeds.
std::uint64_t stable_hash(std::string_view text);

}  // namespace finrag
