#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cmind {

// ---------------------------------------------------------------------------
// Text helpers
// ---------------------------------------------------------------------------

bool is_ident_start(char c);
bool is_ident_char(char c);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

/// Collapses every run of whitespace to a single space and trims the ends.
std::string collapse_whitespace(std::string_view s);

/// Splits into lines on '\n'; a trailing newline does not produce an empty
/// final element.
std::vector<std::string> split_lines(std::string_view s);

/// True iff `name` occurs in `text` delimited by non-identifier characters.
/// Case-sensitive; identifier characters are [A-Za-z0-9_].
bool contains_identifier_token(std::string_view text, std::string_view name);

/// Replaces invalid UTF-8 byte sequences with U+FFFD so downstream JSON
/// serialization never throws.
std::string utf8_sanitize(std::string_view bytes);

// ---------------------------------------------------------------------------
// Hashing / ids
// ---------------------------------------------------------------------------

std::uint64_t fnv1a64(std::string_view data);
std::string to_hex64(std::uint64_t value);

/// 16 lowercase hex characters from a cryptographically random source
/// (/dev/urandom, falling back to std::random_device).
std::string random_hex16();

// ---------------------------------------------------------------------------
// Filesystem / time
// ---------------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);
/// Write-then-rename so readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string iso8601_utc_now();

} // namespace cmind
