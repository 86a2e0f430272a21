#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace cmind {

enum class ArchiveFormat { zip, tar, tar_gz, unknown };

struct ArchiveEntry {
    std::string path;    // relative, normalized, '/' separators
    std::string content; // raw bytes
};

inline constexpr std::size_t kMaxArchiveBytes = 256ull * 1024 * 1024;
inline constexpr std::size_t kMaxArchiveFiles = 50000;

/// Detects the format from magic bytes, never from the file name.
ArchiveFormat detect_archive_format(std::string_view bytes);

/// Extracts all regular-file entries. Directory entries are skipped.
/// Throws UnsupportedArchive for unknown/unreadable input, ArchiveTraversal
/// when any entry path escapes the root (the whole archive is rejected),
/// ArchiveTooLarge past the size/count limits.
std::vector<ArchiveEntry> read_archive(std::string_view bytes);

/// Entry-path and limit validation without retaining contents.
void validate_archive(std::string_view bytes);

/// Normalizes an archive entry path ('\' to '/', strips leading "./" and
/// duplicate separators). Throws ArchiveTraversal for absolute paths or
/// ".." segments. Returns "" for directory-ish paths.
std::string normalize_entry_path(std::string_view raw);

} // namespace cmind
