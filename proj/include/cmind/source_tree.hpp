#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace cmind {

enum class LanguageTag { c_source, c_header, other };

struct SourceFile {
    std::string path;    // relative, normalized, '/' separators
    std::string content; // lossily decoded UTF-8
    LanguageTag language_tag = LanguageTag::other;
};

/// Immutable after construction; file order is lexicographic by path so every
/// downstream prompt is reproducible.
struct SourceTree {
    std::string root_label;
    std::vector<SourceFile> files;

    const SourceFile* find_exact(const std::string& path) const;
};

LanguageTag language_tag_for(const std::string& path);

/// Loads a tree from a directory or an archive file (zip/tar/tar.gz, detected
/// by magic bytes). Throws PathNotFound, UnsupportedArchive, ArchiveTraversal,
/// ArchiveTooLarge.
SourceTree load_source_tree(const std::filesystem::path& path);

/// Builds a tree directly from in-memory archive bytes (job service path).
SourceTree source_tree_from_archive(std::string_view bytes, const std::string& root_label);

/// Exact relative-path match first; if that fails, a unique-basename fallback.
/// Returns nullptr when nothing matches; throws AmbiguousBasename when the
/// fallback matches more than one file.
const SourceFile* lookup_file(const SourceTree& tree, const std::string& path);

} // namespace cmind
