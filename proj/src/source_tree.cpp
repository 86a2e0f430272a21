#include "cmind/source_tree.hpp"

#include <algorithm>

#include "cmind/archive.hpp"
#include "cmind/error.hpp"
#include "cmind/util.hpp"

namespace cmind {

namespace {

std::string extension_of(const std::string& path) {
    std::size_t slash = path.find_last_of('/');
    std::size_t dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return "";
    return path.substr(dot);
}

std::string basename_of(const std::string& path) {
    std::size_t slash = path.find_last_of('/');
    return slash == std::string::npos ? path : path.substr(slash + 1);
}

SourceTree build_tree(std::string root_label, std::vector<SourceFile> files) {
    std::sort(files.begin(), files.end(),
              [](const SourceFile& a, const SourceFile& b) { return a.path < b.path; });
    SourceTree tree;
    tree.root_label = std::move(root_label);
    tree.files = std::move(files);
    return tree;
}

} // namespace

LanguageTag language_tag_for(const std::string& path) {
    std::string ext = extension_of(path);
    if (ext == ".c") return LanguageTag::c_source;
    if (ext == ".h" || ext == ".hpp") return LanguageTag::c_header;
    return LanguageTag::other;
}

const SourceFile* SourceTree::find_exact(const std::string& path) const {
    auto it = std::lower_bound(files.begin(), files.end(), path,
                               [](const SourceFile& f, const std::string& p) { return f.path < p; });
    if (it != files.end() && it->path == path) return &*it;
    return nullptr;
}

SourceTree source_tree_from_archive(std::string_view bytes, const std::string& root_label) {
    std::vector<SourceFile> files;
    for (auto& entry : read_archive(bytes)) {
        SourceFile file;
        file.path = entry.path;
        file.content = utf8_sanitize(entry.content);
        file.language_tag = language_tag_for(file.path);
        files.push_back(std::move(file));
    }
    // Archives may legally repeat a path (later entries win on extraction).
    std::sort(files.begin(), files.end(),
              [](const SourceFile& a, const SourceFile& b) { return a.path < b.path; });
    files.erase(std::unique(files.begin(), files.end(),
                            [](const SourceFile& a, const SourceFile& b) { return a.path == b.path; }),
                files.end());
    return build_tree(root_label, std::move(files));
}

SourceTree load_source_tree(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::exists(path, ec))
        throw Error(ErrorCode::PathNotFound, path.string());

    if (fs::is_directory(path, ec)) {
        std::vector<SourceFile> files;
        std::size_t count = 0;
        for (auto it = fs::recursive_directory_iterator(path, fs::directory_options::skip_permission_denied);
             it != fs::recursive_directory_iterator(); ++it) {
            if (!it->is_regular_file(ec)) continue;
            if (++count > kMaxArchiveFiles)
                throw Error(ErrorCode::ArchiveTooLarge, "directory holds too many files");
            SourceFile file;
            file.path = fs::relative(it->path(), path, ec).generic_string();
            file.content = utf8_sanitize(read_file(it->path()));
            file.language_tag = language_tag_for(file.path);
            files.push_back(std::move(file));
        }
        return build_tree(path.filename().string(), std::move(files));
    }

    std::string bytes = read_file(path);
    return source_tree_from_archive(bytes, path.filename().string());
}

const SourceFile* lookup_file(const SourceTree& tree, const std::string& path) {
    if (const SourceFile* exact = tree.find_exact(path)) return exact;

    // Unique-basename fallback: a bare "a.h" resolves iff one file matches.
    std::string wanted = basename_of(path);
    const SourceFile* found = nullptr;
    for (const auto& file : tree.files) {
        if (basename_of(file.path) == wanted) {
            if (found)
                throw Error(ErrorCode::AmbiguousBasename,
                            wanted + " matches both " + found->path + " and " + file.path);
            found = &file;
        }
    }
    return found;
}

} // namespace cmind
