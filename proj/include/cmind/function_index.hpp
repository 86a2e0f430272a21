#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "cmind/source_tree.hpp"

namespace cmind {

struct FunctionDef {
    std::string name;           // last identifier segment, e.g. "Init"
    std::string qualified_name; // may contain "::", e.g. "Toolbar::Init"
    std::string file_path;
    int start_line = 0; // 1-based, inclusive
    int end_line = 0;   // 1-based, inclusive
    std::string body;   // verbatim file lines [start_line, end_line]

    // Extraction byproducts used by the analyzer.
    std::size_t body_brace_offset = 0;   // offset of '{' within body
    int head_line = 0;                   // line carrying the function name
    std::vector<std::string> parameters; // parameter identifiers, head order
};

struct FunctionIndex {
    std::vector<FunctionDef> functions;
    // Values are indices into `functions`. A def is reachable under both its
    // name and its qualified name when they differ.
    std::map<std::string, std::vector<std::size_t>> by_name;
    std::map<std::string, std::vector<std::size_t>> by_file;
    std::vector<std::string> warnings;
};

/// Replaces comments, string/char literals, and preprocessor lines with
/// spaces, preserving length and newlines, so structural scans see only code.
std::string mask_code(std::string_view content);

/// Lexical-structural extraction over c_source/c_header files: find
/// `identifier (params) {` heads at brace depth 0 and capture through the
/// matching closing brace. Files that defeat the scan produce warnings, never
/// errors.
FunctionIndex extract_functions(const SourceTree& tree);

/// Exact-name match first; on miss, suffix match on qualified_name at a "::"
/// boundary (so "Init" finds "Toolbar::Init"). Result order is deterministic
/// (file path, then start line). Never throws; missing names yield {}.
std::vector<const FunctionDef*> lookup_function(const FunctionIndex& index,
                                                const std::string& name);

} // namespace cmind
