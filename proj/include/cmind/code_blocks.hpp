#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cmind/function_index.hpp"
#include "cmind/source_tree.hpp"

namespace cmind {

struct CodeBlock {
    std::string label; // function qualified name or file path
    std::string text;  // verbatim substring of some source file
    bool truncated = false;
    // Dedupe identity.
    std::string file_path;
    int start_line = 0;
};

/// Every block text is a verbatim substring of a source file (the
/// "no fabricated code" leash); rendered size respects the budget.
struct CodeBlockSet {
    std::vector<CodeBlock> blocks;
    std::vector<std::string> absent; // names/paths that matched nothing
    bool truncated = false;

    std::size_t text_size() const;
    bool contains(const std::string& label, const std::string& file_path, int start_line) const;
};

/// Names resolve to function bodies first, then to whole files. Duplicate
/// (label, span) pairs collapse. When the budget is crossed, the crossing
/// block is cut at a line boundary and marked, and later blocks are dropped.
CodeBlockSet collect_code_blocks(const FunctionIndex& index,
                                 const SourceTree& tree,
                                 const std::vector<std::string>& names_or_paths,
                                 std::size_t budget);

/// Appends additional names into an existing set, respecting the same total
/// budget; already-present blocks are kept untouched so earlier prompts stay
/// a prefix of later ones.
void append_code_blocks(CodeBlockSet& set,
                        const FunctionIndex& index,
                        const SourceTree& tree,
                        const std::vector<std::string>& names_or_paths,
                        std::size_t budget);

/// Labeled fenced sections. A truncated block carries a final "[truncated]"
/// marker line inside the fence; the marker is not source text.
std::string render_code_blocks(const CodeBlockSet& set);

inline constexpr const char* kTruncationMarker = "[truncated]";

} // namespace cmind
