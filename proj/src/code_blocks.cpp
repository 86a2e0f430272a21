#include "cmind/code_blocks.hpp"

#include "cmind/error.hpp"

namespace cmind {

std::size_t CodeBlockSet::text_size() const {
    std::size_t total = 0;
    for (const auto& block : blocks) total += block.text.size();
    return total;
}

bool CodeBlockSet::contains(const std::string& label, const std::string& file_path,
                            int start_line) const {
    for (const auto& block : blocks)
        if (block.label == label && block.file_path == file_path && block.start_line == start_line)
            return true;
    return false;
}

namespace {

// Cuts `text` to at most `keep` characters at a line boundary; returns ""
// when not even the first line fits.
std::string cut_at_line_boundary(const std::string& text, std::size_t keep) {
    if (keep == 0) return "";
    std::size_t cut = text.rfind('\n', keep);
    if (cut == std::string::npos) return "";
    return text.substr(0, cut);
}

void add_block(CodeBlockSet& set, CodeBlock block, std::size_t budget) {
    if (set.contains(block.label, block.file_path, block.start_line)) return;
    if (set.truncated) return; // tail blocks drop once the budget is crossed
    std::size_t used = set.text_size();
    if (used + block.text.size() > budget) {
        std::string prefix = cut_at_line_boundary(block.text, budget > used ? budget - used : 0);
        set.truncated = true;
        if (prefix.empty()) return;
        block.text = std::move(prefix);
        block.truncated = true;
        set.blocks.push_back(std::move(block));
        return;
    }
    set.blocks.push_back(std::move(block));
}

} // namespace

void append_code_blocks(CodeBlockSet& set,
                        const FunctionIndex& index,
                        const SourceTree& tree,
                        const std::vector<std::string>& names_or_paths,
                        std::size_t budget) {
    for (const auto& item : names_or_paths) {
        auto defs = lookup_function(index, item);
        if (!defs.empty()) {
            for (const FunctionDef* def : defs) {
                CodeBlock block;
                block.label = def->qualified_name;
                block.text = def->body;
                block.file_path = def->file_path;
                block.start_line = def->start_line;
                add_block(set, std::move(block), budget);
            }
            continue;
        }
        const SourceFile* file = nullptr;
        try {
            file = lookup_file(tree, item);
        } catch (const Error&) {
            file = nullptr; // ambiguous basenames count as misses here
        }
        if (file != nullptr) {
            CodeBlock block;
            block.label = file->path;
            block.text = file->content;
            block.file_path = file->path;
            block.start_line = 1;
            add_block(set, std::move(block), budget);
        } else {
            set.absent.push_back(item);
        }
    }
}

CodeBlockSet collect_code_blocks(const FunctionIndex& index,
                                 const SourceTree& tree,
                                 const std::vector<std::string>& names_or_paths,
                                 std::size_t budget) {
    CodeBlockSet set;
    append_code_blocks(set, index, tree, names_or_paths, budget);
    return set;
}

std::string render_code_blocks(const CodeBlockSet& set) {
    std::string out;
    for (const auto& block : set.blocks) {
        out += block.label + ":\n```\n";
        out += block.text;
        if (!block.text.empty() && block.text.back() != '\n') out += "\n";
        if (block.truncated) {
            out += kTruncationMarker;
            out += "\n";
        }
        out += "```\n\n";
    }
    return out;
}

} // namespace cmind
