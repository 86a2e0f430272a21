#pragma once

// Independent brute-force cross-checks for the analyzer, kept deliberately
// separate from the implementation: a switch-based stripper plus std::regex
// scanning, versus the library's offset-preserving mask + hand scanner.

#include <algorithm>
#include <regex>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cmind/callgraph.hpp"
#include "cmind/function_index.hpp"

namespace oracle {

inline std::string strip_noncode(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    enum { CODE, SLASH, LINE_C, BLOCK_C, BLOCK_STAR, STR, STR_ESC, CHR, CHR_ESC, HASH } st = CODE;
    bool at_line_start = true;
    for (char c : text) {
        switch (st) {
        case CODE:
            if (c == '/') { st = SLASH; break; }
            if (c == '"') { st = STR; out.push_back(' '); break; }
            if (c == '\'') { st = CHR; out.push_back(' '); break; }
            if (c == '#' && at_line_start) { st = HASH; out.push_back(' '); break; }
            out.push_back(c);
            break;
        case SLASH:
            if (c == '/') { st = LINE_C; out.push_back(' '); out.push_back(' '); }
            else if (c == '*') { st = BLOCK_C; out.push_back(' '); out.push_back(' '); }
            else { out.push_back('/'); out.push_back(c); st = CODE; }
            break;
        case LINE_C:
            if (c == '\n') { st = CODE; out.push_back('\n'); }
            else out.push_back(' ');
            break;
        case BLOCK_C:
            if (c == '*') st = BLOCK_STAR;
            out.push_back(c == '\n' ? '\n' : ' ');
            break;
        case BLOCK_STAR:
            if (c == '/') st = CODE;
            else if (c != '*') st = BLOCK_C;
            out.push_back(c == '\n' ? '\n' : ' ');
            break;
        case STR:
            if (c == '\\') st = STR_ESC;
            else if (c == '"' || c == '\n') st = CODE;
            out.push_back(c == '\n' ? '\n' : ' ');
            break;
        case STR_ESC:
            st = STR;
            out.push_back(' ');
            break;
        case CHR:
            if (c == '\\') st = CHR_ESC;
            else if (c == '\'' || c == '\n') st = CODE;
            out.push_back(c == '\n' ? '\n' : ' ');
            break;
        case CHR_ESC:
            st = CHR;
            out.push_back(' ');
            break;
        case HASH:
            if (c == '\n') { st = CODE; out.push_back('\n'); }
            else out.push_back(' ');
            break;
        }
        if (st == SLASH) continue; // line-start bookkeeping waits for the next char
        at_line_start = (c == '\n') || (at_line_start && (c == ' ' || c == '\t'));
    }
    if (st == SLASH) out.push_back('/');
    return out;
}

inline const std::set<std::string>& keyword_heads() {
    static const std::set<std::string> kw = {"if", "while", "for", "switch", "sizeof", "return"};
    return kw;
}

inline std::set<std::pair<std::string, std::string>>
brute_force_edges(const cmind::FunctionIndex& index) {
    static const std::regex kCall(R"(([A-Za-z_][A-Za-z0-9_]*)\s*\()");
    std::set<std::pair<std::string, std::string>> edges;
    for (const auto& def : index.functions) {
        std::string stripped = strip_noncode(def.body);
        std::size_t open = stripped.find('{');
        if (open == std::string::npos) continue;
        std::string inner = stripped.substr(open + 1);
        // drop everything past the matching close of the body brace
        int depth = 1;
        for (std::size_t i = 0; i < inner.size(); ++i) {
            if (inner[i] == '{') ++depth;
            else if (inner[i] == '}' && --depth == 0) {
                inner.resize(i);
                break;
            }
        }
        for (auto it = std::sregex_iterator(inner.begin(), inner.end(), kCall);
             it != std::sregex_iterator(); ++it) {
            std::string callee = (*it)[1].str();
            if (keyword_heads().count(callee)) continue;
            auto hit = index.by_name.find(callee);
            if (hit == index.by_name.end()) continue;
            for (std::size_t target : hit->second)
                edges.insert({def.qualified_name, index.functions[target].qualified_name});
        }
    }
    return edges;
}

// Exhaustive simple-path enumeration, the reference for
// enumerate_call_chains (breadth-first expansion, no shared code).
inline std::vector<std::vector<std::string>>
brute_force_paths(const cmind::CallGraph& graph, const std::string& root,
                  cmind::ChainDirection direction, int max_depth) {
    std::vector<std::vector<std::string>> result;
    std::vector<std::vector<std::string>> frontier = {{root}};
    while (!frontier.empty()) {
        std::vector<std::vector<std::string>> next;
        for (const auto& path : frontier) {
            result.push_back(path);
            if (static_cast<int>(path.size()) >= max_depth) continue;
            for (const auto& [a, b] : graph.edges) {
                const std::string& from = direction == cmind::ChainDirection::forward ? a : b;
                const std::string& to = direction == cmind::ChainDirection::forward ? b : a;
                if (from != path.back()) continue;
                if (std::find(path.begin(), path.end(), to) != path.end()) continue;
                auto extended = path;
                extended.push_back(to);
                next.push_back(std::move(extended));
            }
        }
        frontier = std::move(next);
    }
    std::sort(result.begin(), result.end());
    result.erase(std::unique(result.begin(), result.end()), result.end());
    return result;
}

} // namespace oracle
