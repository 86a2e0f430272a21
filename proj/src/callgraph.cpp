#include "cmind/callgraph.hpp"

#include <algorithm>
#include <map>

#include "cmind/error.hpp"
#include "cmind/util.hpp"

namespace cmind {

namespace {

// Heads that look like calls but never are.
bool is_call_keyword(const std::string& word) {
    static const char* kWords[] = {"if", "while", "for", "switch", "sizeof", "return"};
    for (const char* w : kWords)
        if (word == w) return true;
    return false;
}

std::size_t find_matching(std::string_view mask, std::size_t open, char open_c, char close_c) {
    int depth = 0;
    for (std::size_t i = open; i < mask.size(); ++i) {
        if (mask[i] == open_c) ++depth;
        else if (mask[i] == close_c) {
            if (--depth == 0) return i;
        }
    }
    return std::string_view::npos;
}

} // namespace

CallGraph build_callgraph(const FunctionIndex& index) {
    CallGraph graph;
    for (const auto& def : index.functions) graph.nodes.insert(def.qualified_name);

    for (const auto& def : index.functions) {
        const std::string mask = mask_code(def.body);
        std::size_t open = def.body_brace_offset;
        if (open >= mask.size() || mask[open] != '{') {
            // Brace position moved under masking (should not happen); rescan.
            open = mask.find('{');
            if (open == std::string::npos) continue;
        }
        std::size_t close = find_matching(mask, open, '{', '}');
        if (close == std::string::npos) close = mask.size();

        for (std::size_t i = open + 1; i < close; ++i) {
            if (!is_ident_start(mask[i])) continue;
            std::size_t start = i;
            while (i < close && is_ident_char(mask[i])) ++i;
            std::string ident(mask.substr(start, i - start));
            std::size_t k = i;
            while (k < close && (mask[k] == ' ' || mask[k] == '\t' || mask[k] == '\n' || mask[k] == '\r'))
                ++k;
            if (k >= close || mask[k] != '(') { i = start + ident.size() - 1; continue; }
            if (is_call_keyword(ident)) continue;

            auto hit = index.by_name.find(ident);
            if (hit != index.by_name.end()) {
                for (std::size_t target : hit->second)
                    graph.edges.insert({def.qualified_name,
                                        index.functions[target].qualified_name});
            } else {
                graph.unresolved_calls.insert({def.qualified_name, ident});
            }
        }
    }
    return graph;
}

CallChain CallChain::make(std::vector<std::string> functions, ChainDirection direction) {
    CallChain chain;
    chain.functions = std::move(functions);
    chain.direction = chain.functions.size() <= 1 ? ChainDirection::forward : direction;
    return chain;
}

ChainEnumeration enumerate_call_chains(const CallGraph& graph,
                                       const std::vector<std::string>& roots,
                                       ChainDirection direction,
                                       int max_depth,
                                       int max_chains) {
    if (max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");

    auto is_unresolved_caller = [&](const std::string& name) {
        for (const auto& [caller, callee] : graph.unresolved_calls) {
            (void)callee;
            if (caller == name) return true;
        }
        return false;
    };
    for (const auto& root : roots) {
        if (!graph.nodes.count(root) && !is_unresolved_caller(root))
            throw Error(ErrorCode::UnknownRoot, root);
    }

    std::map<std::string, std::vector<std::string>> adjacency;
    for (const auto& [from, to] : graph.edges) {
        if (direction == ChainDirection::forward) adjacency[from].push_back(to);
        else adjacency[to].push_back(from);
    }
    for (auto& [node, next] : adjacency) {
        (void)node;
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
    }

    // Hard internal bound so pathological graphs stay tractable; the public
    // cap (max_chains) applies after sorting.
    const std::size_t hard_cap = std::max<std::size_t>(static_cast<std::size_t>(max_chains) * 4, 20000);
    std::vector<std::vector<std::string>> paths;
    bool overflow = false;

    std::vector<std::string> current;
    std::set<std::string> on_path;
    auto dfs = [&](auto&& self, const std::string& node) -> void {
        if (overflow) return;
        current.push_back(node);
        on_path.insert(node);
        paths.push_back(current);
        if (paths.size() >= hard_cap) overflow = true;
        if (static_cast<int>(current.size()) < max_depth && !overflow) {
            auto it = adjacency.find(node);
            if (it != adjacency.end()) {
                for (const auto& next : it->second) {
                    if (on_path.count(next)) continue; // simple paths only
                    self(self, next);
                }
            }
        }
        on_path.erase(node);
        current.pop_back();
    };

    std::vector<std::string> unique_roots;
    for (const auto& root : roots)
        if (std::find(unique_roots.begin(), unique_roots.end(), root) == unique_roots.end())
            unique_roots.push_back(root);
    for (const auto& root : unique_roots) dfs(dfs, root);

    std::sort(paths.begin(), paths.end());
    paths.erase(std::unique(paths.begin(), paths.end()), paths.end());

    ChainEnumeration out;
    out.truncated = overflow || paths.size() > static_cast<std::size_t>(max_chains);
    if (paths.size() > static_cast<std::size_t>(max_chains))
        paths.resize(static_cast<std::size_t>(max_chains));
    out.chains.reserve(paths.size());
    for (auto& p : paths) out.chains.push_back(CallChain::make(std::move(p), direction));
    return out;
}

std::string render_call_chain(const CallChain& chain) {
    const char* sep = chain.direction == ChainDirection::forward ? " -> " : " <- ";
    std::string out;
    for (std::size_t i = 0; i < chain.functions.size(); ++i) {
        if (i > 0) out += sep;
        out += chain.functions[i];
    }
    return out;
}

CallChain parse_call_chain(const std::string& text) {
    bool has_forward = false, has_backward = false;
    std::vector<std::string> names;
    std::string segment;

    auto flush = [&]() {
        std::string name = trim(segment);
        segment.clear();
        // Tolerate a stray "()" suffix on names.
        while (name.size() >= 2 && name.compare(name.size() - 2, 2, "()") == 0)
            name = trim(name.substr(0, name.size() - 2));
        if (name.empty())
            throw Error(ErrorCode::MalformedChain, "empty segment in: " + text);
        names.push_back(std::move(name));
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '-' && i + 1 < text.size() && text[i + 1] == '>') {
            has_forward = true;
            flush();
            ++i;
        } else if (text[i] == '<' && i + 1 < text.size() && text[i + 1] == '-') {
            has_backward = true;
            flush();
            ++i;
        } else {
            segment.push_back(text[i]);
        }
    }
    flush();

    if (has_forward && has_backward)
        throw Error(ErrorCode::MalformedChain, "mixed arrow directions in: " + text);
    return CallChain::make(std::move(names),
                           has_backward ? ChainDirection::backward : ChainDirection::forward);
}

} // namespace cmind
