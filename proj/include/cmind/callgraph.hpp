#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cmind/function_index.hpp"

namespace cmind {

struct CallGraph {
    std::set<std::string> nodes; // qualified names of indexed functions
    std::set<std::pair<std::string, std::string>> edges; // caller -> callee
    // Call-shaped occurrences whose callee is not an indexed function.
    std::set<std::pair<std::string, std::string>> unresolved_calls;
};

enum class ChainDirection { forward, backward };

struct CallChain {
    std::vector<std::string> functions; // length >= 1, no repeats
    ChainDirection direction = ChainDirection::forward;

    // Single-node chains are canonically forward: the rendered form carries
    // no arrow, so parse(render(c)) could not round-trip otherwise.
    static CallChain make(std::vector<std::string> functions, ChainDirection direction);

    bool operator==(const CallChain&) const = default;
};

struct ChainEnumeration {
    std::vector<CallChain> chains;
    bool truncated = false;
};

/// Edge (A,B) exists iff A's body contains a call-shaped occurrence `B(`
/// outside comments/strings and B is indexed. Keyword heads (if, while, for,
/// switch, sizeof, return) never produce edges.
CallGraph build_callgraph(const FunctionIndex& index);

/// All simple paths from each root, following edges forward (caller->callee)
/// or backward, with at most max_depth nodes. Output is lexicographic over
/// name sequences and capped at max_chains (truncated flag set). Throws
/// UnknownRoot for roots absent from the graph.
ChainEnumeration enumerate_call_chains(const CallGraph& graph,
                                       const std::vector<std::string>& roots,
                                       ChainDirection direction,
                                       int max_depth,
                                       int max_chains = 100);

/// Forward chains join with " -> ", backward with " <- "; single-node chains
/// render the bare name.
std::string render_call_chain(const CallChain& chain);

/// Inverse of render_call_chain. Tolerates missing spaces around arrows and a
/// stray "()" suffix on names. Throws MalformedChain for mixed arrows or
/// empty segments.
CallChain parse_call_chain(const std::string& text);

} // namespace cmind
