#pragma once

#include <string>
#include <vector>

#include "cmind/callgraph.hpp"
#include "cmind/function_index.hpp"

namespace cmind {

struct DataflowHop {
    std::string file_path;
    int line = 0;     // 1-based
    std::string text; // the verbatim source line
    std::string note;
};

struct DataflowPath {
    std::string source_fn;
    std::string sink_fn;
    std::vector<DataflowHop> steps;
};

/// Intraprocedural def-use tracing inside source_fn. Seeds are variables
/// assigned from calls plus the parameters; taint propagates through
/// assignments. A path is emitted when a tainted variable reaches an argument
/// of a call to sink_fn, or is dereferenced/indexed when sink_fn == source_fn.
/// Throws SourceNotFound when source_fn does not resolve; "no flow" is an
/// empty list, not an error.
std::vector<DataflowPath> dataflow_paths(const FunctionIndex& index,
                                         const CallGraph& graph,
                                         const std::string& source_fn,
                                         const std::string& sink_fn,
                                         int max_paths);

/// One "file:line: code-line" row per hop.
std::string render_dataflow_path(const DataflowPath& path);

} // namespace cmind
