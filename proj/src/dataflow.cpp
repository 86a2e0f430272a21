#include "cmind/dataflow.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "cmind/error.hpp"
#include "cmind/util.hpp"

namespace cmind {

namespace {

bool is_call_keyword(const std::string& word) {
    static const char* kWords[] = {"if", "while", "for", "switch", "sizeof", "return"};
    for (const char* w : kWords)
        if (word == w) return true;
    return false;
}

struct Statement {
    std::string text; // masked
    int line = 0;     // 1-based within the file
};

std::vector<std::string> idents_in(std::string_view text) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (!is_ident_start(text[i])) continue;
        std::size_t start = i;
        while (i < text.size() && is_ident_char(text[i])) ++i;
        out.emplace_back(text.substr(start, i - start));
    }
    return out;
}

bool has_call_shape(std::string_view text) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (!is_ident_start(text[i])) continue;
        std::size_t start = i;
        while (i < text.size() && is_ident_char(text[i])) ++i;
        std::string ident(text.substr(start, i - start));
        std::size_t k = i;
        while (k < text.size() && std::isspace(static_cast<unsigned char>(text[k]))) ++k;
        if (k < text.size() && text[k] == '(' && !is_call_keyword(ident)) return true;
    }
    return false;
}

// First top-level '=' that is an assignment, not a comparison.
std::size_t find_assignment(std::string_view text) {
    int depth = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '(' || c == '[') ++depth;
        else if (c == ')' || c == ']') --depth;
        else if (c == '=' && depth == 0) {
            char prev = i > 0 ? text[i - 1] : '\0';
            char next = i + 1 < text.size() ? text[i + 1] : '\0';
            if (next == '=') { ++i; continue; }
            if (prev == '=' || prev == '!' || prev == '<' || prev == '>') continue;
            // Compound assignments still assign.
            return i;
        }
    }
    return std::string_view::npos;
}

// Argument spans of every call to `callee` inside `text`.
std::vector<std::string> call_argument_spans(std::string_view text, const std::string& callee) {
    std::vector<std::string> spans;
    std::size_t pos = 0;
    while ((pos = text.find(callee, pos)) != std::string_view::npos) {
        bool left_ok = pos == 0 || (!is_ident_char(text[pos - 1]) && text[pos - 1] != ':');
        std::size_t after = pos + callee.size();
        if (!left_ok || (after < text.size() && is_ident_char(text[after]))) {
            pos += 1;
            continue;
        }
        std::size_t k = after;
        while (k < text.size() && std::isspace(static_cast<unsigned char>(text[k]))) ++k;
        if (k < text.size() && text[k] == '(') {
            int depth = 0;
            std::size_t end = std::string_view::npos;
            for (std::size_t j = k; j < text.size(); ++j) {
                if (text[j] == '(') ++depth;
                else if (text[j] == ')') {
                    if (--depth == 0) { end = j; break; }
                }
            }
            if (end != std::string_view::npos)
                spans.emplace_back(text.substr(k + 1, end - k - 1));
        }
        pos = after;
    }
    return spans;
}

bool mentions_var(std::string_view text, const std::string& var) {
    for (const auto& ident : idents_in(text))
        if (ident == var) return true;
    return false;
}

// `*v`, `v->`, `v[` — the uses that crash when v is bad.
bool dereferences_var(std::string_view text, const std::string& var) {
    std::size_t pos = 0;
    while ((pos = text.find(var, pos)) != std::string_view::npos) {
        bool left_ident = pos > 0 && is_ident_char(text[pos - 1]);
        std::size_t after = pos + var.size();
        bool right_ident = after < text.size() && is_ident_char(text[after]);
        if (!left_ident && !right_ident) {
            if (pos > 0 && text[pos - 1] == '*') return true;
            std::size_t k = after;
            while (k < text.size() && std::isspace(static_cast<unsigned char>(text[k]))) ++k;
            if (k + 1 < text.size() && text[k] == '-' && text[k + 1] == '>') return true;
            if (k < text.size() && text[k] == '[') return true;
        }
        pos = after;
    }
    return false;
}

std::vector<Statement> split_statements(std::string_view mask, int first_line,
                                        std::size_t begin, std::size_t end) {
    std::vector<Statement> out;
    int line = first_line;
    int stmt_line = 0;
    std::string current;
    int paren_depth = 0;
    for (std::size_t i = begin; i < end; ++i) {
        char c = mask[i];
        if (c == '\n') ++line;
        if (c == '(') ++paren_depth;
        else if (c == ')') --paren_depth;
        bool is_break = (c == ';' && paren_depth <= 0) || c == '{' || c == '}';
        if (is_break) {
            if (!trim(current).empty()) out.push_back({current, stmt_line});
            current.clear();
            stmt_line = 0;
            continue;
        }
        if (stmt_line == 0 && !std::isspace(static_cast<unsigned char>(c))) stmt_line = line;
        current.push_back(c);
    }
    if (!trim(current).empty()) out.push_back({current, stmt_line});
    return out;
}

} // namespace

std::vector<DataflowPath> dataflow_paths(const FunctionIndex& index,
                                         const CallGraph& graph,
                                         const std::string& source_fn,
                                         const std::string& sink_fn,
                                         int max_paths) {
    auto defs = lookup_function(index, source_fn);
    if (defs.empty())
        throw Error(ErrorCode::SourceNotFound, source_fn);

    // Short-circuit when the graph already shows the sink is never reached
    // from the source (spec keeps the sink inside the source method).
    std::string sink_name = sink_fn;
    if (std::size_t sep = sink_fn.rfind("::"); sep != std::string::npos)
        sink_name = sink_fn.substr(sep + 2);
    bool self_flow = sink_fn == source_fn || sink_name == source_fn;
    if (!self_flow) {
        auto matches_sink = [&](const std::string& callee) {
            if (callee == sink_fn || callee == sink_name) return true;
            // Bare sink name against a qualified callee, at a "::" boundary.
            return callee.size() > sink_name.size() + 1 &&
                   callee.compare(callee.size() - sink_name.size(), sink_name.size(), sink_name) == 0 &&
                   callee[callee.size() - sink_name.size() - 1] == ':';
        };
        bool callable = false;
        for (const auto& def : defs) {
            for (const auto& [from, to] : graph.edges)
                if (from == def->qualified_name && matches_sink(to)) { callable = true; break; }
            if (callable) break;
            for (const auto& [from, callee] : graph.unresolved_calls)
                if (from == def->qualified_name && matches_sink(callee)) { callable = true; break; }
            if (callable) break;
        }
        if (!callable) return {};
    }

    std::vector<DataflowPath> paths;
    for (const FunctionDef* def : defs) {
        if (static_cast<int>(paths.size()) >= max_paths) break;

        const std::string mask = mask_code(def->body);
        std::size_t open = def->body_brace_offset < mask.size() ? def->body_brace_offset
                                                                : mask.find('{');
        if (open == std::string::npos || mask[open] != '{') open = mask.find('{');
        if (open == std::string::npos) continue;

        const auto body_lines = split_lines(def->body);
        auto line_text = [&](int file_line) -> std::string {
            int rel = file_line - def->start_line;
            if (rel < 0 || rel >= static_cast<int>(body_lines.size())) return "";
            return body_lines[static_cast<std::size_t>(rel)];
        };

        // var -> the hop chain that tainted it
        std::map<std::string, std::vector<DataflowHop>> taint;
        for (const auto& param : def->parameters) {
            taint[param] = {{def->file_path, def->head_line, line_text(def->head_line),
                             "parameter '" + param + "' of " + def->qualified_name}};
        }

        std::size_t close = mask.size();
        int brace_depth = 0;
        for (std::size_t i = open; i < mask.size(); ++i) {
            if (mask[i] == '{') ++brace_depth;
            else if (mask[i] == '}' && --brace_depth == 0) { close = i; break; }
        }
        int begin_line = def->start_line;
        for (std::size_t i = 0; i <= open && i < mask.size(); ++i)
            if (mask[i] == '\n') ++begin_line;

        auto statements = split_statements(mask, begin_line, open + 1, close);
        for (const auto& stmt : statements) {
            if (static_cast<int>(paths.size()) >= max_paths) break;

            // Taint propagation through assignments.
            std::size_t eq = find_assignment(stmt.text);
            if (eq != std::string_view::npos) {
                std::string_view lhs_text(stmt.text.data(), eq);
                std::string_view rhs_text(stmt.text.data() + eq + 1, stmt.text.size() - eq - 1);
                auto lhs_idents = idents_in(lhs_text);
                if (!lhs_idents.empty()) {
                    const std::string lhs = lhs_idents.back();
                    std::string tainted_source;
                    for (const auto& ident : idents_in(rhs_text)) {
                        if (ident != lhs && taint.count(ident)) { tainted_source = ident; break; }
                    }
                    if (!tainted_source.empty()) {
                        auto hops = taint[tainted_source];
                        hops.push_back({def->file_path, stmt.line, line_text(stmt.line),
                                        "'" + lhs + "' assigned from tainted '" + tainted_source + "'"});
                        taint[lhs] = std::move(hops);
                    } else if (has_call_shape(rhs_text)) {
                        taint[lhs] = {{def->file_path, stmt.line, line_text(stmt.line),
                                       "'" + lhs + "' assigned from a call"}};
                    } else {
                        taint.erase(lhs); // plain reassignment kills prior taint
                    }
                }
            }

            // Sink reached through an argument position.
            for (const auto& args : call_argument_spans(stmt.text, sink_name)) {
                for (const auto& [var, hops] : taint) {
                    if (!mentions_var(args, var)) continue;
                    DataflowPath path;
                    path.source_fn = def->qualified_name;
                    path.sink_fn = sink_fn;
                    path.steps = hops;
                    path.steps.push_back({def->file_path, stmt.line, line_text(stmt.line),
                                          "'" + var + "' passed to " + sink_name});
                    paths.push_back(std::move(path));
                    if (static_cast<int>(paths.size()) >= max_paths) break;
                }
                if (static_cast<int>(paths.size()) >= max_paths) break;
            }

            // Self-sink mode: dereference/index uses inside the source.
            if (self_flow && static_cast<int>(paths.size()) < max_paths) {
                for (const auto& [var, hops] : taint) {
                    if (!dereferences_var(stmt.text, var)) continue;
                    DataflowPath path;
                    path.source_fn = def->qualified_name;
                    path.sink_fn = sink_fn;
                    path.steps = hops;
                    path.steps.push_back({def->file_path, stmt.line, line_text(stmt.line),
                                          "'" + var + "' dereferenced"});
                    paths.push_back(std::move(path));
                    if (static_cast<int>(paths.size()) >= max_paths) break;
                }
            }
        }
    }

    // Identical hop sequences collapse.
    auto key = [](const DataflowPath& p) {
        std::string k = p.source_fn + "|" + p.sink_fn;
        for (const auto& s : p.steps) k += "|" + s.file_path + ":" + std::to_string(s.line) + ":" + s.note;
        return k;
    };
    std::vector<DataflowPath> unique_paths;
    std::set<std::string> seen;
    for (auto& p : paths)
        if (seen.insert(key(p)).second) unique_paths.push_back(std::move(p));
    return unique_paths;
}

std::string render_dataflow_path(const DataflowPath& path) {
    std::string out;
    for (const auto& hop : path.steps) {
        out += hop.file_path + ":" + std::to_string(hop.line) + ": " + trim(hop.text);
        out += "\n";
    }
    return out;
}

} // namespace cmind
