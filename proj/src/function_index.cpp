#include "cmind/function_index.hpp"

#include <algorithm>

#include "cmind/util.hpp"

namespace cmind {

std::string mask_code(std::string_view content) {
    enum class State { code, line_comment, block_comment, string_lit, char_lit, preproc };
    std::string out(content.size(), ' ');
    State state = State::code;
    bool line_blank_so_far = true; // only whitespace seen since the last newline
    const std::size_t n = content.size();

    for (std::size_t i = 0; i < n; ++i) {
        char c = content[i];
        char next = i + 1 < n ? content[i + 1] : '\0';
        if (c == '\n') out[i] = '\n';

        switch (state) {
        case State::code:
            if (c == '/' && next == '/') {
                state = State::line_comment;
                ++i;
            } else if (c == '/' && next == '*') {
                state = State::block_comment;
                ++i;
            } else if (c == '"') {
                // Raw string literals: R"delim( ... )delim"
                if (i > 0 && content[i - 1] == 'R' &&
                    (i < 2 || !is_ident_char(content[i - 2]))) {
                    std::size_t delim_end = content.find('(', i + 1);
                    if (delim_end != std::string_view::npos && delim_end - i <= 17) {
                        std::string closer = ")";
                        closer += content.substr(i + 1, delim_end - i - 1);
                        closer += '"';
                        std::size_t close = content.find(closer, delim_end + 1);
                        std::size_t stop = close == std::string_view::npos
                                               ? n
                                               : close + closer.size();
                        out[i - 1] = ' '; // the R prefix
                        for (std::size_t k = i; k < stop; ++k)
                            if (content[k] == '\n') out[k] = '\n';
                        i = stop - 1;
                        break;
                    }
                }
                state = State::string_lit;
            } else if (c == '\'') {
                state = State::char_lit;
            } else if (c == '#' && line_blank_so_far) {
                state = State::preproc;
            } else if (c != '\n') {
                out[i] = c;
            }
            break;
        case State::line_comment:
            if (c == '\n') state = State::code;
            break;
        case State::block_comment:
            if (c == '*' && next == '/') {
                state = State::code;
                ++i;
            }
            break;
        case State::string_lit:
            if (c == '\\' && i + 1 < n) ++i;
            else if (c == '"' || c == '\n') state = State::code;
            break;
        case State::char_lit:
            if (c == '\\' && i + 1 < n) ++i;
            else if (c == '\'' || c == '\n') state = State::code;
            break;
        case State::preproc:
            if (c == '/' && next == '*') {
                state = State::block_comment; // may span past the directive
                ++i;
            } else if (c == '\n') {
                bool continued = false;
                for (std::size_t k = i; k-- > 0;) {
                    if (content[k] == '\\') { continued = true; break; }
                    if (content[k] != '\r' && content[k] != ' ' && content[k] != '\t') break;
                }
                if (!continued) state = State::code;
            }
            break;
        }

        if (c == '\n') line_blank_so_far = true;
        else if (c != ' ' && c != '\t' && c != '\r') line_blank_so_far = false;
    }
    return out;
}

namespace {

bool is_control_keyword(const std::string& word) {
    static const char* kWords[] = {"if", "while", "for", "switch", "sizeof",
                                   "return", "do", "else", "case"};
    for (const char* w : kWords)
        if (word == w) return true;
    return false;
}

std::size_t skip_spaces_back(std::string_view s, std::size_t pos) {
    while (pos > 0 && std::isspace(static_cast<unsigned char>(s[pos - 1]))) --pos;
    return pos;
}

// Reads the identifier ending just before `end`; returns its start or npos.
std::size_t ident_start_before(std::string_view s, std::size_t end) {
    if (end == 0 || !is_ident_char(s[end - 1])) return std::string_view::npos;
    std::size_t start = end;
    while (start > 0 && is_ident_char(s[start - 1])) --start;
    if (!is_ident_start(s[start])) return std::string_view::npos;
    return start;
}

struct HeadMatch {
    bool found = false;
    std::string name;
    std::string qualified;
    std::size_t qualified_start = 0; // position of the first name segment
    std::size_t lparen = 0;
    std::size_t rparen = 0;
};

// Recognizes `identifier (params)` directly before the `{` at brace_pos,
// allowing plain identifier words (const, noexcept, ...) in between.
HeadMatch match_head(std::string_view mask, std::size_t brace_pos) {
    HeadMatch head;
    std::size_t pos = skip_spaces_back(mask, brace_pos);
    // Skip trailing qualifier words between ')' and '{'.
    for (int guard = 0; guard < 4; ++guard) {
        std::size_t word_start = ident_start_before(mask, pos);
        if (word_start == std::string_view::npos) break;
        pos = skip_spaces_back(mask, word_start);
    }
    if (pos == 0 || mask[pos - 1] != ')') return head;
    head.rparen = pos - 1;

    int depth = 0;
    std::size_t i = pos;
    while (i-- > 0) {
        if (mask[i] == ')') ++depth;
        else if (mask[i] == '(') {
            if (--depth == 0) break;
        }
    }
    if (depth != 0 || mask[i] != '(') return head;
    head.lparen = i;

    std::size_t name_end = skip_spaces_back(mask, head.lparen);
    std::size_t name_start = ident_start_before(mask, name_end);
    if (name_start == std::string_view::npos) return head;
    head.name.assign(mask.substr(name_start, name_end - name_start));
    head.qualified = head.name;
    head.qualified_start = name_start;

    // Extend over `::` scope segments (the paper's own example uses them).
    std::size_t cursor = name_start;
    while (cursor >= 2 && mask[cursor - 1] == ':' && mask[cursor - 2] == ':') {
        std::size_t seg_end = cursor - 2;
        std::size_t seg_start = ident_start_before(mask, seg_end);
        if (seg_start == std::string_view::npos) break;
        head.qualified = std::string(mask.substr(seg_start, seg_end - seg_start)) + "::" + head.qualified;
        head.qualified_start = seg_start;
        cursor = seg_start;
    }

    // Reject constructor-initializer context: `: member(arg) {` / `, member(arg) {`.
    std::size_t before = skip_spaces_back(mask, head.qualified_start);
    if (before > 0) {
        char prev = mask[before - 1];
        if (prev == ',') return head;
        if (prev == ':' && (before < 2 || mask[before - 2] != ':')) return head;
    }
    head.found = true;
    return head;
}

std::size_t find_matching_brace(std::string_view mask, std::size_t open) {
    int depth = 0;
    for (std::size_t i = open; i < mask.size(); ++i) {
        if (mask[i] == '{') ++depth;
        else if (mask[i] == '}') {
            if (--depth == 0) return i;
        }
    }
    return std::string_view::npos;
}

// Last identifier word ending at `end` (exclusive), as a string.
std::string word_before(std::string_view mask, std::size_t end) {
    std::size_t e = skip_spaces_back(mask, end);
    std::size_t s = ident_start_before(mask, e);
    if (s == std::string_view::npos) return "";
    return std::string(mask.substr(s, e - s));
}

std::vector<std::string> parse_parameters(std::string_view mask, std::size_t lparen, std::size_t rparen) {
    std::vector<std::string> params;
    int depth = 0;
    std::size_t part_start = lparen + 1;
    auto flush = [&](std::size_t part_end) {
        std::string last = word_before(mask, part_end);
        if (!last.empty() && last != "void" && !is_control_keyword(last))
            params.push_back(last);
    };
    for (std::size_t i = lparen + 1; i < rparen; ++i) {
        char c = mask[i];
        if (c == '(' || c == '[') ++depth;
        else if (c == ')' || c == ']') --depth;
        else if (c == ',' && depth == 0) {
            flush(i);
            part_start = i + 1;
        }
    }
    if (rparen > part_start) flush(rparen);
    return params;
}

struct LineTable {
    std::vector<std::size_t> starts; // starts[k] = offset of line k+1

    explicit LineTable(std::string_view content) {
        starts.push_back(0);
        for (std::size_t i = 0; i < content.size(); ++i)
            if (content[i] == '\n') starts.push_back(i + 1);
    }

    int line_of(std::size_t pos) const {
        auto it = std::upper_bound(starts.begin(), starts.end(), pos);
        return static_cast<int>(it - starts.begin());
    }

    // Verbatim text of lines [first, last], without the trailing newline.
    std::string slice(std::string_view content, int first, int last) const {
        std::size_t begin = starts[static_cast<std::size_t>(first - 1)];
        std::size_t end = static_cast<std::size_t>(last) < starts.size()
                              ? starts[static_cast<std::size_t>(last)] - 1
                              : content.size();
        return std::string(content.substr(begin, end - begin));
    }
};

void extract_file(const SourceFile& file, FunctionIndex& index) {
    const std::string mask = mask_code(file.content);
    const LineTable lines(file.content);
    const std::size_t n = mask.size();

    int depth = 0;
    int transparent_open = 0; // extern "C" / namespace scopes
    std::size_t last_boundary = 0;

    for (std::size_t i = 0; i < n; ++i) {
        char c = mask[i];
        if (c == ';' && depth == 0) {
            last_boundary = i + 1;
            continue;
        }
        if (c == '}') {
            if (depth > 0) {
                if (--depth == 0) last_boundary = i + 1;
            } else if (transparent_open > 0) {
                --transparent_open;
                last_boundary = i + 1;
            } else {
                index.warnings.push_back(file.path + ":" + std::to_string(lines.line_of(i)) +
                                         ": stray closing brace");
                last_boundary = i + 1;
            }
            continue;
        }
        if (c != '{') continue;

        if (depth != 0) {
            ++depth;
            continue;
        }

        HeadMatch head = match_head(mask, i);
        if (head.found && !is_control_keyword(head.name)) {
            std::size_t close = find_matching_brace(mask, i);
            if (close == std::string_view::npos) {
                index.warnings.push_back(file.path + ": unbalanced braces in definition of " +
                                         head.qualified + " (file skipped from here)");
                return;
            }
            // The definition starts at the first code after the previous
            // top-level terminator: the return-type tokens.
            std::size_t def_start = last_boundary;
            while (def_start < i && std::isspace(static_cast<unsigned char>(mask[def_start])))
                ++def_start;
            if (def_start > head.qualified_start) def_start = head.qualified_start;

            FunctionDef def;
            def.name = head.name;
            def.qualified_name = head.qualified;
            def.file_path = file.path;
            def.start_line = lines.line_of(def_start);
            def.end_line = lines.line_of(close);
            def.head_line = lines.line_of(head.qualified_start);
            def.body = lines.slice(file.content, def.start_line, def.end_line);
            std::size_t body_begin = lines.starts[static_cast<std::size_t>(def.start_line - 1)];
            def.body_brace_offset = i - body_begin;
            def.parameters = parse_parameters(mask, head.lparen, head.rparen);

            std::size_t idx = index.functions.size();
            index.functions.push_back(std::move(def));
            const FunctionDef& stored = index.functions.back();
            index.by_name[stored.name].push_back(idx);
            if (stored.qualified_name != stored.name)
                index.by_name[stored.qualified_name].push_back(idx);
            index.by_file[stored.file_path].push_back(idx);

            i = close;
            last_boundary = close + 1;
            continue;
        }

        // extern "C" { ... } and namespace x { ... } keep their contents
        // top-level for extraction purposes.
        std::size_t prev_end = skip_spaces_back(mask, i);
        std::string prev_word = word_before(mask, i);
        std::string prev_prev = "";
        if (!prev_word.empty()) {
            std::size_t ws = ident_start_before(mask, prev_end);
            if (ws != std::string_view::npos) prev_prev = word_before(mask, ws);
        }
        if (prev_word == "extern" || prev_word == "namespace" || prev_prev == "namespace") {
            ++transparent_open;
            continue;
        }
        if (prev_end == 0 || mask[prev_end - 1] == ';' || mask[prev_end - 1] == '}') {
            index.warnings.push_back(file.path + ":" + std::to_string(lines.line_of(i)) +
                                     ": block without a recognizable function head");
        }
        ++depth;
    }

    if (depth != 0)
        index.warnings.push_back(file.path + ": file ends inside an open brace scope");
}

} // namespace

FunctionIndex extract_functions(const SourceTree& tree) {
    FunctionIndex index;
    for (const auto& file : tree.files) {
        if (file.language_tag == LanguageTag::other) continue;
        extract_file(file, index);
    }
    return index;
}

std::vector<const FunctionDef*> lookup_function(const FunctionIndex& index,
                                                const std::string& name) {
    std::vector<const FunctionDef*> result;
    auto it = index.by_name.find(name);
    if (it != index.by_name.end()) {
        for (std::size_t idx : it->second) result.push_back(&index.functions[idx]);
    } else if (!name.empty()) {
        // Suffix fallback at a "::" boundary, so "Init" finds "Toolbar::Init"
        // but "CaptureToolbar::Init" does not match "AppCaptureToolbar::Init".
        for (const auto& def : index.functions) {
            const std::string& q = def.qualified_name;
            if (q.size() <= name.size() || q.compare(q.size() - name.size(), name.size(), name) != 0)
                continue;
            std::size_t at = q.size() - name.size();
            if (at >= 2 && q[at - 1] == ':' && q[at - 2] == ':')
                result.push_back(&def);
        }
    }
    std::sort(result.begin(), result.end(), [](const FunctionDef* a, const FunctionDef* b) {
        if (a->file_path != b->file_path) return a->file_path < b->file_path;
        return a->start_line < b->start_line;
    });
    result.erase(std::unique(result.begin(), result.end()), result.end());
    return result;
}

} // namespace cmind
