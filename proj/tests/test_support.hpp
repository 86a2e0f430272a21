#pragma once

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>
#include <zlib.h>

#include "cmind/pipeline.hpp"
#include "cmind/source_tree.hpp"
#include "cmind/util.hpp"

namespace test_support {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;

    TempDir() {
        path = fs::temp_directory_path() / ("cmind_test_" + cmind::random_hex16());
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

inline void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

using FileList = std::vector<std::pair<std::string, std::string>>; // (path, content)

struct CommandResult {
    int exit_code = -1;
    std::string stdout_text;
};

inline CommandResult run_command(const std::string& command) {
    CommandResult result;
    FILE* pipe = popen((command + " 2>/dev/null").c_str(), "r");
    if (pipe == nullptr) return result;
    char buffer[4096];
    std::size_t n;
    while ((n = fread(buffer, 1, sizeof(buffer), pipe)) > 0)
        result.stdout_text.append(buffer, n);
    int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

// ---------------------------------------------------------------------------
// Archive builders
// ---------------------------------------------------------------------------

inline std::string tar_header(const std::string& name, std::size_t size, char typeflag = '0') {
    std::string h(512, '\0');
    std::memcpy(&h[0], name.data(), std::min<std::size_t>(name.size(), 100));
    std::snprintf(&h[100], 8, "%07o", 0644);
    std::snprintf(&h[108], 8, "%07o", 0);
    std::snprintf(&h[116], 8, "%07o", 0);
    std::snprintf(&h[124], 12, "%011lo", static_cast<unsigned long>(size));
    std::snprintf(&h[136], 12, "%011o", 0);
    std::memset(&h[148], ' ', 8);
    h[156] = typeflag;
    std::memcpy(&h[257], "ustar", 5);
    h[263] = '0';
    h[264] = '0';
    unsigned sum = 0;
    for (unsigned char c : h) sum += c;
    std::snprintf(&h[148], 8, "%06o", sum);
    h[155] = ' ';
    return h;
}

inline std::string tar_bytes(const FileList& files) {
    std::string out;
    for (const auto& [name, content] : files) {
        out += tar_header(name, content.size());
        out += content;
        out.append((512 - content.size() % 512) % 512, '\0');
    }
    out.append(1024, '\0');
    return out;
}

inline std::string gzip_bytes(const std::string& data) {
    z_stream zs{};
    deflateInit2(&zs, Z_BEST_SPEED, Z_DEFLATED, MAX_WBITS + 16, 8, Z_DEFAULT_STRATEGY);
    std::string out(deflateBound(&zs, static_cast<uLong>(data.size())) + 32, '\0');
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    zs.avail_in = static_cast<uInt>(data.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    deflate(&zs, Z_FINISH);
    out.resize(out.size() - zs.avail_out);
    deflateEnd(&zs);
    return out;
}

inline std::string raw_deflate(const std::string& data) {
    z_stream zs{};
    deflateInit2(&zs, Z_BEST_SPEED, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY);
    std::string out(deflateBound(&zs, static_cast<uLong>(data.size())) + 32, '\0');
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    zs.avail_in = static_cast<uInt>(data.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    deflate(&zs, Z_FINISH);
    out.resize(out.size() - zs.avail_out);
    deflateEnd(&zs);
    return out;
}

inline void put16(std::string& s, std::uint16_t v) {
    s.push_back(static_cast<char>(v & 0xFF));
    s.push_back(static_cast<char>((v >> 8) & 0xFF));
}

inline void put32(std::string& s, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::string zip_bytes(const FileList& files, bool deflated = false) {
    std::string out;
    struct Central {
        std::string name;
        std::uint32_t crc, csize, usize, offset;
        std::uint16_t method;
    };
    std::vector<Central> centrals;

    for (const auto& [name, content] : files) {
        std::uint32_t crc = static_cast<std::uint32_t>(
            crc32(0, reinterpret_cast<const Bytef*>(content.data()),
                  static_cast<uInt>(content.size())));
        std::string data = deflated ? raw_deflate(content) : content;
        Central c{name, crc, static_cast<std::uint32_t>(data.size()),
                  static_cast<std::uint32_t>(content.size()),
                  static_cast<std::uint32_t>(out.size()),
                  static_cast<std::uint16_t>(deflated ? 8 : 0)};
        out += "PK\x03\x04";
        put16(out, 20); put16(out, 0); put16(out, c.method);
        put16(out, 0); put16(out, 0);
        put32(out, c.crc); put32(out, c.csize); put32(out, c.usize);
        put16(out, static_cast<std::uint16_t>(name.size())); put16(out, 0);
        out += name;
        out += data;
        centrals.push_back(std::move(c));
    }

    std::uint32_t cd_offset = static_cast<std::uint32_t>(out.size());
    for (const auto& c : centrals) {
        out += "PK\x01\x02";
        put16(out, 20); put16(out, 20); put16(out, 0); put16(out, c.method);
        put16(out, 0); put16(out, 0);
        put32(out, c.crc); put32(out, c.csize); put32(out, c.usize);
        put16(out, static_cast<std::uint16_t>(c.name.size()));
        put16(out, 0); put16(out, 0); put16(out, 0); put16(out, 0);
        put32(out, 0); put32(out, c.offset);
        out += c.name;
    }
    std::uint32_t cd_size = static_cast<std::uint32_t>(out.size()) - cd_offset;
    out += "PK\x05\x06";
    put16(out, 0); put16(out, 0);
    put16(out, static_cast<std::uint16_t>(centrals.size()));
    put16(out, static_cast<std::uint16_t>(centrals.size()));
    put32(out, cd_size); put32(out, cd_offset); put16(out, 0);
    return out;
}

// ---------------------------------------------------------------------------
// Transcript builder
// ---------------------------------------------------------------------------

// (stage, response) pairs; fingerprints are left empty so replay skips the
// prompt check (hand-authored transcripts).
inline std::string transcript_jsonl(const FileList& stage_responses) {
    std::string out;
    for (const auto& [stage, response] : stage_responses) {
        nlohmann::json record = {{"stage", stage},
                                 {"fingerprint", ""},
                                 {"prompt", ""},
                                 {"response", response}};
        out += record.dump() + "\n";
    }
    return out;
}

inline fs::path write_transcript(const fs::path& dir, const std::string& name,
                                 const FileList& stage_responses) {
    fs::path path = dir / name;
    write_file(path, transcript_jsonl(stage_responses));
    return path;
}

// ---------------------------------------------------------------------------
// Scripted eval corpora (Table-1 style accounting)
// ---------------------------------------------------------------------------

// Builds `n_correct + n_wrong + n_inconclusive` cases. Correct transcripts
// conclude with the ground-truth name, wrong ones name a real-but-wrong
// helper, inconclusive ones request a phantom method forever.
inline void build_eval_corpus(const fs::path& corpus_dir, int n_correct, int n_wrong,
                              int n_inconclusive) {
    std::string manifest;
    int total = n_correct + n_wrong + n_inconclusive;
    for (int i = 0; i < total; ++i) {
        std::string id = "case_" + std::to_string(i);
        std::string buggy = "buggy_fn_" + std::to_string(i);
        std::string helper = "helper_fn_" + std::to_string(i);
        std::string entry = "entry_fn_" + std::to_string(i);
        fs::path dir = corpus_dir / id;

        write_file(dir / "src" / "main.c",
                   "int " + helper + "(int v)\n{\n\treturn v * 2;\n}\n\n"
                   "void " + buggy + "(char *p)\n{\n\tp[8] = 0;\n}\n\n"
                   "void " + entry + "(void)\n{\n\tchar buf[4];\n\tint n = " + helper +
                       "(2);\n\t(void)n;\n\t" + buggy + "(buf);\n}\n");
        write_file(dir / "report.txt",
                   "stack-buffer-overflow\n    #0 " + buggy + " main.c:8\n    #1 " + entry +
                       " main.c:15\n");

        FileList turns;
        turns.push_back({"entry_collector", "METHOD:1." + entry + " FILE:1.NONE"});
        turns.push_back({"analysis_selector", "call graph analysis"});
        turns.push_back({"chain_selector", "path: 1." + entry + " -> " + buggy});
        if (i < n_correct) {
            turns.push_back({"reasoner",
                             "REASONING METHODS: [backward reasoning] REASONING STEPS: [" + entry +
                                 " hands a 4-byte buffer to " + buggy +
                                 ", which writes index 8.] Hypothesis: [" + buggy +
                                 " writes past the end of the buffer passed by " + entry + ".]"});
            turns.push_back({"summarizer",
                             "1. " + entry + " allocates 4 bytes.\n2. " + buggy +
                                 " writes index 8.\n\nHypothesis\n" + buggy +
                                 " overflows the buffer."});
        } else if (i < n_correct + n_wrong) {
            turns.push_back({"reasoner",
                             "REASONING METHODS: [code comprehension] REASONING STEPS: [the "
                             "doubling looks suspicious] Hypothesis: [" + helper +
                                 " returns a size that is too large.]"});
            turns.push_back({"summarizer",
                             "1. " + helper + " doubles its input.\n\nHypothesis\n" + helper +
                                 " miscomputes the size."});
        } else {
            for (int k = 0; k < 6; ++k)
                turns.push_back({"reasoner",
                                 "REASONING METHODS: [code comprehension] REASONING STEPS: "
                                 "[cannot conclude without phantom_fn] METHOD MISSING: "
                                 "[phantom_fn]"});
        }
        write_file(dir / "replay.jsonl", transcript_jsonl(turns));

        nlohmann::json line = {{"case_id", id},
                               {"report", id + "/report.txt"},
                               {"source", id + "/src"},
                               {"transcript", id + "/replay.jsonl"},
                               {"ground_truth", {buggy}}};
        manifest += line.dump() + "\n";
    }
    write_file(corpus_dir / "manifest.jsonl", manifest);
}

// ---------------------------------------------------------------------------
// No-fabrication leash checks
// ---------------------------------------------------------------------------

inline std::vector<std::string> extract_fenced_blocks(const std::string& prompt) {
    std::vector<std::string> blocks;
    std::size_t pos = 0;
    while (true) {
        std::size_t open = prompt.find("```\n", pos);
        if (open == std::string::npos) break;
        std::size_t begin = open + 4;
        std::size_t close = prompt.find("\n```", begin);
        if (close == std::string::npos) break;
        blocks.push_back(prompt.substr(begin, close - begin));
        pos = close + 4;
    }
    return blocks;
}

// A block is verbatim iff, after stripping the optional trailing truncation
// marker line, it is a substring of some file's content.
inline bool block_is_verbatim(const cmind::SourceTree& tree, std::string block) {
    const std::string marker = "\n[truncated]";
    if (block.size() >= marker.size() &&
        block.compare(block.size() - marker.size(), marker.size(), marker) == 0)
        block.resize(block.size() - marker.size());
    if (block == "[truncated]") return true;
    if (!block.empty() && block.back() == '\n') block.pop_back();
    if (block.empty()) return true;
    for (const auto& file : tree.files)
        if (file.content.find(block) != std::string::npos) return true;
    return false;
}

inline int count_leash_violations(const cmind::SourceTree& tree,
                                  const cmind::ReasoningTrace& trace) {
    int violations = 0;
    for (const auto& exchange : trace.exchanges)
        for (const auto& block : extract_fenced_blocks(exchange.prompt))
            if (!block_is_verbatim(tree, block)) ++violations;
    return violations;
}

} // namespace test_support
