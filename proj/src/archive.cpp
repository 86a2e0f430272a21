#include "cmind/archive.hpp"

#include <array>
#include <cstring>

#include <zlib.h>

#include "cmind/error.hpp"
#include "cmind/util.hpp"

namespace cmind {

namespace {

std::uint16_t rd16(std::string_view b, std::size_t off) {
    return static_cast<std::uint16_t>(static_cast<unsigned char>(b[off]) |
                                      (static_cast<unsigned char>(b[off + 1]) << 8));
}

std::uint32_t rd32(std::string_view b, std::size_t off) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(b[off]) |
                                      (static_cast<unsigned char>(b[off + 1]) << 8) |
                                      (static_cast<unsigned char>(b[off + 2]) << 16) |
                                      (static_cast<unsigned char>(b[off + 3]) << 24));
}

std::string inflate_bytes(std::string_view input, int window_bits, std::size_t size_hint) {
    z_stream zs{};
    if (inflateInit2(&zs, window_bits) != Z_OK)
        throw Error(ErrorCode::UnsupportedArchive, "inflate init failed");
    std::string out;
    out.reserve(size_hint ? size_hint : input.size() * 3);
    std::array<char, 65536> buf{};
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(input.data()));
    zs.avail_in = static_cast<uInt>(input.size());
    int rc = Z_OK;
    do {
        zs.next_out = reinterpret_cast<Bytef*>(buf.data());
        zs.avail_out = static_cast<uInt>(buf.size());
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw Error(ErrorCode::UnsupportedArchive, "corrupt compressed data");
        }
        out.append(buf.data(), buf.size() - zs.avail_out);
        if (out.size() > kMaxArchiveBytes) {
            inflateEnd(&zs);
            throw Error(ErrorCode::ArchiveTooLarge, "decompressed size exceeds limit");
        }
    } while (rc != Z_STREAM_END && (zs.avail_in > 0 || zs.avail_out == 0));
    inflateEnd(&zs);
    if (rc != Z_STREAM_END)
        throw Error(ErrorCode::UnsupportedArchive, "truncated compressed data");
    return out;
}

void check_limits(std::size_t files, std::size_t total_bytes) {
    if (files > kMaxArchiveFiles)
        throw Error(ErrorCode::ArchiveTooLarge, "more than " + std::to_string(kMaxArchiveFiles) + " files");
    if (total_bytes > kMaxArchiveBytes)
        throw Error(ErrorCode::ArchiveTooLarge, "contents exceed " + std::to_string(kMaxArchiveBytes) + " bytes");
}

// --------------------------------------------------------------------------
// tar (ustar; tolerates GNU long names and skips pax metadata entries)
// --------------------------------------------------------------------------

std::uint64_t parse_octal(std::string_view field) {
    std::uint64_t value = 0;
    for (char c : field) {
        if (c == '\0' || c == ' ') {
            if (value > 0) break;
            continue;
        }
        if (c < '0' || c > '7') break;
        value = value * 8 + static_cast<std::uint64_t>(c - '0');
    }
    return value;
}

bool block_is_zero(std::string_view block) {
    for (char c : block)
        if (c != '\0') return false;
    return true;
}

std::vector<ArchiveEntry> read_tar(std::string_view bytes) {
    std::vector<ArchiveEntry> entries;
    std::size_t off = 0;
    std::size_t total = 0;
    std::string pending_long_name;
    while (off + 512 <= bytes.size()) {
        std::string_view header = bytes.substr(off, 512);
        if (block_is_zero(header)) break; // end marker
        std::string name(header.substr(0, 100).data(),
                         strnlen(header.substr(0, 100).data(), 100));
        std::uint64_t size = parse_octal(header.substr(124, 12));
        char typeflag = header[156];
        std::string_view magic = header.substr(257, 5);
        if (magic == "ustar") {
            std::string prefix(header.substr(345, 155).data(),
                               strnlen(header.substr(345, 155).data(), 155));
            if (!prefix.empty()) name = prefix + "/" + name;
        }
        off += 512;
        std::size_t data_len = static_cast<std::size_t>(size);
        std::size_t padded = (data_len + 511) / 512 * 512;
        if (off + data_len > bytes.size())
            throw Error(ErrorCode::UnsupportedArchive, "truncated tar data");
        std::string_view data = bytes.substr(off, data_len);
        off += padded;

        if (typeflag == 'L') { // GNU long name: payload is the next entry's name
            pending_long_name.assign(data.data(), data.size());
            while (!pending_long_name.empty() && pending_long_name.back() == '\0')
                pending_long_name.pop_back();
            continue;
        }
        if (typeflag == 'x' || typeflag == 'g') continue; // pax metadata
        if (!pending_long_name.empty()) {
            name = pending_long_name;
            pending_long_name.clear();
        }
        if (typeflag != '0' && typeflag != '\0') continue; // dirs, links, devices
        std::string normalized = normalize_entry_path(name);
        if (normalized.empty()) continue;
        total += data_len;
        check_limits(entries.size() + 1, total);
        entries.push_back({std::move(normalized), std::string(data)});
    }
    return entries;
}

// --------------------------------------------------------------------------
// zip (central directory; stored + deflate entries)
// --------------------------------------------------------------------------

std::vector<ArchiveEntry> read_zip(std::string_view bytes) {
    // Locate the end-of-central-directory record (scan the trailing 64 KiB).
    static constexpr char kEocdSig[] = "PK\x05\x06";
    if (bytes.size() < 22) throw Error(ErrorCode::UnsupportedArchive, "zip too small");
    std::size_t scan_start = bytes.size() > 22 + 65535 ? bytes.size() - 22 - 65535 : 0;
    std::size_t eocd = std::string_view::npos;
    for (std::size_t i = bytes.size() - 22 + 1; i-- > scan_start;) {
        if (std::memcmp(bytes.data() + i, kEocdSig, 4) == 0) {
            eocd = i;
            break;
        }
    }
    if (eocd == std::string_view::npos)
        throw Error(ErrorCode::UnsupportedArchive, "zip central directory not found");

    std::uint16_t entry_count = rd16(bytes, eocd + 10);
    std::uint32_t cd_offset = rd32(bytes, eocd + 16);
    if (entry_count == 0xFFFF || cd_offset == 0xFFFFFFFFu)
        throw Error(ErrorCode::UnsupportedArchive, "zip64 archives are not supported");

    std::vector<ArchiveEntry> entries;
    std::size_t off = cd_offset;
    std::size_t total = 0;
    for (std::uint16_t n = 0; n < entry_count; ++n) {
        if (off + 46 > bytes.size() || std::memcmp(bytes.data() + off, "PK\x01\x02", 4) != 0)
            throw Error(ErrorCode::UnsupportedArchive, "corrupt zip central directory");
        std::uint16_t flags = rd16(bytes, off + 8);
        std::uint16_t method = rd16(bytes, off + 10);
        std::uint32_t comp_size = rd32(bytes, off + 20);
        std::uint32_t uncomp_size = rd32(bytes, off + 24);
        std::uint16_t name_len = rd16(bytes, off + 28);
        std::uint16_t extra_len = rd16(bytes, off + 30);
        std::uint16_t comment_len = rd16(bytes, off + 32);
        std::uint32_t local_offset = rd32(bytes, off + 42);
        if (off + 46 + name_len > bytes.size())
            throw Error(ErrorCode::UnsupportedArchive, "corrupt zip entry name");
        std::string raw_name(bytes.substr(off + 46, name_len));
        off += 46u + name_len + extra_len + comment_len;

        if (flags & 0x1)
            throw Error(ErrorCode::UnsupportedArchive, "encrypted zip entries are not supported");
        if (comp_size == 0xFFFFFFFFu || uncomp_size == 0xFFFFFFFFu || local_offset == 0xFFFFFFFFu)
            throw Error(ErrorCode::UnsupportedArchive, "zip64 archives are not supported");

        std::string normalized = normalize_entry_path(raw_name);
        if (normalized.empty()) continue; // directory entry

        // Local header gives the actual data offset.
        if (local_offset + 30 > bytes.size() ||
            std::memcmp(bytes.data() + local_offset, "PK\x03\x04", 4) != 0)
            throw Error(ErrorCode::UnsupportedArchive, "corrupt zip local header");
        std::uint16_t lh_name_len = rd16(bytes, local_offset + 26);
        std::uint16_t lh_extra_len = rd16(bytes, local_offset + 28);
        std::size_t data_off = local_offset + 30u + lh_name_len + lh_extra_len;
        if (data_off + comp_size > bytes.size())
            throw Error(ErrorCode::UnsupportedArchive, "truncated zip data");
        std::string_view data = bytes.substr(data_off, comp_size);

        std::string content;
        if (method == 0) {
            content.assign(data.data(), data.size());
        } else if (method == 8) {
            content = inflate_bytes(data, -MAX_WBITS, uncomp_size);
        } else {
            throw Error(ErrorCode::UnsupportedArchive,
                        "unsupported zip compression method " + std::to_string(method));
        }
        total += content.size();
        check_limits(entries.size() + 1, total);
        entries.push_back({std::move(normalized), std::move(content)});
    }
    return entries;
}

} // namespace

std::string normalize_entry_path(std::string_view raw) {
    std::string path(raw);
    for (char& c : path)
        if (c == '\\') c = '/';
    if (!path.empty() && path.front() == '/')
        throw Error(ErrorCode::ArchiveTraversal, "absolute entry path: " + path);
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= path.size(); ++i) {
        if (i == path.size() || path[i] == '/') {
            std::string part = path.substr(start, i - start);
            start = i + 1;
            if (part.empty() || part == ".") continue;
            if (part == "..")
                throw Error(ErrorCode::ArchiveTraversal, "entry escapes root: " + path);
            parts.push_back(std::move(part));
        }
    }
    if (parts.empty() || path.back() == '/') return ""; // directory-ish
    std::string out = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) out += "/" + parts[i];
    return out;
}

ArchiveFormat detect_archive_format(std::string_view bytes) {
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), "PK\x03\x04", 4) == 0)
        return ArchiveFormat::zip;
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), "PK\x05\x06", 4) == 0)
        return ArchiveFormat::zip; // empty zip
    if (bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0x1F &&
        static_cast<unsigned char>(bytes[1]) == 0x8B)
        return ArchiveFormat::tar_gz;
    if (bytes.size() >= 262 && std::memcmp(bytes.data() + 257, "ustar", 5) == 0)
        return ArchiveFormat::tar;
    // Pre-POSIX tar has no magic; accept a plausible octal size field plus
    // checksum match on the first header.
    if (bytes.size() >= 512) {
        std::string_view header = bytes.substr(0, 512);
        if (!block_is_zero(header)) {
            std::uint64_t stored = parse_octal(header.substr(148, 8));
            std::uint64_t sum = 0;
            for (std::size_t i = 0; i < 512; ++i)
                sum += (i >= 148 && i < 156) ? ' ' : static_cast<unsigned char>(header[i]);
            if (stored != 0 && stored == sum) return ArchiveFormat::tar;
        }
    }
    return ArchiveFormat::unknown;
}

std::vector<ArchiveEntry> read_archive(std::string_view bytes) {
    if (bytes.size() > kMaxArchiveBytes)
        throw Error(ErrorCode::ArchiveTooLarge, "archive exceeds size limit");
    switch (detect_archive_format(bytes)) {
    case ArchiveFormat::zip:
        return read_zip(bytes);
    case ArchiveFormat::tar:
        return read_tar(bytes);
    case ArchiveFormat::tar_gz: {
        std::string tar = inflate_bytes(bytes, MAX_WBITS + 16, 0);
        if (detect_archive_format(tar) != ArchiveFormat::tar)
            throw Error(ErrorCode::UnsupportedArchive, "gzip payload is not a tar archive");
        return read_tar(tar);
    }
    case ArchiveFormat::unknown:
        break;
    }
    throw Error(ErrorCode::UnsupportedArchive, "unrecognized archive format");
}

void validate_archive(std::string_view bytes) {
    read_archive(bytes); // shares the traversal/limit checks; contents discarded
}

} // namespace cmind
