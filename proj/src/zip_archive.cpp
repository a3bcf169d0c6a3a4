#include "zip_archive.hpp"

#include "ssaudit/address.hpp"

#include <zlib.h>

#include <cstring>

namespace ssaudit::detail {

namespace {

constexpr std::uint32_t kEndOfCentralDir = 0x06054b50;
constexpr std::uint32_t kCentralHeader = 0x02014b50;
constexpr std::uint32_t kLocalHeader = 0x04034b50;

std::uint16_t u16(const std::vector<char>& b, std::size_t at) {
    return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                      (static_cast<unsigned char>(b[at + 1]) << 8));
}

std::uint32_t u32(const std::vector<char>& b, std::size_t at) {
    return static_cast<std::uint32_t>(u16(b, at)) | (static_cast<std::uint32_t>(u16(b, at + 2)) << 16);
}

std::string inflate_raw(const char* data, std::size_t size, std::size_t expected) {
    std::string out(expected, '\0');
    z_stream zs{};
    if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw ZipError(ZipError::Kind::Corrupt, "inflateInit failed");
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data));
    zs.avail_in = static_cast<uInt>(size);
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    int rc = inflate(&zs, Z_FINISH);
    std::size_t produced = zs.total_out;
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || produced != expected)
        throw ZipError(ZipError::Kind::Corrupt, "deflate stream is corrupt");
    return out;
}

}  // namespace

ZipArchive::ZipArchive(std::vector<char> bytes) : bytes_(std::move(bytes)) {
    static constexpr unsigned char kOleMagic[4] = {0xD0, 0xCF, 0x11, 0xE0};
    if (bytes_.size() >= 4 && std::memcmp(bytes_.data(), kOleMagic, 4) == 0)
        throw ZipError(ZipError::Kind::Encrypted,
                       "compound document container (encrypted workbook or legacy .xls)");
    if (bytes_.size() < 22 || bytes_[0] != 'P' || bytes_[1] != 'K')
        throw ZipError(ZipError::Kind::NotAZip, "not a ZIP container");

    std::size_t eocd = std::string::npos;
    std::size_t lowest = bytes_.size() > 22 + 65535 ? bytes_.size() - 22 - 65535 : 0;
    for (std::size_t pos = bytes_.size() - 22 + 1; pos-- > lowest;) {
        if (u32(bytes_, pos) == kEndOfCentralDir) {
            eocd = pos;
            break;
        }
    }
    if (eocd == std::string::npos) throw ZipError(ZipError::Kind::NotAZip, "no end of central directory record");

    std::uint16_t count = u16(bytes_, eocd + 10);
    std::size_t offset = u32(bytes_, eocd + 16);
    entries_.reserve(count);
    for (std::uint16_t i = 0; i < count; ++i) {
        if (offset + 46 > bytes_.size() || u32(bytes_, offset) != kCentralHeader)
            throw ZipError(ZipError::Kind::NotAZip, "corrupt central directory");
        Entry e;
        e.flags = u16(bytes_, offset + 8);
        e.method = u16(bytes_, offset + 10);
        e.crc = u32(bytes_, offset + 16);
        e.compressed_size = u32(bytes_, offset + 20);
        e.uncompressed_size = u32(bytes_, offset + 24);
        std::uint16_t name_len = u16(bytes_, offset + 28);
        std::uint16_t extra_len = u16(bytes_, offset + 30);
        std::uint16_t comment_len = u16(bytes_, offset + 32);
        e.local_offset = u32(bytes_, offset + 42);
        if (offset + 46 + name_len > bytes_.size())
            throw ZipError(ZipError::Kind::NotAZip, "corrupt central directory");
        e.name.assign(bytes_.data() + offset + 46, name_len);
        if (e.flags & 0x1) throw ZipError(ZipError::Kind::Encrypted, "encrypted ZIP entry: " + e.name);
        entries_.push_back(std::move(e));
        offset += 46u + name_len + extra_len + comment_len;
    }
}

const ZipArchive::Entry* ZipArchive::find(std::string_view name) const {
    if (!name.empty() && name.front() == '/') name.remove_prefix(1);
    for (const auto& e : entries_) {
        if (e.name == name) return &e;
    }
    for (const auto& e : entries_) {
        if (iequals(e.name, name)) return &e;
    }
    return nullptr;
}

std::vector<std::string> ZipArchive::names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.name);
    return out;
}

std::optional<std::string> ZipArchive::read(std::string_view name) const {
    const Entry* e = find(name);
    if (!e) return std::nullopt;
    std::size_t at = e->local_offset;
    if (at + 30 > bytes_.size() || u32(bytes_, at) != kLocalHeader)
        throw ZipError(ZipError::Kind::Corrupt, "bad local header for " + e->name);
    std::size_t data = at + 30 + u16(bytes_, at + 26) + u16(bytes_, at + 28);
    if (data + e->compressed_size > bytes_.size())
        throw ZipError(ZipError::Kind::Corrupt, "truncated entry " + e->name);

    std::string out;
    if (e->method == 0) {
        out.assign(bytes_.data() + data, e->compressed_size);
    } else if (e->method == 8) {
        out = inflate_raw(bytes_.data() + data, e->compressed_size, e->uncompressed_size);
    } else {
        throw ZipError(ZipError::Kind::Corrupt, "unsupported compression method for " + e->name);
    }
    auto crc = crc32(0L, reinterpret_cast<const Bytef*>(out.data()), static_cast<uInt>(out.size()));
    if (crc != e->crc) throw ZipError(ZipError::Kind::Corrupt, "CRC mismatch in " + e->name);
    return out;
}

}  // namespace ssaudit::detail
