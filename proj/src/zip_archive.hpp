#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ssaudit::detail {

class ZipError : public std::runtime_error {
public:
    enum class Kind { NotAZip, Encrypted, Corrupt };
    ZipError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Read-only view of a ZIP archive held fully in memory. Supports the
/// stored and deflate methods, which is all that OOXML producers emit.
class ZipArchive {
public:
    explicit ZipArchive(std::vector<char> bytes);

    bool contains(std::string_view name) const { return find(name) != nullptr; }
    /// Part names compare case-insensitively, as OPC requires.
    std::optional<std::string> read(std::string_view name) const;
    std::vector<std::string> names() const;

private:
    struct Entry {
        std::string name;
        std::uint16_t method = 0;
        std::uint16_t flags = 0;
        std::uint32_t crc = 0;
        std::uint32_t compressed_size = 0;
        std::uint32_t uncompressed_size = 0;
        std::uint32_t local_offset = 0;
    };

    const Entry* find(std::string_view name) const;

    std::vector<char> bytes_;
    std::vector<Entry> entries_;
};

}  // namespace ssaudit::detail
