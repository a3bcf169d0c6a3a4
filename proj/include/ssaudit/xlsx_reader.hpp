#pragma once

#include "ssaudit/workbook.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>

namespace ssaudit {

enum class LoadErrorKind { NotAZipContainer, MissingWorkbookPart, MalformedSheetXml, UnsupportedEncryptedFile };
std::string_view load_error_kind_name(LoadErrorKind kind);

/// Fatal for one file; a corpus scan records it and moves on.
class LoadError : public std::runtime_error {
public:
    LoadError(LoadErrorKind kind, const std::string& detail, std::string sheet = {}, std::int64_t offset = -1);

    LoadErrorKind kind() const { return kind_; }
    /// Set for MalformedSheetXml: sheet (or package part) name and byte offset.
    const std::string& sheet() const { return sheet_; }
    std::int64_t offset() const { return offset_; }

private:
    LoadErrorKind kind_;
    std::string sheet_;
    std::int64_t offset_;
};

WorkbookModel load_workbook(const std::filesystem::path& path);

/// Same as load_workbook, over bytes already in memory. `path` is recorded
/// in the model as-is.
WorkbookModel load_workbook_bytes(std::vector<char> bytes, std::string path);

}  // namespace ssaudit
