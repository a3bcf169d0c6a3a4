#pragma once

#include "xlsx_builder.hpp"

#include "ssaudit/xlsx_reader.hpp"

#include <string>

namespace ssaudit::fixtures {

/// Round-trips the builder through the real loader.
inline WorkbookModel load(const XlsxBuilder& b, std::string path = "fixture.xlsx") {
    return load_workbook_bytes(b.build(), std::move(path));
}

inline CellAddress addr(std::string_view text) { return parse_address(text); }

}  // namespace ssaudit::fixtures
