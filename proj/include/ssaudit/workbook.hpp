#pragma once

#include "ssaudit/address.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace ssaudit {

enum class ErrorCode { Null, Div0, Value, Ref, Name, Num, NA };

/// "#REF!" etc. Returns nullopt for anything outside the seven standard codes.
std::optional<ErrorCode> parse_error_code(std::string_view text);
std::string_view error_code_text(ErrorCode code);

enum class CellKind { Blank, Number, Text, Boolean, ErrorValue, Formula };
std::string_view cell_kind_name(CellKind kind);

using CellValue = std::variant<std::monostate, double, std::string, bool, ErrorCode>;

/// For kind == Formula, `value` holds the cached result (monostate when the
/// file stored none) and `formula` the text without a leading '='.
struct CellContent {
    CellKind kind = CellKind::Blank;
    CellValue value;
    std::string formula;

    bool operator==(const CellContent&) const = default;

    const CellValue* cached_value() const {
        return kind == CellKind::Formula && value.index() != 0 ? &value : nullptr;
    }
    std::optional<ErrorCode> error() const {
        if (const auto* e = std::get_if<ErrorCode>(&value)) return *e;
        return std::nullopt;
    }
};

struct StyleRecord {
    std::string fill_color;   // "none", "rgb:FF0000FF", "theme:4", "indexed:64"
    std::string font_color;   // "" when the font carries no explicit color
    bool bold = false;
    bool has_border = false;

    bool operator==(const StyleRecord&) const = default;
};

struct Cell {
    CellAddress address;
    CellContent content;
    std::uint32_t style_key = 0;

    bool operator==(const Cell&) const = default;
};

enum class SheetVisibility { Visible, Hidden, VeryHidden };
std::string_view visibility_name(SheetVisibility v);

/// Row-major key inside one sheet.
struct GridPos {
    std::uint32_t row = 0;
    std::uint32_t column = 0;
    auto operator<=>(const GridPos&) const = default;
};

struct SheetModel {
    std::string name;
    SheetVisibility visibility = SheetVisibility::Visible;
    std::map<GridPos, Cell> cells;
    std::set<std::uint32_t> hidden_rows;
    std::set<std::uint32_t> hidden_columns;

    bool operator==(const SheetModel&) const = default;

    const Cell* find(std::uint32_t row, std::uint32_t column) const {
        auto it = cells.find(GridPos{row, column});
        return it == cells.end() ? nullptr : &it->second;
    }
};

struct DefinedName {
    std::string name;
    std::string formula;                     // text after '=' (if any)
    std::optional<std::size_t> local_sheet;  // index into sheets for sheet-scoped names

    bool operator==(const DefinedName&) const = default;
};

struct ExternalLink {
    std::size_t index = 0;          // 1-based, as written in "[1]Sheet!A1"
    std::string target;             // workbook path/URL recorded in the package
    std::vector<std::string> sheet_names;
    bool resolved = false;          // the package carries a target for this link

    bool operator==(const ExternalLink&) const = default;
};

struct WorkbookModel {
    std::string path;
    std::vector<SheetModel> sheets;
    std::vector<DefinedName> defined_names;
    std::vector<ExternalLink> external_links;
    std::vector<StyleRecord> styles;    // indexed by Cell::style_key; never empty
    std::optional<std::string> file_creation_date;

    bool operator==(const WorkbookModel&) const = default;

    std::optional<std::size_t> sheet_index(std::string_view name) const;
    const StyleRecord& style(std::uint32_t key) const {
        return key < styles.size() ? styles[key] : styles.front();
    }
};

std::size_t occupied_cells(const WorkbookModel& model);
std::size_t calculation_cells(const WorkbookModel& model);

enum class HiddenKind { Sheet, Row, Column };
std::string_view hidden_kind_name(HiddenKind kind);

struct HiddenData {
    HiddenKind kind;
    std::string identifier;   // "Secret", "Sheet1!7", "Sheet1!C"
    std::size_t occupied = 0;

    bool operator==(const HiddenData&) const = default;
};

/// Hidden sheets, rows and columns that hold at least one occupied cell.
/// Rows and columns inside a hidden sheet are covered by the sheet entry.
std::vector<HiddenData> hidden_data(const WorkbookModel& model);

}  // namespace ssaudit
