#include "ssaudit/workbook.hpp"

#include <array>

namespace ssaudit {

namespace {

constexpr std::array<std::pair<ErrorCode, std::string_view>, 7> kErrorCodes{{
    {ErrorCode::Null, "#NULL!"},
    {ErrorCode::Div0, "#DIV/0!"},
    {ErrorCode::Value, "#VALUE!"},
    {ErrorCode::Ref, "#REF!"},
    {ErrorCode::Name, "#NAME?"},
    {ErrorCode::Num, "#NUM!"},
    {ErrorCode::NA, "#N/A"},
}};

}  // namespace

std::optional<ErrorCode> parse_error_code(std::string_view text) {
    for (const auto& [code, spelling] : kErrorCodes) {
        if (iequals(text, spelling)) return code;
    }
    return std::nullopt;
}

std::string_view error_code_text(ErrorCode code) {
    for (const auto& [c, spelling] : kErrorCodes) {
        if (c == code) return spelling;
    }
    return "#N/A";
}

std::string_view cell_kind_name(CellKind kind) {
    switch (kind) {
        case CellKind::Blank: return "Blank";
        case CellKind::Number: return "Number";
        case CellKind::Text: return "Text";
        case CellKind::Boolean: return "Boolean";
        case CellKind::ErrorValue: return "ErrorValue";
        case CellKind::Formula: return "Formula";
    }
    return "Blank";
}

std::string_view visibility_name(SheetVisibility v) {
    switch (v) {
        case SheetVisibility::Visible: return "Visible";
        case SheetVisibility::Hidden: return "Hidden";
        case SheetVisibility::VeryHidden: return "VeryHidden";
    }
    return "Visible";
}

std::string_view hidden_kind_name(HiddenKind kind) {
    switch (kind) {
        case HiddenKind::Sheet: return "Sheet";
        case HiddenKind::Row: return "Row";
        case HiddenKind::Column: return "Column";
    }
    return "Sheet";
}

std::optional<std::size_t> WorkbookModel::sheet_index(std::string_view name) const {
    for (std::size_t i = 0; i < sheets.size(); ++i) {
        if (iequals(sheets[i].name, name)) return i;
    }
    return std::nullopt;
}

std::size_t occupied_cells(const WorkbookModel& model) {
    std::size_t n = 0;
    for (const auto& sheet : model.sheets) {
        for (const auto& [pos, cell] : sheet.cells) {
            if (cell.content.kind != CellKind::Blank) ++n;
        }
    }
    return n;
}

std::size_t calculation_cells(const WorkbookModel& model) {
    std::size_t n = 0;
    for (const auto& sheet : model.sheets) {
        for (const auto& [pos, cell] : sheet.cells) {
            if (cell.content.kind == CellKind::Formula) ++n;
        }
    }
    return n;
}

std::vector<HiddenData> hidden_data(const WorkbookModel& model) {
    std::vector<HiddenData> out;
    for (const auto& sheet : model.sheets) {
        if (sheet.visibility != SheetVisibility::Visible) {
            std::size_t n = 0;
            for (const auto& [pos, cell] : sheet.cells) {
                if (cell.content.kind != CellKind::Blank) ++n;
            }
            if (n > 0) out.push_back({HiddenKind::Sheet, sheet.name, n});
            continue;
        }
        std::map<std::uint32_t, std::size_t> rows;
        std::map<std::uint32_t, std::size_t> cols;
        for (const auto& [pos, cell] : sheet.cells) {
            if (cell.content.kind == CellKind::Blank) continue;
            if (sheet.hidden_rows.contains(pos.row)) ++rows[pos.row];
            if (sheet.hidden_columns.contains(pos.column)) ++cols[pos.column];
        }
        std::string prefix = render_sheet_prefix(sheet.name);
        for (const auto& [row, n] : rows)
            out.push_back({HiddenKind::Row, prefix + std::to_string(row), n});
        for (const auto& [col, n] : cols)
            out.push_back({HiddenKind::Column, prefix + column_to_letters(col), n});
    }
    return out;
}

}  // namespace ssaudit
