#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ssaudit {

inline constexpr std::uint32_t kMaxColumns = 16384;   // XFD
inline constexpr std::uint32_t kMaxRows = 1048576;
inline constexpr std::size_t kMaxSheetNameLength = 31;

class AddressError : public std::runtime_error {
public:
    explicit AddressError(const std::string& what) : std::runtime_error("BadAddressSyntax: " + what) {}
};

/// A single-cell location in A1 notation. An empty sheet_name means the
/// address is relative to whatever sheet holds the referring formula.
struct CellAddress {
    std::string sheet_name;
    std::uint32_t column = 1;
    std::uint32_t row = 1;
    bool col_absolute = false;
    bool row_absolute = false;

    bool operator==(const CellAddress&) const = default;
};

/// Ordering used for every sorted listing: sheet name, then row, then column.
/// Absolute flags do not take part.
std::strong_ordering compare_locations(const CellAddress& a, const CellAddress& b);

struct LocationLess {
    bool operator()(const CellAddress& a, const CellAddress& b) const {
        return compare_locations(a, b) < 0;
    }
};

/// Bijective base-26: "A" -> 1, "Z" -> 26, "AA" -> 27. Returns 0 for invalid input.
std::uint32_t column_from_letters(std::string_view letters);
std::string column_to_letters(std::uint32_t column);

CellAddress parse_address(std::string_view text);
std::string render_address(const CellAddress& address);

/// Renders "Sheet1!" or "'My Sheet'!" (empty string for an empty name).
std::string render_sheet_prefix(std::string_view sheet_name);
bool sheet_name_needs_quotes(std::string_view sheet_name);

/// Case-insensitive ASCII comparison used for sheet and defined names.
bool iequals(std::string_view a, std::string_view b);
std::string to_upper(std::string_view s);
std::string to_lower(std::string_view s);

}  // namespace ssaudit
