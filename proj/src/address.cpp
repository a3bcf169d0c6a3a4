#include "ssaudit/address.hpp"

#include <algorithm>
#include <cctype>

namespace ssaudit {

namespace {

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Returns true when the text would read back as a cell reference, a boolean
// or an R1C1 token and therefore needs quoting as a sheet name.
bool looks_like_reference(std::string_view name) {
    std::size_t i = 0;
    while (i < name.size() && is_alpha(name[i])) ++i;
    std::size_t letters = i;
    while (i < name.size() && is_digit(name[i])) ++i;
    if (i == name.size() && letters > 0 && letters <= 3 && i > letters) return true;
    std::string upper = to_upper(name);
    if (upper == "TRUE" || upper == "FALSE") return true;
    if (!upper.empty() && (upper[0] == 'R' || upper[0] == 'C')) {
        bool rc_like = std::all_of(upper.begin() + 1, upper.end(),
                                   [](char c) { return is_digit(c) || c == 'R' || c == 'C'; });
        if (rc_like) return true;
    }
    return false;
}

}  // namespace

std::string to_upper(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) ==
                      std::tolower(static_cast<unsigned char>(y));
           });
}

std::strong_ordering compare_locations(const CellAddress& a, const CellAddress& b) {
    if (auto c = a.sheet_name <=> b.sheet_name; c != 0) return c;
    if (auto c = a.row <=> b.row; c != 0) return c;
    return a.column <=> b.column;
}

std::uint32_t column_from_letters(std::string_view letters) {
    if (letters.empty() || letters.size() > 3) return 0;
    std::uint32_t value = 0;
    for (char c : letters) {
        if (!is_alpha(c)) return 0;
        value = value * 26 + static_cast<std::uint32_t>(std::toupper(static_cast<unsigned char>(c)) - 'A' + 1);
    }
    return value <= kMaxColumns ? value : 0;
}

std::string column_to_letters(std::uint32_t column) {
    std::string out;
    while (column > 0) {
        std::uint32_t rem = (column - 1) % 26;
        out.insert(out.begin(), static_cast<char>('A' + rem));
        column = (column - 1) / 26;
    }
    return out;
}

bool sheet_name_needs_quotes(std::string_view name) {
    if (name.empty()) return false;
    if (!(is_alpha(name[0]) || name[0] == '_')) return true;
    for (char c : name) {
        if (!(is_alpha(c) || is_digit(c) || c == '_' || c == '.')) return true;
    }
    return looks_like_reference(name);
}

std::string render_sheet_prefix(std::string_view sheet_name) {
    if (sheet_name.empty()) return {};
    if (!sheet_name_needs_quotes(sheet_name)) return std::string(sheet_name) + "!";
    std::string out = "'";
    for (char c : sheet_name) {
        out += c;
        if (c == '\'') out += '\'';
    }
    out += "'!";
    return out;
}

CellAddress parse_address(std::string_view text) {
    CellAddress addr;
    std::string_view rest = text;

    if (auto bang = rest.rfind('!'); bang != std::string_view::npos) {
        std::string_view prefix = rest.substr(0, bang);
        rest = rest.substr(bang + 1);
        if (prefix.size() >= 2 && prefix.front() == '\'' && prefix.back() == '\'') {
            std::string name;
            std::string_view inner = prefix.substr(1, prefix.size() - 2);
            for (std::size_t i = 0; i < inner.size(); ++i) {
                if (inner[i] == '\'') {
                    if (i + 1 < inner.size() && inner[i + 1] == '\'') {
                        name += '\'';
                        ++i;
                        continue;
                    }
                    throw AddressError("unescaped quote in sheet name: " + std::string(text));
                }
                name += inner[i];
            }
            addr.sheet_name = std::move(name);
        } else {
            if (prefix.find_first_of("' []:*?/\\") != std::string_view::npos)
                throw AddressError("sheet name must be quoted: " + std::string(text));
            addr.sheet_name = std::string(prefix);
        }
        if (addr.sheet_name.empty() || addr.sheet_name.size() > kMaxSheetNameLength)
            throw AddressError("bad sheet name: " + std::string(text));
    }

    std::size_t i = 0;
    if (i < rest.size() && rest[i] == '$') {
        addr.col_absolute = true;
        ++i;
    }
    std::size_t letters_start = i;
    while (i < rest.size() && is_alpha(rest[i])) ++i;
    addr.column = column_from_letters(rest.substr(letters_start, i - letters_start));
    if (addr.column == 0) throw AddressError("bad column in: " + std::string(text));

    if (i < rest.size() && rest[i] == '$') {
        addr.row_absolute = true;
        ++i;
    }
    std::size_t digits_start = i;
    std::uint64_t row = 0;
    while (i < rest.size() && is_digit(rest[i])) {
        row = row * 10 + static_cast<std::uint64_t>(rest[i] - '0');
        if (row > kMaxRows) throw AddressError("row out of range: " + std::string(text));
        ++i;
    }
    if (i == digits_start || i != rest.size() || row == 0 || rest[digits_start] == '0')
        throw AddressError("bad row in: " + std::string(text));
    addr.row = static_cast<std::uint32_t>(row);
    return addr;
}

std::string render_address(const CellAddress& address) {
    std::string out = render_sheet_prefix(address.sheet_name);
    if (address.col_absolute) out += '$';
    out += column_to_letters(address.column);
    if (address.row_absolute) out += '$';
    out += std::to_string(address.row);
    return out;
}

}  // namespace ssaudit
