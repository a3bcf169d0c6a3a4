#include "ssaudit/address.hpp"

#include <doctest.h>

#include <random>

using namespace ssaudit;

TEST_CASE("column letters use bijective base 26") {
    CHECK(column_from_letters("A") == 1);
    CHECK(column_from_letters("Z") == 26);
    CHECK(column_from_letters("AA") == 27);
    CHECK(column_from_letters("az") == 52);
    CHECK(column_from_letters("XFD") == kMaxColumns);
    CHECK(column_from_letters("XFE") == 0);
    CHECK(column_from_letters("") == 0);
    CHECK(column_from_letters("A1") == 0);
    for (std::uint32_t c = 1; c <= kMaxColumns; ++c) REQUIRE(column_from_letters(column_to_letters(c)) == c);
}

TEST_CASE("parse_address decodes A1 notation") {
    auto a = parse_address("A1");
    CHECK(a.column == 1);
    CHECK(a.row == 1);
    CHECK_FALSE(a.col_absolute);
    CHECK(a.sheet_name.empty());

    auto b = parse_address("$B$3");
    CHECK(b.column == 2);
    CHECK(b.row == 3);
    CHECK(b.col_absolute);
    CHECK(b.row_absolute);

    auto c = parse_address("Sheet1!AA10");
    CHECK(c.sheet_name == "Sheet1");
    CHECK(c.column == 27);
    CHECK(c.row == 10);

    auto d = parse_address("'My ''odd'' sheet'!c$7");
    CHECK(d.sheet_name == "My 'odd' sheet");
    CHECK(d.column == 3);
    CHECK(d.row_absolute);
    CHECK_FALSE(d.col_absolute);
}

TEST_CASE("parse_address rejects malformed text") {
    for (const char* bad : {"", "1A", "A0", "A", "12", "XFE1", "A1048577", "Sheet1!", "!A1", "A1B", "$$A1", "A-1"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS(parse_address(bad), AddressError);
    }
}

TEST_CASE("render is the uppercase canonical form") {
    CHECK(render_address(parse_address("b$2")) == "B$2");
    CHECK(render_address(parse_address("'Q1 Plan'!$xfd1048576")) == "'Q1 Plan'!$XFD1048576");
    CHECK(render_address(parse_address("'A1'!B2")) == "'A1'!B2");
}

TEST_CASE("parse and render are inverse on random addresses") {
    std::mt19937 rng(17);
    const char* sheets[] = {"", "Data", "My Sheet", "it's", "Q1", "x.y", "2024", "R1C1"};
    for (int i = 0; i < 5000; ++i) {
        CellAddress a;
        a.sheet_name = sheets[rng() % std::size(sheets)];
        a.column = 1 + rng() % kMaxColumns;
        a.row = 1 + rng() % kMaxRows;
        a.col_absolute = rng() % 2;
        a.row_absolute = rng() % 2;
        const std::string text = render_address(a);
        CAPTURE(text);
        REQUIRE(parse_address(text) == a);
    }
}

TEST_CASE("location ordering is sheet, row, column") {
    CHECK(compare_locations(parse_address("S!B1"), parse_address("S!A2")) < 0);
    CHECK(compare_locations(parse_address("S!A2"), parse_address("S!B2")) < 0);
    CHECK(compare_locations(parse_address("$A$1"), parse_address("A1")) == 0);
    CHECK(iequals("Sheet1", "SHEET1"));
    CHECK_FALSE(iequals("Sheet1", "Sheet10"));
}
