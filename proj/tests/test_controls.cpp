#include "model_helpers.hpp"
#include "fixture_corpus.hpp"

#include "ssaudit/controls.hpp"

#include <doctest.h>

#include <random>

using namespace ssaudit;
using namespace ssaudit::fixtures;

namespace {

std::vector<EvidenceKind> kinds(const Verdict& v) {
    std::vector<EvidenceKind> out;
    for (const auto& e : v.evidence) out.push_back(e.kind);
    return out;
}

Verdict data_validity(const WorkbookModel& m, const ControlConfig& config = {}, std::vector<std::string>* notes = nullptr) {
    return check_data_validity(m, analyze_workbook(m, config), config, notes);
}

Verdict placement(const WorkbookModel& m, const ControlConfig& config = {}, std::vector<std::string>* notes = nullptr) {
    return check_placement_labels(m, analyze_workbook(m, config), config, notes);
}

/// Inputs in B, a labelled hash-total check and a labelled cross-foot check.
XlsxBuilder checked_book(bool with_output_check) {
    XlsxBuilder b;
    std::uint32_t blue = b.style(CellStyle{"FFDDEBF7", "FF0000FF", false});
    auto& s = b.sheet("Ledger");
    s.text("A1", "Account").text("B1", "Amount").text("C1", "Adjusted");
    for (int r = 2; r <= 6; ++r) {
        const std::string row = std::to_string(r);
        s.text("A" + row, "Acct " + row).number("B" + row, r * 100, blue).formula("C" + row, "B" + row + "*Rate");
    }
    s.text("A7", "Total").formula("B7", "SUM(B2:B6)").formula("C7", "SUM(C2:C6)");
    s.text("E1", "Rate").number("F1", 1.1, blue);
    s.text("E3", "Record count").number("F3", 5, blue);
    s.text("E4", "Count check").formula("F4", "COUNT(B2:B6)=F3");
    if (with_output_check) s.text("E5", "Total check").formula("F5", "SUM(C2:C6)-C7");
    b.defined_name("Rate", "Ledger!$F$1");
    return b;
}

ControlConfig waive(std::string pattern, ControlId control, std::string sub_rule) {
    ControlConfig c;
    c.waivers.push_back(Waiver{std::move(pattern), control, std::move(sub_rule), "accepted by reviewer"});
    return c;
}

FixtureSpec scaled(std::string_view title, std::size_t occupied, std::size_t calculation) {
    for (FixtureSpec s : corpus_fixtures()) {
        if (s.title == title) {
            s.occupied = occupied;
            s.calculation = calculation;
            return s;
        }
    }
    throw std::logic_error("no fixture titled " + std::string(title));
}

}  // namespace

TEST_CASE("data validity: both checks present") {
    auto m = load(checked_book(true));
    auto a = analyze_workbook(m);
    REQUIRE(a.findings.size() == 2);
    auto v = check_data_validity(m, a);
    CHECK(v.value == VerdictValue::Yes);
    CHECK(v.evidence.empty());
}

TEST_CASE("data validity: input check only") {
    auto m = load(checked_book(false), "books/ledger.xlsx");
    auto v = data_validity(m);
    CHECK(v.value == VerdictValue::No);
    CHECK(kinds(v) == std::vector{EvidenceKind::MissingOutputCheck});
    CHECK(v.evidence[0].locus == "workbook");

    auto waived = data_validity(m, waive("ledger*.xlsx", ControlId::DataValidity, "output_check"));
    CHECK(waived.value == VerdictValue::YesWaived);
    REQUIRE(waived.waivers.size() == 1);
    CHECK(waived.waivers[0].sub_rule == "output_check");
    CHECK(waived.evidence == v.evidence);

    CHECK(data_validity(m, waive("*/other.xlsx", ControlId::DataValidity, "output_check")).value == VerdictValue::No);
    CHECK(data_validity(m, waive("*", ControlId::DataValidity, "input_check")).value == VerdictValue::No);
    CHECK(data_validity(m, waive("*", ControlId::PlacementLabels, "hidden_data")).value == VerdictValue::No);
}

TEST_CASE("data validity: no checks at all") {
    XlsxBuilder b;
    b.sheet("S").text("A1", "Qty").number("A2", 2).formula("A3", "A2*3");
    auto v = data_validity(load(b));
    CHECK(v.value == VerdictValue::No);
    CHECK(kinds(v) == std::vector{EvidenceKind::NoCheckCells});
}

TEST_CASE("data validity: inadequate checks") {
    XlsxBuilder b;
    auto& s = b.sheet("S");
    s.text("A1", "Qty").number("A2", 2).number("A3", 3).formula("A4", "SUM(A2:A3)+A5").formula("A5", "A4/2");
    s.text("C1", "Count check").number("C2", 2).formula("D2", "COUNT(A2:A3)=C2");
    s.text("C4", "Total check").formula("D4", "SUM(A2:A3)-A4");
    auto m = load(b);
    auto v = data_validity(m);
    CHECK(v.value == VerdictValue::No);
    REQUIRE(kinds(v) == std::vector{EvidenceKind::CircularCheck});
    CHECK(v.evidence[0].locus == "S!D4");
    CHECK(v.evidence[0].excerpt == "SUM(A2:A3)-A4");

    XlsxBuilder broken;
    auto& t = broken.sheet("S");
    t.text("A1", "Qty").number("A2", 2).number("A3", 3).formula("A4", "SUM(A2:A3)+[9]X!A1");
    t.text("C1", "Count check").number("C2", 2).formula("D2", "COUNT(A2:A3)=C2");
    t.text("C4", "Total check").formula("D4", "SUM(A2:A3)-A4");
    auto bv = data_validity(load(broken));
    CHECK(kinds(bv) == std::vector{EvidenceKind::BrokenLinkCheck});
}

TEST_CASE("data validity: an inadequate extra check is only a note") {
    XlsxBuilder b = checked_book(true);
    b.sheet("Ledger").formula("H1", "H1+1").text("G3", "Loop check").formula("H3", "SUM(C2:C6)-H1");
    std::vector<std::string> notes;
    auto v = data_validity(load(b), {}, &notes);
    CHECK(v.value == VerdictValue::Yes);
    REQUIRE(notes.size() == 1);
    CHECK(notes[0].find("Ledger!H3") != std::string::npos);
}

TEST_CASE("data validity: vacuous criteria") {
    XlsxBuilder labels;
    labels.sheet("S").text("A1", "just notes");
    std::vector<std::string> notes;
    CHECK(data_validity(load(labels), {}, &notes).value == VerdictValue::Yes);
    CHECK(notes.size() == 2);

    XlsxBuilder empty;
    empty.sheet("Sheet1");
    auto r = audit_workbook(load(empty));
    for (ControlId id : kAllControls) CHECK(r.verdicts.at(id).value == VerdictValue::Yes);
}

TEST_CASE("placement: hidden data fails") {
    XlsxBuilder b;
    b.sheet("S").text("A1", "Item").text("B1", "Value").text("A2", "x").number("B2", 1).hide_row(2);
    auto v = placement(load(b));
    CHECK(v.value == VerdictValue::No);
    REQUIRE(kinds(v) == std::vector{EvidenceKind::HiddenData});
    CHECK(v.evidence[0].locus == "S!2");
}

TEST_CASE("placement: a labelled table with styled inputs passes") {
    CHECK(placement(load(checked_book(true))).value == VerdictValue::Yes);
}

TEST_CASE("placement: unlabeled, mixed and orphan blocks") {
    XlsxBuilder b;
    auto& s = b.sheet("S");
    s.number("A1", 1).number("A2", 2).formula("A3", "A1+A2");
    s.text("D1", "Last year").text("D2", "Q1").number("E2", 5);
    auto v = placement(load(b));
    CHECK(v.value == VerdictValue::No);
    CHECK(kinds(v) == std::vector{EvidenceKind::UnlabeledRegion, EvidenceKind::MixedInputCalc, EvidenceKind::OrphanRegion});

    ControlConfig lenient;
    lenient.orphan_fails_verdict = false;
    std::vector<std::string> notes;
    auto l = placement(load(b), lenient, &notes);
    CHECK(kinds(l) == std::vector{EvidenceKind::UnlabeledRegion, EvidenceKind::MixedInputCalc});
    REQUIRE(notes.size() == 1);
    CHECK(notes[0].find("S!D1:E2") != std::string::npos);
}

TEST_CASE("display constants: the worked example") {
    XlsxBuilder buried;
    buried.sheet("S").formula("A1", "780000*.35");
    auto v = check_display_constants(load(buried));
    CHECK(v.value == VerdictValue::No);
    REQUIRE(v.evidence.size() == 2);
    CHECK(v.evidence[0].excerpt == "780000");
    CHECK(v.evidence[1].excerpt == ".35");
    CHECK(v.evidence[0].locus == "S!A1");

    XlsxBuilder refactored;
    refactored.sheet("S").text("A1", "Operating income").number("B1", 780000).text("A2", "Tax rate").number("B2", 0.35);
    refactored.sheet("S").formula("B3", "B1*B2");
    CHECK(check_display_constants(load(refactored)).value == VerdictValue::Yes);

    XlsxBuilder identity;
    identity.sheet("S").number("A1", 3).formula("A2", "A1*1-0+(-1)");
    CHECK(check_display_constants(load(identity)).value == VerdictValue::Yes);
}

TEST_CASE("display constants: exemptions, tolerance and waivers") {
    XlsxBuilder b;
    b.sheet("S").number("A1", 3.14159).formula("A2", "ROUND(A1,2)").formula("A3", "VLOOKUP(A1,B1:D9,3,FALSE)");
    CHECK(check_display_constants(load(b)).value == VerdictValue::Yes);

    XlsxBuilder some;
    some.sheet("S").number("A1", 3).formula("A2", "A1*12").formula("A3", "A1/100");
    auto m = load(some);
    CHECK(check_display_constants(m).value == VerdictValue::No);
    ControlConfig two;
    two.max_buried_constants = 2;
    CHECK(check_display_constants(m, two).value == VerdictValue::Yes);
    ControlConfig wide;
    wide.constant_whitelist = {12, 100};
    CHECK(check_display_constants(m, wide).value == VerdictValue::Yes);
    CHECK(check_display_constants(m, waive("*", ControlId::DisplayConstants, "buried_constants")).value ==
          VerdictValue::YesWaived);
}

TEST_CASE("display constants never recover by adding literals") {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        XlsxBuilder b;
        auto& s = b.sheet("S");
        s.number("A1", 2);
        const int cells = 1 + static_cast<int>(rng() % 5);
        std::vector<std::string> texts;
        for (int i = 0; i < cells; ++i) texts.push_back(rng() % 2 ? "A1*" + std::to_string(2 + rng() % 50) : "A1+1");
        for (int i = 0; i < cells; ++i) s.formula("B" + std::to_string(i + 1), texts[i]);
        CHECK(check_display_constants(load(b)).value != VerdictValue::YesWaived);

        XlsxBuilder more;
        auto& t = more.sheet("S");
        t.number("A1", 2);
        for (int i = 0; i < cells; ++i) t.formula("B" + std::to_string(i + 1), texts[i] + (i == 0 ? "*7" : ""));
        auto after = check_display_constants(load(more)).value;
        CHECK(after == VerdictValue::No);
    }
}

TEST_CASE("scaled corpus rows keep their verdicts") {
    auto lease = build_fixture(scaled("Lease Amortization", 400, 120));
    auto lr = audit_workbook(load(lease.builder, "lease.xlsx"));
    CHECK(lr.occupied_cells == 400);
    CHECK(lr.calculation_cells == 120);
    for (ControlId id : kAllControls) CHECK(lr.verdicts.at(id).value == VerdictValue::Yes);

    auto inventory = build_fixture(scaled("Inventory Reserve (1 of 4)", 300, 90));
    auto ir = audit_workbook(load(inventory.builder, "inventory.xlsx"));
    for (ControlId id : kAllControls) CHECK(ir.verdicts.at(id).value == VerdictValue::No);
}

TEST_CASE("evidence is sound and audits are repeatable") {
    for (const FixtureSpec& spec : corpus_fixtures()) {
        if (spec.occupied > 5000) continue;
        CAPTURE(spec.title);
        auto m = load(build_fixture(spec).builder, spec.file);
        auto r = audit_workbook(m, corpus_config());
        CHECK(r == audit_workbook(m, corpus_config()));
        for (const auto& [id, v] : r.verdicts) {
            if (v.value == VerdictValue::No) CHECK_FALSE(v.evidence.empty());
            if (v.value == VerdictValue::YesWaived) CHECK_FALSE(v.waivers.empty());
            for (const auto& e : v.evidence) {
                if (e.kind != EvidenceKind::BuriedConstant) continue;
                const CellAddress at = parse_address(e.locus);
                const Cell* cell = m.sheets[*m.sheet_index(at.sheet_name)].find(at.row, at.column);
                REQUIRE(cell);
                CHECK(cell->content.formula.find(e.excerpt) != std::string::npos);
            }
        }
    }
}

TEST_CASE("a waiver touches only its own verdict") {
    auto m = load(checked_book(false), "ledger.xlsx");
    auto plain = audit_workbook(m);
    auto waived = audit_workbook(m, waive("ledger.xlsx", ControlId::DataValidity, "output_check"));
    CHECK(waived.verdicts.at(ControlId::DataValidity).value == VerdictValue::YesWaived);
    CHECK(waived.verdicts.at(ControlId::PlacementLabels) == plain.verdicts.at(ControlId::PlacementLabels));
    CHECK(waived.verdicts.at(ControlId::DisplayConstants) == plain.verdicts.at(ControlId::DisplayConstants));
}

TEST_CASE("unparsed formulas become warnings") {
    XlsxBuilder b;
    b.sheet("S").number("A1", 1).formula("A2", "A1 A1").formula("A3", "Table1[Amount]");
    auto r = audit_workbook(load(b));
    REQUIRE(r.warnings.size() >= 2);
    CHECK(r.warnings[0].rfind("UnparsedFormula at S!A2", 0) == 0);
    CHECK(r.warnings[1].rfind("UnparsedFormula at S!A3", 0) == 0);
}

TEST_CASE("audit_file turns load failures into records") {
    auto r = audit_file("/nonexistent/book.xlsx");
    REQUIRE(r.error);
    CHECK(r.error->rfind("NotAZipContainer", 0) == 0);
    CHECK(r.verdicts.empty());
}

TEST_CASE("config parsing") {
    auto c = parse_config(R"({"constant_whitelist": [0, 12], "max_buried_constants": 2,
        "exempt_function_args": [{"function": "pmt", "arg": 1}],
        "check_keywords": ["proof"], "label_distance": 5, "orphan_fails_verdict": false,
        "waivers": [{"file_pattern": "*.xlsx", "control": "placement_labels", "sub_rule": "hidden_data",
                     "justification": "archive tab"}]})");
    CHECK(c.whitelisted(12));
    CHECK_FALSE(c.whitelisted(1));
    CHECK(c.exempt("PMT", 1));
    CHECK(c.checks.keywords == std::vector<std::string>{"proof"});
    CHECK(c.checks.label_distance == 5);
    CHECK_FALSE(c.orphan_fails_verdict);
    REQUIRE(c.waivers.size() == 1);
    CHECK(c.waiver_for("/x/y.xlsx", ControlId::PlacementLabels, "hidden_data"));
    CHECK_FALSE(c.waiver_for("/x/y.xlsx", ControlId::PlacementLabels, "header_labels"));

    CHECK(parse_config("{}").digest() == ControlConfig{}.digest());
    CHECK(c.digest() != ControlConfig{}.digest());
    CHECK(c.digest().rfind("sha256:", 0) == 0);
    CHECK(c.digest().size() == 7 + 64);

    for (const char* bad : {
             R"({"constant_whitelistt": [0]})",
             R"({"max_buried_constants": -1})",
             R"({"max_buried_constants": "3"})",
             R"({"waivers": [{"file_pattern": "*", "control": "data_validity", "sub_rule": "output_check", "justification": ""}]})",
             R"({"waivers": [{"file_pattern": "*", "control": "nope", "sub_rule": "output_check", "justification": "x"}]})",
             R"({"waivers": [{"file_pattern": "*", "control": "data_validity", "sub_rule": "hidden_data", "justification": "x"}]})",
             R"({"header_label_threshold": 1.5})",
             R"([1, 2])",
             R"({"constant_whitelist": [1e999]})",
             "not json",
         }) {
        CAPTURE(bad);
        CHECK_THROWS_AS(parse_config(bad), ConfigError);
    }
}
