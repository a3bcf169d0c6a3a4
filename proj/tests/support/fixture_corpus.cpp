#include "fixture_corpus.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ssaudit::fixtures {

namespace {

constexpr VerdictValue Y = VerdictValue::Yes;
constexpr VerdictValue N = VerdictValue::No;
constexpr VerdictValue W = VerdictValue::YesWaived;

std::vector<FixtureSpec> make_specs() {
    std::vector<FixtureSpec> v;
    auto add = [&](FixtureSpec s) { v.push_back(std::move(s)); return &v.back(); };

    FixtureSpec* s = add({"fs-1-cash-flow-1.xlsx", "Cash Flow (1 of 2)", 'A', 2008, 4146, 1427});
    s->hidden_row = true;
    s->expected = {N, N, Y};

    s = add({"fs-2-cash-flow-2.xlsx", "Cash Flow (2 of 2)", 'A', 2003, 2146, 1637});
    s->input_check = true;
    s->unlabeled_block = true;
    s->expected = {N, N, Y};

    s = add({"fs-3-consolidated-statements.xlsx", "Consolidated Financial Statements", 'A', 2008, 21684, 41});
    s->input_check = true;
    s->very_hidden_sheet = true;
    s->waive_output_check = true;
    s->expected = {W, N, Y};

    s = add({"fs-4-equity-rollforward.xlsx", "Equity Rollforward", 'A', 2005, 1924, 1334});
    s->input_check = s->output_check = true;
    s->output_defect = OutputDefect::Circular;
    s->orphan_block = true;
    s->expected = {N, N, Y};

    s = add({"fs-5-other-financials-1.xlsx", "Other Financials Document #1", 'A', 2004, 1436, 1085});
    s->unstyled_inputs = true;
    s->buried_constants = true;
    s->expected = {N, N, N};

    s = add({"fs-6-trial-balance.xlsx", "Trial Balance", 'A', 2005, 301787, 284374});
    s->input_check = s->output_check = true;
    s->expected = {Y, Y, Y};

    s = add({"fs-7-other-financials-2.xlsx", "Other Financials Document #2", 'A', 2007, 307, 38});
    s->input_check = s->output_check = true;
    s->output_defect = OutputDefect::BrokenExternal;
    s->hidden_column = true;
    s->buried_constants = true;
    s->expected = {N, N, N};

    s = add({"fs-8-10q-filing.xlsx", "Financial Statement for 10Q Filing", 'A', 2005, 1329, 283});
    s->output_check = true;
    s->expected = {N, Y, Y};

    s = add({"mf-1-average-shares.xlsx", "Average Shares Outstanding", 'B', 2000, 56500, 38500});
    s->input_check = s->output_check = true;
    s->output_defect = OutputDefect::CachedRefError;
    s->expected = {N, Y, Y};

    s = add({"mf-2-lease-amortization.xlsx", "Lease Amortization", 'B', 2006, 420834, 122040});
    s->input_check = s->output_check = true;
    s->expected = {Y, Y, Y};

    s = add({"mf-3-inventory-reserve-1.xlsx", "Inventory Reserve (1 of 4)", 'B', 1997, 2523, 883});
    s->unlabeled_block = true;
    s->buried_constants = true;
    s->expected = {N, N, N};

    s = add({"mf-4-inventory-reserve-2.xlsx", "Inventory Reserve (2 of 4)", 'B', 1999, 2178, 1590});
    s->input_check = s->output_check = true;
    s->orphan_block = true;
    s->buried_constants = true;
    s->expected = {Y, N, N};

    s = add({"mf-5-inventory-reserve-3.xlsx", "Inventory Reserve (3 of 4)", 'B', 1999, 106, 65});
    s->hidden_row = true;
    s->buried_constants = true;
    s->expected = {N, N, N};

    s = add({"mf-6-inventory-reserve-4.xlsx", "Inventory Reserve (4 of 4)", 'B', 1999, 1179, 259});
    s->input_check = true;
    s->unstyled_inputs = true;
    s->buried_constants = true;
    s->expected = {N, N, N};
    return v;
}

std::string col(std::size_t c) { return column_to_letters(static_cast<std::uint32_t>(c)); }
std::string at(std::size_t c, std::size_t r) { return col(c) + std::to_string(r); }

/// Counts what goes into the workbook so tests can cross-check the loader.
struct Writer {
    SheetBuilder* sheet;
    std::size_t* occupied;
    std::size_t* calculation;

    void text(const std::string& ref, std::string v, std::uint32_t style = 0) {
        sheet->text(ref, std::move(v), style);
        ++*occupied;
    }
    void number(const std::string& ref, double v, std::uint32_t style = 0) {
        sheet->number(ref, v, style);
        ++*occupied;
    }
    void formula(const std::string& ref, std::string f, CellValue cached = {}) {
        sheet->formula(ref, std::move(f), std::move(cached));
        ++*occupied;
        ++*calculation;
    }
};

}  // namespace

const std::vector<FixtureSpec>& corpus_fixtures() {
    static const std::vector<FixtureSpec> specs = make_specs();
    return specs;
}

BuiltFixture build_fixture(const FixtureSpec& spec) {
    BuiltFixture out;
    XlsxBuilder& b = out.builder;
    b.created(std::to_string(spec.year) + "-03-01T09:00:00Z");

    const std::uint32_t bold = b.style(CellStyle{"", "", true});
    const std::uint32_t blue = b.style(CellStyle{"FFDDEBF7", "FF0000FF", false});
    const std::uint32_t input_style = spec.unstyled_inputs ? 0 : blue;

    const bool checks = spec.input_check || spec.output_check;
    const std::size_t fixed_occupied = 1 + (spec.buried_constants ? 0 : 3) + (checks ? 1 : 0) + 4 * spec.input_check +
                                       2 * spec.output_check + 3 + 3 + 8 * spec.unlabeled_block + 7 * spec.orphan_block +
                                       2 * spec.very_hidden_sheet;
    const std::size_t fixed_calcs = 2 + spec.input_check + spec.output_check + spec.unlabeled_block;
    if (spec.calculation < fixed_calcs || spec.occupied < fixed_occupied + spec.calculation - fixed_calcs + 2)
        throw std::logic_error("fixture counts too small for its layout: " + spec.file);

    const std::size_t body_calcs = spec.calculation - fixed_calcs;
    const std::size_t rest = spec.occupied - fixed_occupied - body_calcs;   // row labels + inputs
    std::size_t n = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(spec.occupied))));
    n = std::clamp<std::size_t>(n, 1, rest - 1);
    const std::size_t inputs = rest - n;
    const std::size_t m = (inputs + n - 1) / n;
    const std::size_t k = std::max<std::size_t>(1, (body_calcs + n - 1) / n);
    out.rows = n;
    out.inputs = inputs;
    out.body_calcs = body_calcs;

    b.sheet("Summary");
    b.sheet("Data");   // sheets live in a vector: take references only once both exist
    SheetBuilder& summary = b.sheet("Summary");
    SheetBuilder& data = b.sheet("Data");
    Writer sw{&summary, &out.tally_occupied, &out.tally_calculation};
    Writer dw{&data, &out.tally_occupied, &out.tally_calculation};

    const std::size_t first_input = 2, calc0 = 2 + m, last_row = n + 1, total_row = n + 2;
    const std::string factor = spec.buried_constants ? "0.35" : "Summary!$B$4";

    sw.text("A1", spec.title, bold);
    if (!spec.buried_constants) {
        sw.text("A3", "Assumptions", bold);
        sw.text("A4", "Scaling factor");
        sw.number("B4", 1.05, blue);
    }

    dw.text("A1", "Item", bold);
    dw.text(at(first_input, 1), "Inputs", bold);
    dw.text(at(calc0, 1), "Calculations", bold);
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t row = r + 2;
        dw.text(at(1, row), "Line " + std::to_string(r + 1));
        const std::size_t in_here = std::min(m, inputs > r * m ? inputs - r * m : 0);
        for (std::size_t j = 0; j < in_here; ++j)
            dw.number(at(first_input + j, row), static_cast<double>((r * m + j) % 97 + 2), input_style);
        const std::size_t calc_here = std::min(k, body_calcs > r * k ? body_calcs - r * k : 0);
        for (std::size_t j = 0; j < calc_here; ++j) {
            std::string f = j == 0 ? "SUM(" + at(first_input, row) + ":" + at(first_input + m - 1, row) + ")*" + factor
                                   : at(calc0 + j - 1, row) + "*" + factor;
            dw.formula(at(calc0 + j, row), std::move(f));
        }
    }
    dw.text(at(1, total_row), "Total");
    dw.formula(at(first_input, total_row), "SUM(" + at(first_input, 2) + ":" + at(first_input, last_row) + ")");
    std::string total = "SUM(" + at(calc0, 2) + ":" + at(calc0, last_row) + ")";
    if (spec.output_defect == OutputDefect::BrokenExternal) total += "+[Gone.xlsx]Ledger!$A$1";
    dw.formula(at(calc0, total_row), total);

    if (checks) sw.text("A7", "Checks", bold);
    if (spec.input_check) {
        const std::size_t filled_rows = std::min(n, (inputs + m - 1) / m);
        sw.text("A8", "Control count");
        sw.number("B8", static_cast<double>(filled_rows), blue);
        sw.text("A9", "Input count check");
        sw.formula("B9", "COUNT(Data!" + at(first_input, 2) + ":" + at(first_input, last_row) + ")=B8");
    }
    if (spec.output_check) {
        const std::string column_sum = "SUM(Data!" + at(calc0, 2) + ":" + at(calc0, last_row) + ")";
        sw.text("A10", "Output total check");
        switch (spec.output_defect) {
            case OutputDefect::Circular: sw.formula("B10", column_sum + "-B10"); break;
            case OutputDefect::CachedRefError:
                sw.formula("B10", column_sum + "-Data!" + at(calc0, total_row), ErrorCode::Ref);
                break;
            default: sw.formula("B10", column_sum + "-Data!" + at(calc0, total_row), 0.0); break;
        }
    }
    if (spec.unlabeled_block) {
        for (const char* ref : {"D3", "E3", "D4", "E4", "D5", "E5"}) sw.number(ref, 250.0);
        sw.text("A12", "Other total");
        sw.formula("B12", "SUM(D3:E5)+Data!" + at(calc0, total_row));
    }
    if (spec.orphan_block) {
        sw.text("G3", "Prior year (stale)", bold);
        for (int i = 0; i < 3; ++i) {
            sw.text("G" + std::to_string(4 + i), "Old line " + std::to_string(i + 1));
            sw.number("H" + std::to_string(4 + i), 100.0 * (i + 1));
        }
    }
    if (spec.very_hidden_sheet) {
        SheetBuilder& old = b.sheet("Old");
        old.visibility(SheetVisibility::VeryHidden);
        Writer ow{&old, &out.tally_occupied, &out.tally_calculation};
        ow.text("A1", "Archive", bold);
        ow.number("A2", 1999.0);
    }
    if (spec.hidden_row) b.sheet("Data").hide_row(3);
    if (spec.hidden_column) b.sheet("Data").hide_column(static_cast<std::uint32_t>(first_input));
    return out;
}

std::string corpus_config_json() {
    return R"({
  "waivers": [
    {
      "file_pattern": "*consolidated*",
      "control": "data_validity",
      "sub_rule": "output_check",
      "justification": "Consolidation only restates audited subsidiary totals; reviewers accepted input checks alone."
    }
  ]
}
)";
}

ControlConfig corpus_config() { return parse_config(corpus_config_json()); }

std::vector<std::filesystem::path> write_corpus(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> paths;
    for (const FixtureSpec& spec : corpus_fixtures()) {
        auto path = dir / spec.file;
        build_fixture(spec).builder.save(path);
        paths.push_back(path);
    }
    return paths;
}

}  // namespace ssaudit::fixtures
