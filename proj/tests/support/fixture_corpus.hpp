#pragma once

// Authored stand-ins for the fourteen finance workbooks whose counts and
// verdicts the acceptance suite reproduces.

#include "xlsx_builder.hpp"

#include "ssaudit/controls.hpp"

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace ssaudit::fixtures {

enum class OutputDefect { None, Circular, BrokenExternal, CachedRefError };

struct FixtureSpec {
    std::string file;       // e.g. "fs-04-equity-rollforward.xlsx"
    std::string title;
    char group = 'A';       // 'A' financial services, 'B' manufacturing
    int year = 2000;
    std::size_t occupied = 0;
    std::size_t calculation = 0;

    bool input_check = false;
    bool output_check = false;
    OutputDefect output_defect = OutputDefect::None;
    bool buried_constants = false;
    bool hidden_row = false;
    bool hidden_column = false;
    bool very_hidden_sheet = false;
    bool unstyled_inputs = false;
    bool orphan_block = false;
    bool unlabeled_block = false;
    bool waive_output_check = false;

    std::array<VerdictValue, 3> expected{};   // data validity, placement, constants
};

const std::vector<FixtureSpec>& corpus_fixtures();

/// Body dimensions the builder chose, plus its own tally of what it wrote.
struct BuiltFixture {
    XlsxBuilder builder;
    std::size_t rows = 0, inputs = 0, body_calcs = 0;
    std::size_t tally_occupied = 0, tally_calculation = 0;
};

BuiltFixture build_fixture(const FixtureSpec& spec);

/// Config carrying the waiver the corpus needs.
ControlConfig corpus_config();
std::string corpus_config_json();

/// Writes every fixture into `dir` (created if needed); returns the paths in table order.
std::vector<std::filesystem::path> write_corpus(const std::filesystem::path& dir);

}  // namespace ssaudit::fixtures
