#include "ssaudit/cli.hpp"

#include "ssaudit/scanner.hpp"
#include "ssaudit/xlsx_reader.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <ostream>

namespace ssaudit {

namespace {

constexpr int kExitUsage = 3;

std::string_view criteria_text(ControlId id) {
    switch (id) {
        case ControlId::DataValidity:
            return R"(Data Validity Checks

A check cell is a formula whose shape is one of:
  difference   SUM/SUBTOTAL/COUNT/COUNTA result or calculated cell minus another
  comparison   two non-literal operands joined by = <> < <= > >=
  status-if    IF(<difference|comparison|tolerance test>, short literal, short literal)
  magnitude    ABS(...) or ROUND(...) around a difference
and that is corroborated by a nearby label containing a check keyword
(within label_distance cells to the left or above) or by references into
two or more separate blocks.

A check targets calculated output when it reads a formula cell directly,
otherwise it targets inputs. A check is inadequate when it depends, at any
depth, on a circular chain or on a broken reference.

YES      every needed kind of check has at least one adequate check cell:
         an input check when the workbook has input cells, an output check
         when it has calculation cells.
NO       NoCheckCells, MissingInputCheck, MissingOutputCheck, CircularCheck,
         BrokenLinkCheck.
YES*     every failing sub-rule (input_check, output_check) is waived.
)";
        case ControlId::PlacementLabels:
            return R"(Clear Data Placement and Labels

YES when all of these hold:
  hidden_data       no hidden sheet, row or column holds an occupied cell
  header_labels     every block of two or more cells holding data has a top
                    row or left column that is at least header_label_threshold
                    text labels
  mixed_input_calc  a block mixing inputs and formulas formats them
                    differently (style_family_threshold of each share one
                    fill/font-colour/bold family, and the two families differ)
  orphan_region     no block outside the dependency structure while other
                    blocks take part in it (when orphan_fails_verdict)
NO       HiddenData, UnlabeledRegion, MixedInputCalc, OrphanRegion.
YES*     every failing sub-rule is waived.
)";
        case ControlId::DisplayConstants:
            return R"(Display of Constants

Every numeric literal inside every formula is a candidate, except values in
constant_whitelist (default -1, 0, 1) and arguments listed in
exempt_function_args (ROUND digits, lookup column index, MATCH type, INDEX
row/column, ...).

YES      candidates <= max_buried_constants (default 0).
NO       one BuriedConstant item per candidate, quoting the literal as written.
YES*     sub-rule buried_constants is waived.
)";
    }
    return {};
}

std::optional<ControlId> control_from_arg(std::string name) {
    for (char& c : name) c = c == '-' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (auto id = parse_control_key(name)) return id;
    if (name == "datavalidity" || name == "validity") return ControlId::DataValidity;
    if (name == "placementlabels" || name == "placement" || name == "labels") return ControlId::PlacementLabels;
    if (name == "displayconstants" || name == "constants") return ControlId::DisplayConstants;
    return std::nullopt;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Static controls audit for XLSX workbooks", "ssaudit"};
    app.require_subcommand(1);

    auto* scan_cmd = app.add_subcommand("scan", "Audit workbooks and directories of workbooks");
    std::vector<std::string> paths;
    std::string config_path, format_name = "text", out_path;
    unsigned jobs = 0;
    scan_cmd->add_option("paths", paths, "Files or directories")->required();
    scan_cmd->add_option("--config", config_path, "Control configuration (JSON)");
    scan_cmd->add_option("--format", format_name, "text, json or csv")->check(CLI::IsMember({"text", "json", "csv"}));
    scan_cmd->add_option("--out", out_path, "Write the report here instead of stdout");
    scan_cmd->add_option("--jobs", jobs, "Worker threads (0 = one per CPU)");

    auto* metrics_cmd = app.add_subcommand("metrics", "Print occupied and calculation cell counts");
    std::string metrics_path;
    metrics_cmd->add_option("file", metrics_path, "Workbook")->required();

    auto* explain_cmd = app.add_subcommand("explain", "Print the criteria applied for one control");
    std::string control_name;
    explain_cmd->add_option("control", control_name, "data_validity, placement_labels or display_constants")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : kExitUsage;
    }

    if (*explain_cmd) {
        auto id = control_from_arg(control_name);
        if (!id) {
            err << "ssaudit: unknown control '" << control_name << "'\n";
            return kExitUsage;
        }
        out << criteria_text(*id);
        return 0;
    }

    if (*metrics_cmd) {
        try {
            WorkbookModel model = load_workbook(metrics_path);
            out << metrics_path << "\n"
                << "occupied_cells: " << occupied_cells(model) << "\n"
                << "calculation_cells: " << calculation_cells(model) << "\n";
            return 0;
        } catch (const LoadError& e) {
            err << "ssaudit: " << metrics_path << ": " << e.what() << "\n";
            return 2;
        }
    }

    ControlConfig config;
    try {
        if (config_path.empty()) {
            if (const char* env = std::getenv("SSAUDIT_CONFIG"); env && *env) config_path = env;
        }
        if (!config_path.empty()) config = load_config(config_path);
    } catch (const ConfigError& e) {
        err << "ssaudit: " << e.what() << "\n";
        return kExitUsage;
    }

    ScanResult result = scan(paths, config, jobs);
    for (const auto& r : result.reports)
        if (r.error) err << "ssaudit: " << r.path << ": " << *r.error << "\n";
    std::string document = render_report(result, *parse_report_format(format_name));
    if (out_path.empty()) {
        out << document;
    } else {
        std::ofstream file(out_path, std::ios::binary);
        file << document;
        if (!file) {
            err << "ssaudit: cannot write " << out_path << "\n";
            return kExitUsage;
        }
    }
    return scan_exit_code(result);
}

}  // namespace ssaudit
