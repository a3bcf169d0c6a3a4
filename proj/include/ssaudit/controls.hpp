#pragma once

#include "ssaudit/classify.hpp"
#include "ssaudit/config.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ssaudit {

enum class VerdictValue { Yes, No, YesWaived };
/// "yes", "no", "yes_waived".
std::string_view verdict_key(VerdictValue v);
std::optional<VerdictValue> parse_verdict_key(std::string_view key);

enum class EvidenceKind {
    NoCheckCells,
    CircularCheck,
    BrokenLinkCheck,
    MissingOutputCheck,
    MissingInputCheck,
    HiddenData,
    UnlabeledRegion,
    MixedInputCalc,
    OrphanRegion,
    BuriedConstant,
    UnparsedFormula,
};
std::string_view evidence_kind_name(EvidenceKind kind);
std::optional<EvidenceKind> parse_evidence_kind(std::string_view name);

/// One defect. `locus` is a cell ("Data!B7"), a region ("Data!A1:F20"), a
/// hidden row/column/sheet identifier, or "workbook".
struct Evidence {
    EvidenceKind kind = EvidenceKind::NoCheckCells;
    std::string locus;
    std::string excerpt;
    std::string detail;
    bool operator==(const Evidence&) const = default;
};

struct WaiverCitation {
    std::string sub_rule;
    std::string file_pattern;
    std::string justification;
    bool operator==(const WaiverCitation&) const = default;
};

struct Verdict {
    VerdictValue value = VerdictValue::Yes;
    std::vector<Evidence> evidence;
    std::vector<WaiverCitation> waivers;   // non-empty exactly when value is YesWaived
    bool operator==(const Verdict&) const = default;
};

/// Everything the three controls look at, computed once per workbook.
struct WorkbookAnalysis {
    FormulaTable formulas;
    DependencyGraph graph;
    std::vector<std::vector<CellAddress>> cycles;
    std::vector<BrokenLink> broken;
    CellClasses classes;   // check cells already marked
    std::vector<Region> regions;
    std::vector<CheckCellFinding> findings;
};

WorkbookAnalysis analyze_workbook(const WorkbookModel& model, const ControlConfig& config = {});

/// `notes` (optional) collects non-verdict remarks such as inadequate extra
/// checks and criteria that do not apply.
Verdict check_data_validity(const WorkbookModel& model, const WorkbookAnalysis& analysis,
                            const ControlConfig& config = {}, std::vector<std::string>* notes = nullptr);

Verdict check_placement_labels(const WorkbookModel& model, const WorkbookAnalysis& analysis,
                               const ControlConfig& config = {}, std::vector<std::string>* notes = nullptr);

Verdict check_display_constants(const WorkbookModel& model, const FormulaTable& formulas,
                                const ControlConfig& config = {});
Verdict check_display_constants(const WorkbookModel& model, const ControlConfig& config = {});

struct WorkbookReport {
    std::string path;
    std::optional<std::string> creation_date;
    std::size_t occupied_cells = 0;
    std::size_t calculation_cells = 0;
    std::map<ControlId, Verdict> verdicts;   // all three, unless `error` is set
    std::vector<std::string> warnings;
    std::optional<std::string> error;

    bool operator==(const WorkbookReport&) const = default;

    bool compliant(ControlId id) const;
};

WorkbookReport audit_workbook(const WorkbookModel& model, const ControlConfig& config = {});

/// Loads and audits one file. Load failures come back as a report whose
/// `error` is set; this never throws for bad input files.
WorkbookReport audit_file(const std::filesystem::path& path, const ControlConfig& config = {});

}  // namespace ssaudit
