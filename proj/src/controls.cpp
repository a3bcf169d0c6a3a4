#include "ssaudit/controls.hpp"

#include "ssaudit/xlsx_reader.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <sstream>

namespace ssaudit {

namespace {

constexpr std::array<std::pair<EvidenceKind, std::string_view>, 11> kEvidenceNames{{
    {EvidenceKind::NoCheckCells, "NoCheckCells"},
    {EvidenceKind::CircularCheck, "CircularCheck"},
    {EvidenceKind::BrokenLinkCheck, "BrokenLinkCheck"},
    {EvidenceKind::MissingOutputCheck, "MissingOutputCheck"},
    {EvidenceKind::MissingInputCheck, "MissingInputCheck"},
    {EvidenceKind::HiddenData, "HiddenData"},
    {EvidenceKind::UnlabeledRegion, "UnlabeledRegion"},
    {EvidenceKind::MixedInputCalc, "MixedInputCalc"},
    {EvidenceKind::OrphanRegion, "OrphanRegion"},
    {EvidenceKind::BuriedConstant, "BuriedConstant"},
    {EvidenceKind::UnparsedFormula, "UnparsedFormula"},
}};

constexpr std::string_view kWorkbookLocus = "workbook";

std::string format_number(double v) {
    std::ostringstream out;
    out.precision(15);
    out << v;
    return out.str();
}

const Cell* cell_at(const WorkbookModel& model, const CellKey& key) {
    return model.sheets[key.sheet].find(key.row, key.column);
}

/// Failing sub-rules with their evidence, folded into a verdict once waivers are applied.
class VerdictBuilder {
public:
    void fail(const std::string& sub_rule, Evidence e) {
        failing_.insert(sub_rule);
        evidence_.push_back(std::move(e));
    }
    void fail(const std::string& sub_rule) { failing_.insert(sub_rule); }

    Verdict finish(const WorkbookModel& model, ControlId control, const ControlConfig& config) && {
        Verdict v;
        v.evidence = std::move(evidence_);
        if (failing_.empty()) return v;
        for (const std::string& rule : failing_) {
            const Waiver* w = config.waiver_for(model.path, control, rule);
            if (!w) {
                v.value = VerdictValue::No;
                v.waivers.clear();
                return v;
            }
            v.waivers.push_back({rule, w->file_pattern, w->justification});
        }
        v.value = VerdictValue::YesWaived;
        return v;
    }

private:
    std::set<std::string> failing_;
    std::vector<Evidence> evidence_;
};

}  // namespace

std::string_view verdict_key(VerdictValue v) {
    switch (v) {
        case VerdictValue::Yes: return "yes";
        case VerdictValue::No: return "no";
        case VerdictValue::YesWaived: return "yes_waived";
    }
    return "?";
}

std::optional<VerdictValue> parse_verdict_key(std::string_view key) {
    for (VerdictValue v : {VerdictValue::Yes, VerdictValue::No, VerdictValue::YesWaived})
        if (verdict_key(v) == key) return v;
    return std::nullopt;
}

std::string_view evidence_kind_name(EvidenceKind kind) {
    for (const auto& [k, name] : kEvidenceNames)
        if (k == kind) return name;
    return "?";
}

std::optional<EvidenceKind> parse_evidence_kind(std::string_view name) {
    for (const auto& [k, n] : kEvidenceNames)
        if (n == name) return k;
    return std::nullopt;
}

WorkbookAnalysis analyze_workbook(const WorkbookModel& model, const ControlConfig& config) {
    WorkbookAnalysis a{FormulaTable::parse(model), {}, {}, {}, {}, {}, {}};
    a.graph = build_graph(model, a.formulas);
    a.cycles = find_cycles(a.graph);
    a.broken = find_broken_links(model, a.graph);
    a.classes = classify_cells(model, a.graph);
    a.regions = detect_regions(a.graph, a.classes, config.header_label_threshold);
    a.findings = detect_check_cells(model, a.graph, a.formulas, a.classes, a.regions, a.cycles, a.broken, config.checks);
    mark_check_cells(a.classes, a.findings);
    recount_classes(a.regions, a.classes);
    return a;
}

Verdict check_data_validity(const WorkbookModel& model, const WorkbookAnalysis& analysis, const ControlConfig& config,
                            std::vector<std::string>* notes) {
    const auto& classes = analysis.classes;
    const auto& findings = analysis.findings;
    bool has_inputs = std::find(classes.begin(), classes.end(), CellClass::Input) != classes.end();
    bool has_calcs = std::find(classes.begin(), classes.end(), CellClass::Calculation) != classes.end();

    auto note = [&](std::string text) {
        if (notes) notes->push_back(std::move(text));
    };
    if (!has_inputs) note("data_validity: input check criterion not applicable (no input cells)");
    if (!has_calcs) note("data_validity: output check criterion not applicable (no calculation cells)");

    auto formula_of = [&](const CheckCellFinding& f) {
        const Cell* cell = cell_at(model, analysis.graph.nodes()[f.node]);
        return cell ? cell->content.formula : std::string();
    };
    auto covered = [&](CheckTarget kind) {
        return std::any_of(findings.begin(), findings.end(),
                           [&](const CheckCellFinding& f) { return f.target_kind == kind && f.adequate(); });
    };

    VerdictBuilder out;
    struct Need {
        bool required;
        CheckTarget kind;
        const char* sub_rule;
        EvidenceKind missing;
        const char* what;
    };
    const Need needs[] = {
        {has_inputs, CheckTarget::Input, "input_check", EvidenceKind::MissingInputCheck, "input"},
        {has_calcs, CheckTarget::CalculatedOutput, "output_check", EvidenceKind::MissingOutputCheck, "calculated output"},
    };

    if (findings.empty()) {
        bool any = false;
        for (const Need& n : needs) {
            if (n.required) {
                out.fail(n.sub_rule);
                any = true;
            }
        }
        if (any) {
            out.fail(needs[has_inputs ? 0 : 1].sub_rule,
                     Evidence{EvidenceKind::NoCheckCells, std::string(kWorkbookLocus), "",
                              "no check cells found for inputs or calculated outputs"});
        }
        return std::move(out).finish(model, ControlId::DataValidity, config);
    }

    for (const Need& n : needs) {
        bool is_covered = covered(n.kind);
        for (const CheckCellFinding& f : findings) {
            if (f.target_kind != n.kind || f.adequate()) continue;
            std::string locus = render_address(f.cell);
            if (is_covered || !n.required) {
                note("data_validity: inadequate " + std::string(n.what) + " check at " + locus + " (" + f.defect_detail + ")");
                continue;
            }
            for (AdequacyDefect d : f.adequacy_defects) {
                EvidenceKind kind = d == AdequacyDefect::Circular ? EvidenceKind::CircularCheck : EvidenceKind::BrokenLinkCheck;
                out.fail(n.sub_rule, Evidence{kind, locus, formula_of(f),
                                              std::string(n.what) + " check is inadequate: " + f.defect_detail});
            }
        }
        if (n.required && !is_covered &&
            std::none_of(findings.begin(), findings.end(), [&](const CheckCellFinding& f) { return f.target_kind == n.kind; })) {
            out.fail(n.sub_rule, Evidence{n.missing, std::string(kWorkbookLocus), "",
                                          std::string("no check cell covers ") + n.what + " values"});
        }
    }
    return std::move(out).finish(model, ControlId::DataValidity, config);
}

Verdict check_placement_labels(const WorkbookModel& model, const WorkbookAnalysis& analysis, const ControlConfig& config,
                               std::vector<std::string>* notes) {
    VerdictBuilder out;
    for (const HiddenData& h : hidden_data(model)) {
        std::string what = h.kind == HiddenKind::Sheet ? "sheet" : h.kind == HiddenKind::Row ? "row" : "column";
        out.fail("hidden_data", Evidence{EvidenceKind::HiddenData, h.identifier, "",
                                         "hidden " + what + " holds " + std::to_string(h.occupied) + " occupied cell(s)"});
    }
    for (const Region& r : analysis.regions) {
        bool data = r.members.size() >= 2 && r.count(CellClass::Label) < r.members.size();
        if (data && !r.has_header_labels) {
            out.fail("header_labels", Evidence{EvidenceKind::UnlabeledRegion, r.locus(), "",
                                               "data block of " + std::to_string(r.members.size()) +
                                                   " cells has no label row or label column"});
        }
        std::size_t formulas = r.count(CellClass::Calculation) + r.count(CellClass::CheckCell);
        if (r.count(CellClass::Input) > 0 && formulas > 0 &&
            !style_distinct(model, analysis.graph, analysis.classes, r, config.style_family_threshold)) {
            out.fail("mixed_input_calc",
                     Evidence{EvidenceKind::MixedInputCalc, r.locus(), "",
                              std::to_string(r.count(CellClass::Input)) + " input and " + std::to_string(formulas) +
                                  " formula cells share a block without distinct formatting"});
        }
    }
    for (const Region& r : detect_orphan_regions(analysis.graph, analysis.classes, analysis.regions,
                                                 config.orphan_includes_label_only)) {
        Evidence e{EvidenceKind::OrphanRegion, r.locus(), "",
                   "block of " + std::to_string(r.members.size()) + " cells is not used by or using any other block"};
        if (config.orphan_fails_verdict) out.fail("orphan_region", std::move(e));
        else if (notes) notes->push_back("placement_labels: possible orphan block " + e.locus);
    }
    return std::move(out).finish(model, ControlId::PlacementLabels, config);
}

Verdict check_display_constants(const WorkbookModel& model, const FormulaTable& formulas, const ControlConfig& config) {
    std::vector<Evidence> found;
    for (const ParsedFormula& pf : formulas.entries()) {
        if (!pf.ast) continue;
        std::string locus;
        for (const formula::NumericLiteral& lit : formula::extract_numeric_literals(*pf.ast)) {
            if (config.whitelisted(lit.value)) continue;
            if (lit.context.kind == formula::LiteralContext::Kind::FunctionArgPosition &&
                config.exempt(lit.context.function, lit.context.arg_index))
                continue;
            if (locus.empty())
                locus = render_address(CellAddress{model.sheets[pf.cell.sheet].name, pf.cell.column, pf.cell.row, false, false});
            found.push_back(Evidence{EvidenceKind::BuriedConstant, locus, lit.lexeme,
                                     "constant " + format_number(lit.value) + " is written into the formula at offset " +
                                         std::to_string(lit.span.begin)});
        }
    }
    VerdictBuilder out;
    if (found.size() > config.max_buried_constants) {
        for (Evidence& e : found) out.fail("buried_constants", std::move(e));
    }
    return std::move(out).finish(model, ControlId::DisplayConstants, config);
}

Verdict check_display_constants(const WorkbookModel& model, const ControlConfig& config) {
    return check_display_constants(model, FormulaTable::parse(model), config);
}

bool WorkbookReport::compliant(ControlId id) const {
    auto it = verdicts.find(id);
    return it != verdicts.end() && it->second.value != VerdictValue::No;
}

WorkbookReport audit_workbook(const WorkbookModel& model, const ControlConfig& config) {
    WorkbookReport report;
    report.path = model.path;
    report.creation_date = model.file_creation_date;
    report.occupied_cells = occupied_cells(model);
    report.calculation_cells = calculation_cells(model);

    WorkbookAnalysis analysis = analyze_workbook(model, config);
    std::vector<std::string> notes;
    report.verdicts[ControlId::DataValidity] = check_data_validity(model, analysis, config, &notes);
    report.verdicts[ControlId::PlacementLabels] = check_placement_labels(model, analysis, config, &notes);
    report.verdicts[ControlId::DisplayConstants] = check_display_constants(model, analysis.formulas, config);

    for (const ParsedFormula& pf : analysis.formulas.entries()) {
        if (pf.ast) continue;
        report.warnings.push_back(std::string(evidence_kind_name(EvidenceKind::UnparsedFormula)) + " at " +
                                  render_address(analysis.graph.address(*analysis.graph.find(pf.cell))) + ": " + pf.error);
    }
    for (const SheetModel& sheet : model.sheets) {
        if (sheet.visibility != SheetVisibility::Visible && (!sheet.hidden_rows.empty() || !sheet.hidden_columns.empty()))
            report.warnings.push_back("hidden rows/columns inside hidden sheet " + sheet.name + " are covered by the sheet entry");
    }
    report.warnings.insert(report.warnings.end(), notes.begin(), notes.end());
    return report;
}

WorkbookReport audit_file(const std::filesystem::path& path, const ControlConfig& config) {
    try {
        WorkbookModel model = load_workbook(path);
        model.path = path.string();
        return audit_workbook(model, config);
    } catch (const LoadError& e) {
        WorkbookReport report;
        report.path = path.string();
        report.error = e.what();
        return report;
    } catch (const std::exception& e) {
        WorkbookReport report;
        report.path = path.string();
        report.error = std::string("InternalError: ") + e.what();
        return report;
    }
}

}  // namespace ssaudit
