#pragma once

#include "ssaudit/depgraph.hpp"

#include <array>
#include <string>
#include <vector>

namespace ssaudit {

enum class CellClass { Input, Calculation, Label, CheckCell, Inert };
inline constexpr std::size_t kCellClassCount = 5;
std::string_view cell_class_name(CellClass c);

/// One class per graph node (indexed by NodeId).
using CellClasses = std::vector<CellClass>;

CellClasses classify_cells(const WorkbookModel& model, const DependencyGraph& graph);

/// Formula cells of either class.
inline bool is_formula_class(CellClass c) { return c == CellClass::Calculation || c == CellClass::CheckCell; }

struct Region {
    std::uint32_t sheet = 0;
    std::string sheet_name;
    Bounds bounds;
    std::vector<NodeId> members;   // ascending
    std::array<std::size_t, kCellClassCount> histogram{};
    bool has_header_labels = false;

    std::size_t count(CellClass c) const { return histogram[static_cast<std::size_t>(c)]; }
    /// "Sheet1!A1:C10" (or "Sheet1!A1" for a single cell).
    std::string locus() const;
};

/// Maximal 4-connected blocks of occupied cells, ordered by sheet, then top
/// row, then left column.
std::vector<Region> detect_regions(const DependencyGraph& graph, const CellClasses& classes,
                                   double header_label_threshold = 0.8);

/// Refreshes each region's class histogram (after mark_check_cells).
void recount_classes(std::vector<Region>& regions, const CellClasses& classes);

/// region_of[node] = index into `regions`.
std::vector<std::uint32_t> region_membership(const std::vector<Region>& regions, std::size_t node_count);

/// Cell formatting that counts for visual distinction.
struct StyleFamily {
    std::string fill_color;
    std::string font_color;
    bool bold = false;
    auto operator<=>(const StyleFamily&) const = default;
};

StyleFamily style_family(const StyleRecord& style);

bool style_distinct(const WorkbookModel& model, const DependencyGraph& graph, const CellClasses& classes,
                    const Region& region, double family_threshold = 0.9);

/// Regions with no edge entering or leaving them and no check cell, when
/// another region does take part in the dependency structure.
std::vector<Region> detect_orphan_regions(const DependencyGraph& graph, const CellClasses& classes,
                                          const std::vector<Region>& regions, bool include_label_only = false);

// ---------------------------------------------------------------------------
// Check cells
// ---------------------------------------------------------------------------

enum class CheckTarget { Input, CalculatedOutput };
std::string_view check_target_name(CheckTarget t);

enum class CheckPattern { Difference, Comparison, StatusIf, Magnitude };
std::string_view check_pattern_name(CheckPattern p);

enum class AdequacyDefect { Circular, BrokenLink };
std::string_view adequacy_defect_name(AdequacyDefect d);

struct CheckSignals {
    bool keyword = false;        // nearby label mentions a check word
    bool cross_region = false;   // direct references reach two or more regions
    bool hash_total = false;     // a COUNT/COUNTA/SUM compared against an input cell
    bool operator==(const CheckSignals&) const = default;
};

struct CheckCellFinding {
    CellAddress cell;
    NodeId node = 0;
    CheckTarget target_kind = CheckTarget::Input;
    CheckPattern pattern = CheckPattern::Difference;
    CheckSignals signals;
    std::vector<AdequacyDefect> adequacy_defects;
    std::string defect_detail;   // the cycle member or broken cell reached, if any

    bool adequate() const { return adequacy_defects.empty(); }
};

struct CheckOptions {
    std::vector<std::string> keywords{"check", "diff", "difference", "variance", "var",   "tie",
                                      "recon", "reconcile", "control", "hash",     "balance", "oob"};
    std::uint32_t label_distance = 3;
};

/// Formula shape alone (no corroboration). Exposed for tests.
std::optional<CheckPattern> match_check_pattern(const formula::Node& root, const DependencyGraph& graph,
                                                const CellClasses& classes, std::uint32_t sheet);

std::vector<CheckCellFinding> detect_check_cells(const WorkbookModel& model, const DependencyGraph& graph,
                                                 const FormulaTable& formulas, const CellClasses& classes,
                                                 const std::vector<Region>& regions,
                                                 const std::vector<std::vector<CellAddress>>& cycles,
                                                 const std::vector<BrokenLink>& broken,
                                                 const CheckOptions& options = {});

/// Reclassifies every finding's cell as CheckCell.
void mark_check_cells(CellClasses& classes, const std::vector<CheckCellFinding>& findings);

}  // namespace ssaudit
