#pragma once

#include "ssaudit/formula.hpp"
#include "ssaudit/workbook.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ssaudit {

/// Position of an occupied cell: sheet index within the model, row, column.
struct CellKey {
    std::uint32_t sheet = 0;
    std::uint32_t row = 0;
    std::uint32_t column = 0;
    auto operator<=>(const CellKey&) const = default;
};

/// One formula cell's parse outcome.
struct ParsedFormula {
    CellKey cell;
    std::shared_ptr<const formula::FormulaAst> ast;   // null when unparsed
    std::string error;                                 // LexError/ParseError text when unparsed
};

/// Parsed formulas for every Formula cell, in CellKey order.
class FormulaTable {
public:
    static FormulaTable parse(const WorkbookModel& model);

    const ParsedFormula* find(const CellKey& key) const;
    const std::vector<ParsedFormula>& entries() const { return entries_; }

private:
    std::vector<ParsedFormula> entries_;
};

enum class UnresolvedReason { ExternalBookMissing, NamedRangeUndefined, SheetMissing, RefError };
std::string_view unresolved_reason_name(UnresolvedReason reason);

struct Bounds {
    std::uint32_t first_row = 0, first_column = 0, last_row = 0, last_column = 0;
    bool operator==(const Bounds&) const = default;
    bool contains(std::uint32_t row, std::uint32_t column) const {
        return row >= first_row && row <= last_row && column >= first_column && column <= last_column;
    }
    bool overlaps(const Bounds& o) const {
        return first_row <= o.last_row && o.first_row <= last_row && first_column <= o.last_column &&
               o.first_column <= last_column;
    }
};

using NodeId = std::uint32_t;

/// Marker edge from a formula to a whole range (kept besides the per-cell edges).
struct RangeEdge {
    NodeId source;
    std::uint32_t sheet;
    Bounds bounds;   // clamped to the sheet's used region
};

struct UnresolvedRef {
    NodeId source;
    std::string text;
    UnresolvedReason reason;
};

/// Formula cell -> referenced cell. Nodes are all occupied cells.
class DependencyGraph {
public:
    const std::vector<CellKey>& nodes() const { return nodes_; }
    const std::vector<NodeId>& successors(NodeId id) const { return out_[id]; }
    const std::vector<RangeEdge>& range_edges() const { return range_edges_; }
    const std::vector<UnresolvedRef>& unresolved() const { return unresolved_; }
    /// References into other workbooks that the package declares (never followed).
    const std::vector<std::pair<NodeId, std::string>>& external_refs() const { return external_refs_; }

    std::optional<NodeId> find(const CellKey& key) const;
    std::optional<NodeId> find(const CellAddress& address) const;
    CellAddress address(NodeId id) const;
    std::size_t edge_count() const;
    const std::vector<std::string>& sheet_names() const { return sheet_names_; }

private:
    friend DependencyGraph build_graph(const WorkbookModel&, const FormulaTable&);

    std::vector<std::string> sheet_names_;
    std::vector<CellKey> nodes_;
    std::vector<std::vector<NodeId>> out_;
    std::vector<RangeEdge> range_edges_;
    std::vector<UnresolvedRef> unresolved_;
    std::vector<std::pair<NodeId, std::string>> external_refs_;
};

DependencyGraph build_graph(const WorkbookModel& model, const FormulaTable& formulas);
DependencyGraph build_graph(const WorkbookModel& model);

/// Strongly connected components of two or more cells plus self-loops.
/// Each cycle is sorted by location; cycles are ordered by their first cell.
std::vector<std::vector<CellAddress>> find_cycles(const DependencyGraph& graph);

enum class BrokenReason { ExternalBookMissing, NamedRangeUndefined, SheetMissing, RefError, ErrorValue };
std::string_view broken_reason_name(BrokenReason reason);

struct BrokenLink {
    CellAddress cell;
    BrokenReason reason;
    std::string detail;   // offending reference text or error code
    bool operator==(const BrokenLink&) const = default;
};

/// Cached or literal error values plus the graph's unresolved references
/// (which include #REF! left in formula text). Sorted by location, one entry per (cell, reason, detail).
std::vector<BrokenLink> find_broken_links(const WorkbookModel& model, const DependencyGraph& graph);

}  // namespace ssaudit
