#include "ssaudit/classify.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <tuple>

namespace ssaudit {

std::string_view cell_class_name(CellClass c) {
    switch (c) {
        case CellClass::Input: return "Input";
        case CellClass::Calculation: return "Calculation";
        case CellClass::Label: return "Label";
        case CellClass::CheckCell: return "CheckCell";
        case CellClass::Inert: return "Inert";
    }
    return "?";
}

CellClasses classify_cells(const WorkbookModel& model, const DependencyGraph& graph) {
    const auto& nodes = graph.nodes();
    CellClasses classes(nodes.size(), CellClass::Inert);
    std::vector<bool> referenced(nodes.size(), false);
    bool has_formulas = false;
    for (NodeId id = 0; id < nodes.size(); ++id) {
        for (NodeId w : graph.successors(id)) referenced[w] = true;
    }
    std::vector<const Cell*> cells(nodes.size(), nullptr);
    for (NodeId id = 0; id < nodes.size(); ++id) {
        const CellKey& k = nodes[id];
        cells[id] = model.sheets[k.sheet].find(k.row, k.column);
        if (cells[id] && cells[id]->content.kind == CellKind::Formula) has_formulas = true;
    }
    for (NodeId id = 0; id < nodes.size(); ++id) {
        switch (cells[id]->content.kind) {
            case CellKind::Formula: classes[id] = CellClass::Calculation; break;
            case CellKind::Text: classes[id] = CellClass::Label; break;
            default: classes[id] = referenced[id] || has_formulas ? CellClass::Input : CellClass::Inert; break;
        }
    }
    return classes;
}

std::string Region::locus() const {
    std::string out = render_sheet_prefix(sheet_name);
    out += column_to_letters(bounds.first_column) + std::to_string(bounds.first_row);
    if (bounds.first_row != bounds.last_row || bounds.first_column != bounds.last_column)
        out += ":" + column_to_letters(bounds.last_column) + std::to_string(bounds.last_row);
    return out;
}

namespace {

struct DisjointSet {
    std::vector<std::uint32_t> parent;
    explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
    std::uint32_t root(std::uint32_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void join(std::uint32_t a, std::uint32_t b) {
        a = root(a);
        b = root(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

bool mostly_labels(std::size_t labels, std::size_t total, double threshold) {
    return total > 0 && static_cast<double>(labels) >= threshold * static_cast<double>(total);
}

}  // namespace

std::vector<Region> detect_regions(const DependencyGraph& graph, const CellClasses& classes,
                                   double header_label_threshold) {
    const auto& nodes = graph.nodes();
    DisjointSet sets(nodes.size());
    for (NodeId id = 0; id < nodes.size(); ++id) {
        const CellKey& k = nodes[id];
        if (id + 1 < nodes.size() && nodes[id + 1] == CellKey{k.sheet, k.row, k.column + 1}) sets.join(id, id + 1);
        if (auto below = graph.find(CellKey{k.sheet, k.row + 1, k.column})) sets.join(id, *below);
    }

    // Roots are the smallest member id, so first-seen order is sheet/row/column order.
    std::map<std::uint32_t, std::size_t> slot;
    std::vector<Region> regions;
    for (NodeId id = 0; id < nodes.size(); ++id) {
        auto [it, fresh] = slot.emplace(sets.root(id), regions.size());
        const CellKey& k = nodes[id];
        if (fresh) {
            Region r;
            r.sheet = k.sheet;
            r.sheet_name = graph.sheet_names()[k.sheet];
            r.bounds = Bounds{k.row, k.column, k.row, k.column};
            regions.push_back(std::move(r));
        }
        Region& r = regions[it->second];
        r.members.push_back(id);
        r.histogram[static_cast<std::size_t>(classes[id])]++;
        r.bounds.first_row = std::min(r.bounds.first_row, k.row);
        r.bounds.last_row = std::max(r.bounds.last_row, k.row);
        r.bounds.first_column = std::min(r.bounds.first_column, k.column);
        r.bounds.last_column = std::max(r.bounds.last_column, k.column);
    }

    for (Region& r : regions) {
        std::size_t top = 0, top_labels = 0, left = 0, left_labels = 0;
        for (NodeId id : r.members) {
            const CellKey& k = nodes[id];
            bool label = classes[id] == CellClass::Label;
            if (k.row == r.bounds.first_row) {
                ++top;
                top_labels += label;
            }
            if (k.column == r.bounds.first_column) {
                ++left;
                left_labels += label;
            }
        }
        r.has_header_labels = mostly_labels(top_labels, top, header_label_threshold) ||
                              mostly_labels(left_labels, left, header_label_threshold);
    }
    std::sort(regions.begin(), regions.end(), [](const Region& a, const Region& b) {
        return std::tie(a.sheet, a.bounds.first_row, a.bounds.first_column) <
               std::tie(b.sheet, b.bounds.first_row, b.bounds.first_column);
    });
    return regions;
}

void recount_classes(std::vector<Region>& regions, const CellClasses& classes) {
    for (Region& r : regions) {
        r.histogram.fill(0);
        for (NodeId id : r.members) r.histogram[static_cast<std::size_t>(classes[id])]++;
    }
}

std::vector<std::uint32_t> region_membership(const std::vector<Region>& regions, std::size_t node_count) {
    std::vector<std::uint32_t> region_of(node_count, 0);
    for (std::uint32_t i = 0; i < regions.size(); ++i) {
        for (NodeId id : regions[i].members) region_of[id] = i;
    }
    return region_of;
}

StyleFamily style_family(const StyleRecord& style) { return StyleFamily{style.fill_color, style.font_color, style.bold}; }

namespace {

std::optional<StyleFamily> dominant_family(const std::map<StyleFamily, std::size_t>& tally, double threshold) {
    std::size_t total = 0;
    for (const auto& [family, n] : tally) total += n;
    for (const auto& [family, n] : tally) {
        if (total > 0 && static_cast<double>(n) >= threshold * static_cast<double>(total)) return family;
    }
    return std::nullopt;
}

}  // namespace

bool style_distinct(const WorkbookModel& model, const DependencyGraph& graph, const CellClasses& classes,
                    const Region& region, double family_threshold) {
    std::map<StyleFamily, std::size_t> inputs, calcs;
    for (NodeId id : region.members) {
        const CellKey& k = graph.nodes()[id];
        const Cell* cell = model.sheets[k.sheet].find(k.row, k.column);
        if (!cell) continue;
        StyleFamily family = style_family(model.style(cell->style_key));
        if (classes[id] == CellClass::Input) inputs[family]++;
        else if (is_formula_class(classes[id])) calcs[family]++;
    }
    auto in = dominant_family(inputs, family_threshold);
    auto calc = dominant_family(calcs, family_threshold);
    return in && calc && *in != *calc;
}

std::vector<Region> detect_orphan_regions(const DependencyGraph& graph, const CellClasses& classes,
                                          const std::vector<Region>& regions, bool include_label_only) {
    const std::size_t n = graph.nodes().size();
    auto region_of = region_membership(regions, n);
    std::vector<bool> participates(regions.size(), false);

    // A region takes part once any edge starts or ends in it, internal edges included.
    for (NodeId v = 0; v < n; ++v) {
        for (NodeId w : graph.successors(v)) participates[region_of[v]] = participates[region_of[w]] = true;
    }
    for (const RangeEdge& e : graph.range_edges()) {
        participates[region_of[e.source]] = true;
        for (std::uint32_t i = 0; i < regions.size(); ++i) {
            if (regions[i].sheet == e.sheet && regions[i].bounds.overlaps(e.bounds)) participates[i] = true;
        }
    }
    if (std::none_of(participates.begin(), participates.end(), [](bool p) { return p; })) return {};

    std::vector<Region> orphans;
    for (std::uint32_t i = 0; i < regions.size(); ++i) {
        const Region& r = regions[i];
        if (participates[i]) continue;
        auto of_class = [&](CellClass c) {
            return std::count_if(r.members.begin(), r.members.end(), [&](NodeId id) { return classes[id] == c; });
        };
        if (of_class(CellClass::CheckCell) > 0) continue;
        bool label_only = static_cast<std::size_t>(of_class(CellClass::Label)) == r.members.size();
        if (label_only && !include_label_only) continue;
        orphans.push_back(r);
    }
    return orphans;
}

}  // namespace ssaudit
