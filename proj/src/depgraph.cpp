#include "ssaudit/depgraph.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace ssaudit {

using formula::ExtractedRef;
using formula::Node;

std::string_view unresolved_reason_name(UnresolvedReason reason) {
    switch (reason) {
        case UnresolvedReason::ExternalBookMissing: return "ExternalBookMissing";
        case UnresolvedReason::NamedRangeUndefined: return "NamedRangeUndefined";
        case UnresolvedReason::SheetMissing: return "SheetMissing";
        case UnresolvedReason::RefError: return "RefError";
    }
    return "?";
}

std::string_view broken_reason_name(BrokenReason reason) {
    switch (reason) {
        case BrokenReason::ExternalBookMissing: return "ExternalBookMissing";
        case BrokenReason::NamedRangeUndefined: return "NamedRangeUndefined";
        case BrokenReason::SheetMissing: return "SheetMissing";
        case BrokenReason::RefError: return "RefError";
        case BrokenReason::ErrorValue: return "ErrorValue";
    }
    return "?";
}

FormulaTable FormulaTable::parse(const WorkbookModel& model) {
    FormulaTable table;
    for (std::uint32_t s = 0; s < model.sheets.size(); ++s) {
        for (const auto& [pos, cell] : model.sheets[s].cells) {
            if (cell.content.kind != CellKind::Formula) continue;
            ParsedFormula pf;
            pf.cell = CellKey{s, pos.row, pos.column};
            try {
                pf.ast = std::make_shared<formula::FormulaAst>(formula::parse_formula(cell.content.formula));
            } catch (const formula::LexError& e) {
                pf.error = e.what();
            } catch (const formula::ParseError& e) {
                pf.error = e.what();
            }
            table.entries_.push_back(std::move(pf));
        }
    }
    return table;
}

const ParsedFormula* FormulaTable::find(const CellKey& key) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                               [](const ParsedFormula& p, const CellKey& k) { return p.cell < k; });
    return it != entries_.end() && it->cell == key ? &*it : nullptr;
}

std::optional<NodeId> DependencyGraph::find(const CellKey& key) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), key);
    if (it == nodes_.end() || *it != key) return std::nullopt;
    return static_cast<NodeId>(it - nodes_.begin());
}

std::optional<NodeId> DependencyGraph::find(const CellAddress& address) const {
    for (std::uint32_t s = 0; s < sheet_names_.size(); ++s) {
        if (iequals(sheet_names_[s], address.sheet_name)) return find(CellKey{s, address.row, address.column});
    }
    return std::nullopt;
}

CellAddress DependencyGraph::address(NodeId id) const {
    const CellKey& k = nodes_[id];
    return CellAddress{sheet_names_[k.sheet], k.column, k.row, false, false};
}

std::size_t DependencyGraph::edge_count() const {
    std::size_t n = 0;
    for (const auto& v : out_) n += v.size();
    return n;
}

namespace {

constexpr int kMaxNameDepth = 8;

std::string basename_of(std::string_view target) {
    auto slash = target.find_last_of("/\\");
    return std::string(slash == std::string_view::npos ? target : target.substr(slash + 1));
}

class GraphBuilder {
public:
    GraphBuilder(const WorkbookModel& model, std::vector<CellKey>& nodes, std::vector<std::vector<NodeId>>& out,
                 std::vector<RangeEdge>& ranges, std::vector<UnresolvedRef>& unresolved,
                 std::vector<std::pair<NodeId, std::string>>& external)
        : model_(model), nodes_(nodes), out_(out), ranges_(ranges), unresolved_(unresolved), external_(external) {
        used_.resize(model.sheets.size());
        for (std::size_t s = 0; s < model.sheets.size(); ++s) {
            const auto& cells = model.sheets[s].cells;
            if (cells.empty()) continue;
            Bounds b{cells.begin()->first.row, kMaxColumns, cells.rbegin()->first.row, 1};
            for (const auto& [pos, cell] : cells) {
                b.first_column = std::min(b.first_column, pos.column);
                b.last_column = std::max(b.last_column, pos.column);
            }
            used_[s] = b;
        }
    }

    void add_formula(NodeId source, std::uint32_t sheet, const formula::FormulaAst& ast) {
        for (const ExtractedRef& ref : formula::extract_refs(ast)) resolve(source, sheet, *ref.node, 0);
        for (const Node* err : formula::extract_error_literals(ast)) {
            if (err->as<formula::ErrorLit>()->code == ErrorCode::Ref)
                unresolved_.push_back({source, formula::render(*err), UnresolvedReason::RefError});
        }
    }

private:
    std::optional<NodeId> find(const CellKey& key) const {
        auto it = std::lower_bound(nodes_.begin(), nodes_.end(), key);
        if (it == nodes_.end() || *it != key) return std::nullopt;
        return static_cast<NodeId>(it - nodes_.begin());
    }

    void unresolved(NodeId source, const Node& node, UnresolvedReason reason) {
        unresolved_.push_back({source, formula::render(node), reason});
    }

    // Returns false (after recording why) when the external book is unknown.
    bool external_ok(NodeId source, const Node& node, const formula::RefPrefix& prefix) {
        const std::string& book = *prefix.external_book;
        const ExternalLink* link = nullptr;
        bool numeric = !book.empty() && std::all_of(book.begin(), book.end(), [](char c) { return c >= '0' && c <= '9'; });
        if (numeric) {
            std::size_t idx = std::stoul(book);
            if (idx >= 1 && idx <= model_.external_links.size()) link = &model_.external_links[idx - 1];
        } else {
            for (const auto& l : model_.external_links) {
                if (iequals(basename_of(l.target), book) || iequals(l.target, book)) link = &l;
            }
        }
        if (!link || !link->resolved) {
            unresolved(source, node, UnresolvedReason::ExternalBookMissing);
            return false;
        }
        if (!prefix.sheet.empty() && !link->sheet_names.empty() &&
            std::none_of(link->sheet_names.begin(), link->sheet_names.end(),
                         [&](const std::string& s) { return iequals(s, prefix.sheet); })) {
            unresolved(source, node, UnresolvedReason::SheetMissing);
            return false;
        }
        external_.emplace_back(source, formula::render(node));
        return true;
    }

    void resolve(NodeId source, std::uint32_t context_sheet, const Node& node, int depth) {
        const formula::RefPrefix* prefix = nullptr;
        if (const auto* r = node.as<formula::Ref>()) prefix = &r->prefix;
        else if (const auto* g = node.as<formula::Range>()) prefix = &g->prefix;
        else if (const auto* n = node.as<formula::NamedRef>()) prefix = &n->prefix;
        if (!prefix) return;

        if (prefix->external_book) {
            external_ok(source, node, *prefix);
            return;
        }
        std::uint32_t sheet = context_sheet;
        if (!prefix->sheet.empty()) {
            auto idx = model_.sheet_index(prefix->sheet);
            if (!idx) {
                unresolved(source, node, UnresolvedReason::SheetMissing);
                return;
            }
            sheet = static_cast<std::uint32_t>(*idx);
        }

        if (const auto* r = node.as<formula::Ref>()) {
            if (auto target = find(CellKey{sheet, r->address.row, r->address.column})) out_[source].push_back(*target);
            return;
        }
        if (const auto* g = node.as<formula::Range>()) return add_range(source, sheet, *g);

        const auto& named = *node.as<formula::NamedRef>();
        resolve_name(source, prefix->sheet.empty() ? context_sheet : sheet, !prefix->sheet.empty(), node, named.name,
                     depth);
    }

    void add_range(NodeId source, std::uint32_t sheet, const formula::Range& g) {
        Bounds b{std::min(g.start.row, g.end.row), std::min(g.start.column, g.end.column),
                 std::max(g.start.row, g.end.row), std::max(g.start.column, g.end.column)};
        if (!used_[sheet]) {
            if (g.shape == formula::RangeShape::Area) ranges_.push_back({source, sheet, b});
            return;
        }
        const Bounds& used = *used_[sheet];
        Bounds clamped{std::max(b.first_row, used.first_row), std::max(b.first_column, used.first_column),
                       std::min(b.last_row, used.last_row), std::min(b.last_column, used.last_column)};
        bool empty = clamped.first_row > clamped.last_row || clamped.first_column > clamped.last_column;
        if (g.shape == formula::RangeShape::Area) ranges_.push_back({source, sheet, b});
        else if (!empty) ranges_.push_back({source, sheet, clamped});
        if (empty) return;

        for (std::uint32_t row = clamped.first_row; row <= clamped.last_row; ++row) {
            auto it = std::lower_bound(nodes_.begin(), nodes_.end(), CellKey{sheet, row, clamped.first_column});
            for (; it != nodes_.end() && it->sheet == sheet && it->row == row && it->column <= clamped.last_column; ++it)
                out_[source].push_back(static_cast<NodeId>(it - nodes_.begin()));
        }
    }

    const formula::FormulaAst* parsed_name(std::size_t index) {
        auto it = name_cache_.find(index);
        if (it == name_cache_.end()) {
            std::shared_ptr<formula::FormulaAst> ast;
            try {
                ast = std::make_shared<formula::FormulaAst>(formula::parse_formula(model_.defined_names[index].formula));
            } catch (const std::exception&) {
            }
            it = name_cache_.emplace(index, std::move(ast)).first;
        }
        return it->second.get();
    }

    void resolve_name(NodeId source, std::uint32_t sheet, bool explicit_sheet, const Node& node, const std::string& name,
                      int depth) {
        std::optional<std::size_t> found;
        for (std::size_t i = 0; i < model_.defined_names.size(); ++i) {
            const auto& dn = model_.defined_names[i];
            if (!iequals(dn.name, name)) continue;
            if (dn.local_sheet && *dn.local_sheet == sheet) {
                found = i;
                break;
            }
            if (!dn.local_sheet && !explicit_sheet && !found) found = i;
        }
        if (!found) {
            unresolved(source, node, UnresolvedReason::NamedRangeUndefined);
            return;
        }
        if (depth >= kMaxNameDepth) return;
        const formula::FormulaAst* ast = parsed_name(*found);
        if (!ast || !ast->root) return;   // constant or unsupported expression: nothing to link
        for (const Node* err : formula::extract_error_literals(*ast)) {
            if (err->as<formula::ErrorLit>()->code == ErrorCode::Ref) {
                unresolved(source, node, UnresolvedReason::RefError);
                return;
            }
        }
        const auto& dn = model_.defined_names[*found];
        std::uint32_t name_sheet = dn.local_sheet ? static_cast<std::uint32_t>(*dn.local_sheet) : sheet;
        for (const ExtractedRef& ref : formula::extract_refs(*ast)) resolve(source, name_sheet, *ref.node, depth + 1);
    }

    const WorkbookModel& model_;
    std::vector<CellKey>& nodes_;
    std::vector<std::vector<NodeId>>& out_;
    std::vector<RangeEdge>& ranges_;
    std::vector<UnresolvedRef>& unresolved_;
    std::vector<std::pair<NodeId, std::string>>& external_;
    std::vector<std::optional<Bounds>> used_;
    std::map<std::size_t, std::shared_ptr<formula::FormulaAst>> name_cache_;
};

}  // namespace

DependencyGraph build_graph(const WorkbookModel& model, const FormulaTable& formulas) {
    DependencyGraph g;
    for (const auto& sheet : model.sheets) g.sheet_names_.push_back(sheet.name);
    for (std::uint32_t s = 0; s < model.sheets.size(); ++s) {
        for (const auto& [pos, cell] : model.sheets[s].cells) {
            if (cell.content.kind != CellKind::Blank) g.nodes_.push_back(CellKey{s, pos.row, pos.column});
        }
    }
    g.out_.resize(g.nodes_.size());

    GraphBuilder builder(model, g.nodes_, g.out_, g.range_edges_, g.unresolved_, g.external_refs_);
    for (const ParsedFormula& pf : formulas.entries()) {
        if (!pf.ast) continue;
        auto source = g.find(pf.cell);
        if (!source) continue;
        builder.add_formula(*source, pf.cell.sheet, *pf.ast);
    }
    for (auto& succ : g.out_) {
        std::sort(succ.begin(), succ.end());
        succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
    }
    return g;
}

DependencyGraph build_graph(const WorkbookModel& model) { return build_graph(model, FormulaTable::parse(model)); }

std::vector<std::vector<CellAddress>> find_cycles(const DependencyGraph& graph) {
    const std::size_t n = graph.nodes().size();
    constexpr std::uint32_t kUnvisited = UINT32_MAX;
    std::vector<std::uint32_t> index(n, kUnvisited), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<NodeId> stack;
    struct Frame {
        NodeId v;
        std::size_t next;
    };
    std::vector<Frame> calls;
    std::uint32_t counter = 0;
    std::vector<std::vector<CellAddress>> cycles;

    for (NodeId root = 0; root < n; ++root) {
        if (index[root] != kUnvisited || graph.successors(root).empty()) continue;
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        calls.push_back({root, 0});
        while (!calls.empty()) {
            Frame& f = calls.back();
            const auto& succ = graph.successors(f.v);
            if (f.next < succ.size()) {
                NodeId w = succ[f.next++];
                if (index[w] == kUnvisited) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    calls.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
                continue;
            }
            NodeId v = f.v;
            calls.pop_back();
            if (!calls.empty()) low[calls.back().v] = std::min(low[calls.back().v], low[v]);
            if (low[v] != index[v]) continue;

            std::vector<NodeId> component;
            NodeId w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack[w] = false;
                component.push_back(w);
            } while (w != v);
            const auto& vs = graph.successors(v);
            bool self_loop = std::binary_search(vs.begin(), vs.end(), v);
            if (component.size() < 2 && !self_loop) continue;
            std::vector<CellAddress> cycle;
            for (NodeId c : component) cycle.push_back(graph.address(c));
            std::sort(cycle.begin(), cycle.end(), LocationLess{});
            cycles.push_back(std::move(cycle));
        }
    }
    std::sort(cycles.begin(), cycles.end(), [](const auto& a, const auto& b) {
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), LocationLess{});
    });
    return cycles;
}

std::vector<BrokenLink> find_broken_links(const WorkbookModel& model, const DependencyGraph& graph) {
    std::vector<BrokenLink> out;
    for (const auto& sheet : model.sheets) {
        for (const auto& [pos, cell] : sheet.cells) {
            if (auto code = cell.content.error()) {
                out.push_back({CellAddress{sheet.name, pos.column, pos.row, false, false},
                               *code == ErrorCode::Ref ? BrokenReason::RefError : BrokenReason::ErrorValue,
                               std::string(error_code_text(*code))});
            }
        }
    }
    for (const auto& u : graph.unresolved()) {
        BrokenReason reason = BrokenReason::RefError;
        switch (u.reason) {
            case UnresolvedReason::ExternalBookMissing: reason = BrokenReason::ExternalBookMissing; break;
            case UnresolvedReason::NamedRangeUndefined: reason = BrokenReason::NamedRangeUndefined; break;
            case UnresolvedReason::SheetMissing: reason = BrokenReason::SheetMissing; break;
            case UnresolvedReason::RefError: reason = BrokenReason::RefError; break;
        }
        out.push_back({graph.address(u.source), reason, u.text});
    }
    auto key = [](const BrokenLink& b) {
        return std::tuple(b.cell.sheet_name, b.cell.row, b.cell.column, static_cast<int>(b.reason), b.detail);
    };
    std::sort(out.begin(), out.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace ssaudit
